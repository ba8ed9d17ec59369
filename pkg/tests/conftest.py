# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import importlib.metadata
import importlib.resources

import numpy as np
import pytest

from py4mammo.model import BreastMeasurements, CaseInputs

x_r, y_r, z_r = 6.25, 7.0, 7.0
H_c = 10.5
a = 6.75


@pytest.fixture(scope="session")
def is_core():
    try:
        importlib.metadata.distribution("py4mammo-core")
        return True
    except importlib.metadata.PackageNotFoundError:
        return False


@pytest.fixture()
def not_core(is_core):
    if is_core:
        pytest.skip("This test requires features not present in py4mammo-core.")


class _Assert:
    @staticmethod
    def allclose(actual, desired, tolerance=1e-12):
        actual = np.asarray(actual)
        desired = np.asarray(desired)
        assert actual.shape == desired.shape
        assert np.allclose(actual, desired, rtol=tolerance, atol=tolerance)

    @staticmethod
    def close_target(actual, desired, tolerance):
        r, p, d = desired
        assert actual.r == pytest.approx(r, abs=tolerance)
        assert actual.p == pytest.approx(p, abs=tolerance)
        assert actual.d == pytest.approx(d, abs=tolerance)


@pytest.fixture(scope="session")
def Assert():
    return _Assert


@pytest.fixture
def measurements():
    "Radii of case 0023-1 at SRG and CRC."
    return BreastMeasurements(
        x_r=x_r, y_r=y_r, z_r=z_r, H_c=H_c, lat_x=9.4, lat_z=9.17
    )


@pytest.fixture
def case():
    "Observed positions of case 0023-1."
    return CaseInputs(cc_coords=(6.83, 3.20), mlo_coords=(-5.2, 6.1), b_c=0.95)


@pytest.fixture
def reference_extremes():
    "Chord extremes in the virtual MLO view as computed by the full simulation."
    return complex(-7.47, 6.22), complex(-0.332, 4.25)


@pytest.fixture
def case_text():
    resource = importlib.resources.files("py4mammo.data") / "case_0023-1.txt"
    return resource.read_text(encoding="utf-8")


@pytest.fixture
def case_file(tmp_path, case_text):
    def _case_file(text=case_text, **replace):
        lines = []
        for line in text.splitlines():
            key = line.split("=")[0].strip()
            if key in replace:
                value = replace.pop(key)
                if value is None:
                    continue
                line = f"{key} = {value}"
            lines.append(line)
        lines += [f"{key} = {value}" for key, value in replace.items()]
        path = tmp_path / "case.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _case_file

