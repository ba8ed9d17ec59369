# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO

import pytest

from py4mammo import conformal, phantom
from py4mammo._util import import_
from py4mammo._util.parser import ParseCase
from py4mammo.scripts.cli import main


def run(*args):
    with redirect_stdout(StringIO()) as out, redirect_stderr(StringIO()) as err:
        code = main(list(args))
    return code, out.getvalue(), err.getvalue()


def machine_block(output):
    block = {}
    for line in output.splitlines():
        key, separator, value = line.partition(" = ")
        if separator and not line.startswith("#"):
            block[key.strip()] = value.strip()
    return block


def test_help():
    with redirect_stdout(StringIO()) as buffer:
        with pytest.raises(SystemExit) as error:
            main(["--help"])
    assert error.value.code == 0
    assert "locate" in buffer.getvalue()


def test_locate_reference_case(case_file):
    code, out, _ = run("locate", "--machine", str(case_file()))
    assert code == 0
    assert out.startswith("# py4mammo locate")
    result = machine_block(out)
    assert float(result["r"]) == pytest.approx(7.5945, abs=0.05)
    assert float(result["p"]) == pytest.approx(24.09, abs=0.5)
    assert float(result["d"]) == pytest.approx(1.809, abs=0.02)
    assert float(result["rho"]) == pytest.approx(0.316, abs=3e-3)
    assert result["side"] == "front"
    assert result["skin_shortcut"] == "no"
    assert result["method"] == "closed_form"
    assert result["approximate"] == "no"
    assert result["converged"] == "yes"
    assert result["iterations"] == "0"


def test_locate_is_deterministic(case_file):
    path = str(case_file())
    _, first, _ = run("locate", path)
    _, second, _ = run("locate", path)
    assert first == second


def test_human_report_names_stages(case_file):
    code, out, _ = run("locate", "--no-refine", str(case_file()))
    assert code == 0
    for stage in ("coors", "mk", "mlo", "frho", "target"):
        assert any(line.startswith(stage) for line in out.splitlines())
    assert "cnt" not in out
    assert "refined_lf" not in machine_block(out)


def test_machine_block_is_a_case_file(case_file, case_text):
    _, out, _ = run("locate", "--machine", str(case_file()))
    echoed = ParseCase(out)
    original = ParseCase(case_text)
    assert echoed.measurements == original.measurements
    assert echoed.case_inputs == original.case_inputs
    assert echoed.extremes == original.extremes


def test_locate_with_calibrated_projector(case_file):
    path = str(case_file())
    options = ("--machine", "--projector", "calibrated")
    code, out, _ = run("locate", *options, path)
    assert code == 0
    result = machine_block(out)
    assert result["projector"] == "calibrated"
    assert float(result["refined_lf"]) > 0.81
    assert float(result["refined_d"]) < 1.28
    assert int(result["iterations"]) > 0
    assert result["converged"] == "yes"


def test_flip_side(case_file):
    path = str(case_file())
    _, out, _ = run("locate", "--machine", "--no-refine", "--flip-side", path)
    result = machine_block(out)
    assert result["side"] == "back"
    assert float(result["rho"]) == pytest.approx(0.684, abs=3e-3)
    assert float(result["p"]) == pytest.approx(-24.09, abs=0.5)


def test_numeric_geodesic(case_file):
    path = str(case_file(geodesic="numeric"))
    code, out, _ = run("locate", "--machine", "--no-refine", path)
    assert code == 0
    result = machine_block(out)
    assert result["geodesic"] == "numeric"
    assert result["method"] == "geodesic_numeric"
    assert float(result["r"]) == pytest.approx(7.5921, rel=0.03)


def test_nodule_on_the_skin(case_file):
    params = conformal.mobius_param_from_case(0.95, 10.5)
    image = conformal.mobius_forward(complex(-0.332, 4.25), params)
    path = case_file(pw=repr(image.real), pz=repr(image.imag))
    code, out, _ = run("locate", str(path))
    assert code == 0
    result = machine_block(out)
    assert result["skin_shortcut"] == "yes"
    assert result["d"] == "0.0000"
    assert float(result["r"]) == pytest.approx(8.43, abs=0.02)
    assert "on the skin" in out


@pytest.mark.parametrize(
    "replace, message",
    [
        ({"xc": None}, "xc"),
        ({"bc": "0,95"}, "decimal comma"),
        ({"projector": "spline"}, "projector"),
    ],
)
def test_invalid_case_file(case_file, replace, message):
    code, out, err = run("locate", str(case_file(**replace)))
    assert code == 2
    assert out == ""
    assert err.startswith("py4mammo: error:")
    assert message in err


def test_missing_case_file(tmp_path):
    code, _, err = run("locate", str(tmp_path / "missing.txt"))
    assert code == 2
    assert "missing.txt" in err


@pytest.mark.usefixtures("not_core")
def test_fit_bundled_phantom():
    code, out, _ = run("fit-phantom")
    assert code == 0
    result = machine_block(out)
    for i in range(1, 4):
        for j in range(1, 4):
            assert f"C.{i}{j}" in result
    assert result["max_residual_label"] in "ABCDEFGHIJK"
    assert float(result["max_abs_residual"]) > 0


@pytest.mark.usefixtures("not_core")
def test_fit_truncated_phantom(tmp_path):
    path = tmp_path / "phantom.csv"
    path.write_text("label,xb,yb,zb,xa,ya,za\nA,1.0,2.0\n", encoding="utf-8")
    code, _, err = run("fit-phantom", str(path))
    assert code == 2
    assert "line 2" in err


def test_mobius_inverse():
    options = ("--b", "0.09", "--H", "10.5", "--inverse")
    code, out, _ = run("mobius", *options, "1.2", "4.7")
    assert code == 0
    real, imag = (float(x) for x in out.split())
    assert real == pytest.approx(0.57, abs=0.05)
    assert imag == pytest.approx(4.1, abs=0.05)


def test_mobius_fixed_point():
    code, out, _ = run("mobius", "--b", "0.09", "--H", "10.5", "10.5", "0.0")
    assert code == 0
    assert out == "10.5000 0.0000\n"


def test_mobius_outside_of_disk():
    code, out, err = run("mobius", "--b", "0.09", "--H", "10.5", "11.0", "0.0")
    assert code == 4
    assert out == ""
    assert "outside of the disk" in err


def test_example_case(case_text):
    code, out, _ = run("example-case")
    assert code == 0
    assert out == case_text


@pytest.mark.usefixtures("not_core")
def test_fit_singular_phantom(tmp_path):
    rows = [f"{label},{x}.0,-2.25,0.0,{x}.5,0.0,0.0" for x, label in enumerate("ABCD")]
    path = tmp_path / "phantom.csv"
    path.write_text("\n".join(["label,xb,yb,zb,xa,ya,za", *rows]), encoding="utf-8")
    code, out, err = run("fit-phantom", str(path))
    assert code == 3
    assert out == ""
    assert err.startswith("py4mammo: error:")


def test_machine_block_keeps_small_values_parseable(case_file):
    path = case_file(bc="0.00005")
    code, out, _ = run("locate", "--machine", "--no-refine", str(path))
    assert code == 0
    assert machine_block(out)["bc"] == "0.00005"
    echoed = ParseCase(out)
    assert echoed.case_inputs == ParseCase(path.read_text()).case_inputs
    rerun = case_file(out)
    _, again, _ = run("locate", "--machine", "--no-refine", str(rerun))
    assert again == out


def test_fit_phantom_without_pandas(monkeypatch):
    missing = import_.optional("_pandas_is_missing_", feature="reading phantom tables")
    monkeypatch.setattr(phantom, "pd", missing)
    code, out, err = run("fit-phantom")
    assert code == 2
    assert out == ""
    assert "Reading phantom tables" in err


def test_phantom_coupling_without_pandas(monkeypatch, case_file):
    missing = import_.optional("_pandas_is_missing_", feature="reading phantom tables")
    monkeypatch.setattr(phantom, "pd", missing)
    code, _, err = run("locate", str(case_file(phantom_coupling="yes")))
    assert code == 2
    assert err.startswith("py4mammo: error:")
