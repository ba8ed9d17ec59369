# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from py4mammo import exception, model
from py4mammo.model import BreastMeasurements, NodulePosition, Side, SurgeryTarget

positive = st.floats(min_value=0.5, max_value=50.0)


def test_build_measurements_of_case():
    measurements = model.build_measurements(
        fthrx=65.0, brsep=40.0, vertical_arc=22.0, crc_arc=33.0, lat_x=9.4, lat_z=9.17
    )
    assert measurements.x_r == 6.25
    assert measurements.y_r == pytest.approx(7.0, abs=5e-3)
    assert measurements.z_r == measurements.y_r
    assert measurements.H_c == pytest.approx(10.5, abs=5e-3)


def test_build_measurements_with_exact_arcs():
    measurements = model.build_measurements(
        65.0, 40.0, 7 * math.pi, 10.5 * math.pi, 9.4, 9.17
    )
    assert measurements.radii == pytest.approx((6.25, 7.0, 7.0))
    assert measurements.H_c == pytest.approx(10.5)


def test_degenerate_thorax_is_rejected():
    with pytest.raises(exception.ValidationError) as error:
        model.build_measurements(40.0, 40.0, 22.0, 33.0, 9.4, 9.17)
    assert error.value.field == "brsep"


@pytest.mark.parametrize("field", ["fthrx", "vertical_arc", "crc_arc", "lat_x"])
def test_non_positive_input_names_field(field):
    inputs = dict(
        fthrx=65.0, brsep=40.0, vertical_arc=22.0, crc_arc=33.0, lat_x=9.4, lat_z=9.17
    )
    inputs[field] = -1.0
    with pytest.raises(exception.ValidationError) as error:
        model.build_measurements(**inputs)
    assert error.value.field == field


def test_mean_radius(measurements):
    assert model.mean_radius(measurements) == 6.75
    unit = BreastMeasurements(1, 1, 1, 1, 1, 1)
    assert model.mean_radius(unit) == 1
    assert model.mean_radius(BreastMeasurements(3, 4, 5, 6, 1, 1)) == 4


def test_symmetrize(measurements):
    breast = model.symmetrize(measurements)
    assert breast.a == 6.75
    assert breast.nipple == (0.0, 0.0, 7.0)


@given(x=positive, y=positive, z=positive)
def test_mean_radius_is_permutation_invariant(x, y, z):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", exception.ModelWarning)
        first = model.mean_radius(BreastMeasurements(x, y, z, 100.0, 1.0, 1.0))
        second = model.mean_radius(BreastMeasurements(z, x, y, 100.0, 1.0, 1.0))
    assert first == pytest.approx(second, rel=1e-14)


@given(scale=st.floats(min_value=0.1, max_value=10.0))
def test_build_measurements_is_scale_equivariant(scale):
    inputs = (65.0, 40.0, 22.0, 33.0, 9.4, 9.17)
    reference = model.build_measurements(*inputs)
    scaled = model.build_measurements(*(scale * x for x in inputs))
    for field in ("x_r", "y_r", "z_r", "H_c", "lat_x", "lat_z"):
        expected = scale * getattr(reference, field)
        assert getattr(scaled, field) == pytest.approx(expected, rel=1e-12)


def test_radii_disparity_warns():
    with pytest.warns(exception.ModelWarning, match="11%"):
        measurements = BreastMeasurements(5.0, 7.0, 7.0, 10.5, 9.4, 9.17)
    assert model.radii_disparity(measurements) == pytest.approx(2 / 7)


def test_case_radii_do_not_warn(measurements):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        BreastMeasurements(*measurements.radii, 10.5, 9.4, 9.17)
    assert model.radii_disparity(measurements) == pytest.approx(0.75 / 7)


def test_small_compressed_radius_warns():
    with pytest.warns(exception.ModelWarning, match="H_c"):
        BreastMeasurements(6.25, 7.0, 7.0, 5.0, 9.4, 9.17)


def test_view_scaling(measurements):
    assert model.net_view_scaling(measurements) == pytest.approx((1.68, 1.5))
    lat = model.lat_dilation(measurements)
    crc = model.crc_compression(measurements)
    assert lat[0] * crc[0] == pytest.approx(1.68)
    assert lat[1] * crc[1] == pytest.approx(1.5)


def test_mirror_x():
    assert model.mirror_x((4.07, 1.81, 2.13)) == (-4.07, 1.81, 2.13)
    assert model.mirror_x(model.mirror_x((1.0, 2.0, 3.0))) == (1.0, 2.0, 3.0)


def test_case_inputs(case, measurements):
    assert case.mlo_point == complex(-5.2, 6.1)
    assert case.disk_radius(measurements) == 10.5
    with pytest.raises(exception.ValidationError):
        model.CaseInputs(cc_coords=(1.0, 1.0), mlo_coords=(0.0, 0.0), b_c=10.5, H=10.5)
    with pytest.raises(exception.ValidationError):
        model.CaseInputs(cc_coords=("1", 1.0), mlo_coords=(0.0, 0.0), b_c=0.5)


def test_nodule_position():
    nodule = NodulePosition(x_n=3.0, y_n=4.0, z_n=0.0, lf=0.5, rho=0.2)
    assert nodule.point == (3.0, 4.0, 0.0)
    assert nodule.norm == 5.0
    with pytest.raises(exception.DomainError):
        NodulePosition(x_n=0.0, y_n=0.0, z_n=-0.1, lf=0.5, rho=0.5)
    with pytest.raises(exception.ValidationError):
        NodulePosition(x_n=0.0, y_n=0.0, z_n=1.0, lf=1.5, rho=0.5)


def test_surgery_target_rejects_negative_depth():
    with pytest.raises(exception.DomainError):
        SurgeryTarget(r=1.0, p=0.0, d=-0.1)


def test_side_flipped():
    assert Side.FRONT.flipped() is Side.BACK
    assert Side.BACK.flipped() is Side.FRONT
