# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import math

import numpy as np
import pytest
from scipy import integrate

from py4mammo import exception, geodesic, localization
from py4mammo.geodesic import EllipsoidSurface
from py4mammo.model import Method, NodulePosition

a = 6.75


@pytest.fixture
def sphere():
    return EllipsoidSurface(a, a, a)


@pytest.fixture
def surface(measurements):
    return EllipsoidSurface.from_measurements(measurements)


@pytest.fixture
def case_nodule():
    return localization.build_nodule(4.07, 2.13, 0.317, a)


def on_sphere(height, azimuth):
    ring = math.sqrt(a**2 - height**2)
    return np.array((ring * math.cos(azimuth), ring * math.sin(azimuth), height))


def meridian_length(x_r, z_r, angle):
    def speed(t):
        return math.hypot(x_r * math.cos(t), z_r * math.sin(t))

    length, _ = integrate.quad(speed, 0, angle, epsabs=1e-12, epsrel=1e-12)
    return length


def test_surface_of_case(surface):
    assert surface.radii.tolist() == [6.25, 7.0, 7.0]
    assert surface.apex.tolist() == [0.0, 0.0, 7.0]
    assert surface.level(surface.apex) == 0
    assert surface.level((0, 0, 0)) == -1
    with pytest.raises(exception.ValidationError):
        EllipsoidSurface(6.25, 0.0, 7.0)


@pytest.mark.parametrize("azimuth", [0.0, 0.7, -2.5])
def test_sphere_follows_great_circle(sphere, azimuth):
    target = on_sphere(2.13, azimuth)
    length = geodesic.geodesic_from_nipple(sphere, target)
    assert length == pytest.approx(8.4358, abs=1e-3)
    assert length == pytest.approx(a * math.acos(2.13 / a), rel=1e-7)


def test_nipple_has_zero_distance(surface):
    assert geodesic.geodesic_from_nipple(surface, surface.apex) == 0


def test_meridian_in_plane_of_symmetry(surface):
    angle = 1.0
    target = (6.25 * math.sin(angle), 0.0, 7.0 * math.cos(angle))
    expected = meridian_length(6.25, 7.0, angle)
    assert geodesic.geodesic_from_nipple(surface, target) == pytest.approx(
        expected, rel=1e-7
    )
    sagittal = (0.0, -7.0 * math.sin(angle), 7.0 * math.cos(angle))
    assert geodesic.geodesic_from_nipple(surface, sagittal) == pytest.approx(
        7.0 * angle, rel=1e-7
    )


def test_shooting_adjusts_direction(surface):
    target = geodesic.radial_skin_point(surface, (4.07, 1.81, 2.13))
    distance = geodesic._geodesic(surface, target, 1e-8)
    azimuth = math.atan2(target[1], target[0])
    assert not distance.approximate
    assert distance.direction != pytest.approx(azimuth, abs=1e-6)
    assert distance.length > np.linalg.norm(target - surface.apex)


@pytest.mark.parametrize("factor", [0.5, 2.0])
def test_scale_equivariance(surface, factor):
    target = geodesic.radial_skin_point(surface, (-2.0, 3.0, 1.5))
    scaled = EllipsoidSurface(*(factor * surface.radii))
    expected = factor * geodesic.geodesic_from_nipple(surface, target)
    actual = geodesic.geodesic_from_nipple(scaled, factor * target)
    assert actual == pytest.approx(expected, rel=1e-7)


def test_numeric_target_of_case(surface, case_nodule):
    target = geodesic.surgery_target_numeric(case_nodule, surface)
    closed = localization.surgery_target(case_nodule, a)
    assert target.method is Method.GEODESIC_NUMERIC
    assert not target.approximate
    assert target.r == pytest.approx(7.5921, rel=0.03)
    assert target.p == pytest.approx(closed.p)
    assert target.side is closed.side
    skin = geodesic.radial_skin_point(surface, case_nodule.point)
    assert np.allclose(skin, (5.328, 2.369, 2.788), rtol=0, atol=2e-3)
    assert target.d == pytest.approx(np.linalg.norm(skin - case_nodule.point))


def test_numeric_target_on_sphere(sphere, Assert, case_nodule):
    numeric = geodesic.surgery_target_numeric(case_nodule, sphere)
    closed = localization.surgery_target(case_nodule, a)
    Assert.close_target(numeric, (closed.r, closed.p, closed.d), tolerance=1e-6)


def test_radial_skin_point(surface):
    skin = geodesic.radial_skin_point(surface, (1.0, -2.0, 0.5))
    assert surface.level(skin) == pytest.approx(0, abs=1e-12)
    assert np.allclose(np.cross(skin, (1.0, -2.0, 0.5)), 0, rtol=0, atol=1e-12)
    with pytest.raises(exception.DomainError):
        geodesic.radial_skin_point(surface, (0, 0, 0))


def test_invalid_targets(surface):
    below_base = (6.25 * math.sqrt(1 - 1 / 49), 0.0, -1.0)
    with pytest.raises(exception.DomainError):
        geodesic.geodesic_from_nipple(surface, below_base)
    with pytest.raises(exception.DomainError):
        geodesic.geodesic_from_nipple(surface, (1.0, 1.0, 1.0))
    with pytest.raises(exception.ValidationError):
        geodesic.geodesic_from_nipple(surface, (1.0, 1.0))


def test_nodule_outside_of_ellipsoid(surface):
    nodule = NodulePosition(x_n=6.5, y_n=0.0, z_n=0.5, lf=1.0, rho=0.0)
    with pytest.raises(exception.DomainError):
        geodesic.surgery_target_numeric(nodule, surface)


def test_fallback_to_mesh(monkeypatch, sphere, case_nodule):
    def fail(*args):
        raise exception.ConvergenceError("forced")

    monkeypatch.setattr(geodesic, "_shoot", fail)
    with pytest.warns(exception.ApproximationWarning):
        target = geodesic.surgery_target_numeric(case_nodule, sphere)
    assert target.approximate
    expected = localization.surgery_target(case_nodule, a).r
    assert target.r == pytest.approx(expected, rel=0.01)
    with pytest.warns(exception.ApproximationWarning):
        length = geodesic.geodesic_from_nipple(sphere, on_sphere(2.13, 0.0))
    assert length == pytest.approx(8.4358, rel=0.01)


@pytest.mark.slow
def test_shooting_agrees_with_fine_mesh(surface, case_nodule):
    skin = geodesic.radial_skin_point(surface, case_nodule.point)
    shooting = geodesic.geodesic_from_nipple(surface, skin)
    mesh = geodesic._mesh_geodesic(surface, skin, 160, 320)
    assert np.linalg.norm(skin - surface.apex) <= shooting <= 1.01 * mesh


@pytest.mark.parametrize(
    "count", [40, pytest.param(1000, marks=pytest.mark.slow)], ids=["few", "many"]
)
def test_sphere_is_exact_for_random_targets(sphere, count):
    rng = np.random.default_rng(7021)
    polar = rng.uniform(0, math.pi / 2, count)
    polar[0] = math.pi / 2
    azimuth = rng.uniform(-math.pi, math.pi, count)
    for theta, phi in zip(polar, azimuth):
        ring = a * math.sin(theta)
        target = np.array(
            (ring * math.cos(phi), ring * math.sin(phi), a * math.cos(theta))
        )
        length = geodesic.geodesic_from_nipple(sphere, target)
        assert length == pytest.approx(a * theta, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize(
    "count", [10, pytest.param(100, marks=pytest.mark.slow)], ids=["few", "many"]
)
def test_numeric_target_on_sphere_for_random_nodules(sphere, Assert, count):
    rng = np.random.default_rng(1623)
    for _ in range(count):
        z = rng.uniform(0.0, 0.9) * a
        x = rng.uniform(-0.95, 0.95) * math.sqrt(a**2 - z**2)
        nodule = localization.build_nodule(x, z, rng.uniform(0.0, 1.0), a)
        numeric = geodesic.surgery_target_numeric(nodule, sphere)
        closed = localization.surgery_target(nodule, a)
        Assert.close_target(numeric, (closed.r, closed.p, closed.d), tolerance=1e-6)
        assert not numeric.approximate
