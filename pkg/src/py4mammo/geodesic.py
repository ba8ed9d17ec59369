# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Virtual tape-measure on the half-ellipsoid.

The closed-form radius r = a arccos(z_n / |OP|) is exact only on the symmetrized
sphere. This module measures the geodesic distance from the nipple on the true upper
half-ellipsoid with the radii x_r, y_r and z_r. A geodesic leaves the apex in the
direction (cos ψ, sin ψ, 0) and follows

.. math::

    \\ddot{x} = -\\frac{\\sum_i \\dot{x}_i^2 / r_i^2}{\\sum_i x_i^2 / r_i^4}
    \\frac{x}{r^2}

until it descends to the height of the target. The direction ψ is adjusted by
bisection until the geodesic arrives at the azimuth of the target.
"""
import dataclasses
import logging
import math
import warnings
from typing import Optional

import numpy as np
from scipy import integrate, optimize, sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from py4mammo import _config, exception, localization
from py4mammo._util import check
from py4mammo.model import Method, Side, SurgeryTarget

logger = logging.getLogger(__name__)

_BRACKET_WIDTHS = (0.05, 0.1, 0.2, 0.4, 0.8, 1.2, 1.5)
_FALLBACK_MESH = (60, 120)
_NEIGHBORS = 8


@dataclasses.dataclass(frozen=True)
class EllipsoidSurface:
    "Upper half of the ellipsoid with the nipple at the apex (0, 0, z_r)."

    x_r: float
    y_r: float
    z_r: float

    def __post_init__(self):
        for field in dataclasses.fields(self):
            check.raise_error_if_not_positive(getattr(self, field.name), field.name)

    @classmethod
    def from_measurements(cls, measurements):
        return cls(*measurements.radii)

    @property
    def radii(self):
        return np.array((self.x_r, self.y_r, self.z_r))

    @property
    def apex(self):
        return np.array((0.0, 0.0, self.z_r))

    def level(self, point):
        "Value of Σ (x_i / r_i)² - 1, zero on the surface."
        return float(np.sum((np.asarray(point, dtype=float) / self.radii) ** 2) - 1)


@dataclasses.dataclass(frozen=True)
class GeodesicDistance:
    length: float
    approximate: bool = False
    "Set when the shooting failed and the mesh approximation was used."
    direction: Optional[float] = None
    "Initial direction ψ at the apex in radians."


def geodesic_from_nipple(surface, target, rel_tol=_config.GEODESIC_REL_TOL):
    """Length of the shortest path on the surface from the nipple to the target.

    Parameters
    ----------
    surface : EllipsoidSurface
        Radii of the breast at SRG.
    target : np.ndarray
        Point on the upper half of the surface.
    rel_tol : float
        Relative accuracy of the returned length.

    Returns
    -------
    float
        The geodesic length in cm. If the shooting does not converge, the length is
        measured on a triangulation of the surface and an ApproximationWarning is
        issued.
    """
    return _geodesic(surface, target, rel_tol).length


def radial_skin_point(surface, nodule_point):
    "Point where the ray from the origin through the nodule leaves the surface."
    point = np.asarray(nodule_point, dtype=float)
    scaled = np.linalg.norm(point / surface.radii)
    if scaled == 0:
        message = "The nodule lies at the origin, the direction of the cut is undefined."
        raise exception.DomainError(message)
    return point / scaled


def surgery_target_numeric(nodule, surface, rel_tol=_config.GEODESIC_REL_TOL):
    """Surgery target with the radius measured along the ellipsoid.

    The skin point is the intersection of the ray through the nodule with the surface,
    r is its geodesic distance from the nipple, d the distance from the skin point to
    the nodule and p the azimuth of the nodule as in the closed form. Off the sphere
    the azimuth of the nodule differs slightly from the direction along the skin."""
    skin = radial_skin_point(surface, nodule.point)
    point = np.asarray(nodule.point, dtype=float)
    if surface.level(point) > _config.SURFACE_TOLERANCE:
        message = f"The nodule at {nodule.point} lies outside of the ellipsoid."
        raise exception.DomainError(message)
    distance = _geodesic(surface, skin, rel_tol)
    x, y, _ = nodule.point
    return SurgeryTarget(
        r=distance.length,
        p=localization.phase_degrees(x, y),
        d=float(np.linalg.norm(skin - point)),
        method=Method.GEODESIC_NUMERIC,
        side=Side.FRONT if nodule.rho < 0.5 else Side.BACK,
        approximate=distance.approximate,
    )


def _geodesic(surface, target, rel_tol):
    target = _validate_target(surface, target)
    scale = float(np.max(surface.radii))
    if math.hypot(target[0], target[1]) <= _config.RADICAND_CLAMP * scale:
        return GeodesicDistance(length=0.0, direction=0.0)
    try:
        return _shoot(surface, target, rel_tol)
    except exception.ConvergenceError as error:
        message = (
            f"The geodesic shooting did not converge ({error}). The distance is "
            "approximated on a triangulation of the surface."
        )
        warnings.warn(message, exception.ApproximationWarning, stacklevel=3)
        length = _mesh_geodesic(surface, target, *_FALLBACK_MESH)
        return GeodesicDistance(length=length, approximate=True)


def _validate_target(surface, target):
    target = np.asarray(target, dtype=float)
    if target.shape != (3,):
        message = f"expected a point with three coordinates, got {target.shape}."
        raise exception.ValidationError("target", message)
    if abs(surface.level(target)) > _config.SURFACE_TOLERANCE:
        message = f"The point {target} does not lie on the surface of the ellipsoid."
        raise exception.DomainError(message)
    if target[2] < -_config.SURFACE_TOLERANCE * surface.z_r:
        message = f"The point {target} lies below the base of the breast."
        raise exception.DomainError(message)
    return target


def _shoot(surface, target, rel_tol):
    scale = float(np.max(surface.radii))
    rtol = min(1e-2 * rel_tol, 1e-10)
    azimuth = math.atan2(target[1], target[0])
    angle_tol = rtol

    def miss(psi):
        return _wrap(_hit(surface, psi, target[2], rtol)[1] - azimuth)

    psi = azimuth
    value = miss(psi)
    if abs(value) > angle_tol:
        psi = _bisect_direction(miss, azimuth, value)
    length, hit_azimuth, hit = _hit(surface, psi, target[2], rtol)
    mismatch = np.linalg.norm(hit - target)
    if mismatch > max(rel_tol * length, rtol * scale) * 1e2:
        raise exception.ConvergenceError(f"the geodesic ends {mismatch:.3g} cm away")
    logger.debug("geodesic: psi = %.8f, length = %.8f", psi, length)
    return GeodesicDistance(length=length, direction=psi)


def _bisect_direction(miss, azimuth, value):
    for width in _BRACKET_WIDTHS:
        lower, upper = azimuth - width, azimuth + width
        miss_lower, miss_upper = miss(lower), miss(upper)
        logger.debug(
            "geodesic bracket [%.4f, %.4f]: miss %.3g, %.3g",
            lower,
            upper,
            miss_lower,
            miss_upper,
        )
        if miss_lower * miss_upper < 0:
            return optimize.bisect(miss, lower, upper, xtol=1e-13, maxiter=200)
    raise exception.ConvergenceError(f"no direction brackets the miss {value:.3g}")


def _hit(surface, psi, height, rtol):
    inverse_square = 1 / surface.radii**2
    scale = float(np.max(surface.radii))

    def rhs(_, state):
        x, v = state[:3], state[3:]
        curvature = np.dot(v**2, inverse_square) / np.dot(x**2, inverse_square**2)
        return np.concatenate((v, -curvature * x * inverse_square))

    def reaches_height(_, state):
        return state[2] - height

    reaches_height.terminal = True
    reaches_height.direction = -1
    start = np.concatenate((surface.apex, (math.cos(psi), math.sin(psi), 0.0)))
    solution = integrate.solve_ivp(
        rhs,
        (0.0, 2 * math.pi * scale),
        start,
        method="DOP853",
        rtol=rtol,
        atol=rtol * scale,
        events=reaches_height,
    )
    if not solution.success or len(solution.t_events[0]) == 0:
        raise exception.ConvergenceError(f"the geodesic for psi={psi} does not descend")
    hit = solution.y_events[0][0][:3]
    return float(solution.t_events[0][0]), math.atan2(hit[1], hit[0]), hit


def _mesh_geodesic(surface, target, n_lat, n_lon):
    """Shortest path along the edges of a latitude/longitude triangulation.

    Every quadrilateral of the grid contributes both diagonals. The target is connected
    to its nearest vertices by straight segments."""
    vertices = _mesh_vertices(surface, n_lat, n_lon)
    edges = _mesh_edges(n_lat, n_lon)
    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    n = len(vertices)
    graph = sparse.csr_matrix((lengths, (edges[:, 0], edges[:, 1])), shape=(n, n))
    distances = csgraph.dijkstra(graph, directed=False, indices=0)
    separation, nearest = cKDTree(vertices).query(target, k=_NEIGHBORS)
    length = float(np.min(distances[nearest] + separation))
    logger.debug("mesh geodesic on %d vertices: %.6f", n, length)
    return length


def _mesh_vertices(surface, n_lat, n_lon):
    polar = np.linspace(0, math.pi / 2, n_lat + 1)[1:]
    azimuth = np.linspace(0, 2 * math.pi, n_lon, endpoint=False)
    polar, azimuth = np.meshgrid(polar, azimuth, indexing="ij")
    rings = np.stack(
        (
            surface.x_r * np.sin(polar) * np.cos(azimuth),
            surface.y_r * np.sin(polar) * np.sin(azimuth),
            surface.z_r * np.cos(polar),
        ),
        axis=-1,
    ).reshape(-1, 3)
    return np.vstack((surface.apex, rings))


def _mesh_edges(n_lat, n_lon):
    ring = np.arange(n_lat)[:, None]
    column = np.arange(n_lon)[None, :]
    index = 1 + ring * n_lon + column
    right = 1 + ring * n_lon + (column + 1) % n_lon
    apex = np.stack((np.zeros(n_lon, dtype=int), index[0]), axis=1)
    along = np.stack((index.ravel(), right.ravel()), axis=1)
    down = np.stack((index[:-1].ravel(), index[1:].ravel()), axis=1)
    diagonal = np.stack((index[:-1].ravel(), right[1:].ravel()), axis=1)
    anti_diagonal = np.stack((right[:-1].ravel(), index[1:].ravel()), axis=1)
    return np.vstack((apex, along, down, diagonal, anti_diagonal))


def _wrap(angle):
    return (angle + math.pi) % (2 * math.pi) - math.pi
