# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Closed-form localization of the nodule in the symmetrized breast.

The CC view fixes the nodule coordinates x_n and z_n. What it cannot show is the depth
along Oy. In the MLO view the nodule appears on the image of the chord that crosses the
breast at height z_n and lateral position x_n. Its relative position ρ along this chord
determines the missing coordinate

.. math::

    y_n = (1 - 2\\rho) \\sqrt{a^2 - x_n^2 - z_n^2}

and the layer factor lf = |OP| / a follows from

.. math::

    lf^2 = 1 - 4\\rho(1 - \\rho)\\left[1 - \\left(\\frac{h}{a}\\right)^2\\right]
    \\cos^2\\theta, \\qquad \\cos^2\\theta = 1 - \\frac{x_n^2}{a^2 - z_n^2}.

The nodule in front of the breast base (y_n > 0) corresponds to ρ < 0.5.
"""
import dataclasses
import math
from typing import Tuple

from py4mammo import _config, exception
from py4mammo._util import check
from py4mammo.model import Method, NodulePosition, Side, SurgeryTarget


@dataclasses.dataclass(frozen=True)
class ChordExtremes:
    """Ends of the skin-to-skin chord through the nodule parallel to Oy.

    L is in front of the breast and R in the back, both on the symmetrized skin. The MLO
    images of the two points are used to read off ρ."""

    L: Tuple[float, float, float]
    "Front end of the chord in the SRG frame."
    R: Tuple[float, float, float]
    "Back end of the chord in the SRG frame."
    mlo_L: complex
    "Image of L in the virtual MLO view."
    mlo_R: complex
    "Image of R in the virtual MLO view."

    @property
    def mlo_length(self):
        return abs(self.mlo_R - self.mlo_L)


@dataclasses.dataclass(frozen=True)
class RhoResult:
    "Relative position of the nodule along the chord and the resulting branch."

    rho: float
    side: Side


def mk_nodule_cc(cc, measurements):
    """Deduce the SRG coordinates (x_n, z_n) of the nodule from the CC view.

    The CC image is scaled back from the compressed radius H_c to the radii of the
    breast at SRG, (x_n, z_n) = (x_r x_c, z_r z_c) / H_c.
    """
    x_c, z_c = cc
    H_c = measurements.H_c
    if x_c**2 + z_c**2 > H_c**2 * (1 + _config.RADICAND_CLAMP):
        message = (
            f"The nodule ({x_c}, {z_c}) lies outside of the CC contour of radius {H_c}."
        )
        raise exception.DomainError(message)
    return measurements.x_r * x_c / H_c, measurements.z_r * z_c / H_c


def cos2_theta(x_n, z_n, a):
    "Squared cosine of the angle between Oy and the chord end at the nodule's height."
    if z_n >= a:
        raise exception.DomainError(f"The height z_n={z_n} reaches the radius a={a}.")
    section = a**2 - z_n**2
    excess = x_n**2 - section
    if excess > _config.RADICAND_CLAMP * a**2:
        message = (
            f"The nodule at x_n={x_n}, z_n={z_n} lies outside of the symmetrized "
            f"breast of radius {a}, there is no chord through it."
        )
        raise exception.DegenerateChord(message)
    return min(max(1 - x_n**2 / section, 0.0), 1.0)


def theta_from_cos2(cos2theta, side=Side.FRONT, x_sign=1):
    """Angle θ in degrees from Oy to the end of the chord on the requested side.

    On the skin the phase of the surgery target is p = 90° - θ."""
    cos_theta = math.sqrt(cos2theta)
    if side is Side.BACK:
        cos_theta = -cos_theta
    sin_theta = math.copysign(math.sqrt(max(1 - cos2theta, 0.0)), x_sign)
    return math.degrees(math.atan2(sin_theta, cos_theta))


def layer_factor(rho, h, a, cos2theta):
    """Relative distance lf = |OP| / a of the nodule from the origin.

    Parameters
    ----------
    rho : float
        Relative position along the chord, 0 ≤ ρ ≤ 1.
    h : float
        Height of the chord, 0 ≤ h < a.
    a : float
        Radius of the symmetrized breast.
    cos2theta : float
        Squared cosine of the chord angle, see :func:`cos2_theta`.
    """
    check.raise_error_if_outside(rho, "rho", 0, 1)
    check.raise_error_if_not_positive(a, "a")
    check.raise_error_if_outside(h, "h", 0, a, closed_upper=False)
    check.raise_error_if_outside(cos2theta, "cos2theta", 0, 1)
    radicand = 1 - 4 * rho * (1 - rho) * _chord_factor(h, a, cos2theta)
    return min(math.sqrt(_clamp(radicand, "layer_factor")), 1.0)


def layer_factor_minimum(h, a, cos2theta):
    "Smallest attainable layer factor, reached in the middle of the chord."
    return layer_factor(0.5, h, a, cos2theta)


def rho_from_layer_factor(lf, h, a, cos2theta, side=Side.FRONT):
    """Invert the layer factor for the position along the chord.

    Both ρ and 1 - ρ yield the same layer factor; the side selects the root, ρ < 0.5 in
    front and ρ > 0.5 in the back.

    Raises
    ------
    NoSolution
        If lf is smaller than the minimum attained in the middle of the chord.
    """
    check.raise_error_if_outside(lf, "lf", 0, 1)
    factor = _chord_factor(h, a, cos2theta)
    deficit = 1 - lf**2
    minimum = math.sqrt(max(1 - factor, 0.0))
    if deficit == 0:
        front = 0.0
    elif factor <= 0 or deficit > factor * (1 + _config.RADICAND_CLAMP):
        message = (
            f"The layer factor {lf} is not attainable at this height, the smallest "
            f"possible value is {minimum}."
        )
        raise exception.NoSolution(message, minimum)
    else:
        ratio = min(deficit / factor, 1.0)
        # stable form of (1 - sqrt(1 - ratio)) / 2
        front = ratio / (2 * (1 + math.sqrt(1 - ratio)))
    rho = front if side is Side.FRONT else 1 - front
    return RhoResult(rho=rho, side=side)


def rho_from_views(P_virtual, mlo_L, mlo_R):
    """Read off ρ as the ratio of chord lengths in the virtual MLO view.

    The arc through the images of L and R is replaced by the straight segment, so
    ρ = |P - L| / |R - L| clamped to [0, 1]. The side is front for ρ < 0.5.

    Raises
    ------
    DegenerateChord
        If the images of L and R coincide, then the nodule lies on the skin.
    """
    length = abs(complex(mlo_R) - complex(mlo_L))
    if length <= _config.RADICAND_CLAMP:
        message = "The MLO images of the chord ends coincide, the nodule is on the skin."
        raise exception.DegenerateChord(message)
    rho = abs(complex(P_virtual) - complex(mlo_L)) / length
    rho = min(max(rho, 0.0), 1.0)
    return RhoResult(rho=rho, side=Side.FRONT if rho < 0.5 else Side.BACK)


def reconstruct_y(rho, x_n, z_n, a):
    "Signed depth y_n of the nodule, positive in front of the breast."
    radicand = _clamp(a**2 - x_n**2 - z_n**2, "reconstruct_y", scale=a**2)
    return (1 - 2 * rho) * math.sqrt(radicand)


def build_nodule(x_n, z_n, rho, a):
    "Combine the CC coordinates and ρ into the nodule position in the SRG frame."
    cos2 = cos2_theta(x_n, z_n, a)
    lf = layer_factor(rho, z_n, a, cos2)
    return NodulePosition(
        x_n=x_n, y_n=reconstruct_y(rho, x_n, z_n, a), z_n=z_n, lf=lf, rho=rho
    )


def surgery_target(nodule, a):
    """Polar coordinates (r, p, d) of the nodule centred at the nipple.

    r is the arc on the sphere of radius a from the nipple to the skin point above the
    nodule, p the phase in degrees and d the distance from that skin point to the
    nodule. A nodule right below the nipple has r = 0 and reports p = 0.
    """
    x, y, z = nodule.point
    norm = math.sqrt(x**2 + y**2 + z**2)
    if norm == 0:
        message = "The nodule lies at the origin, the direction of the cut is undefined."
        raise exception.DomainError(message)
    if norm > a * (1 + _config.DISK_SLACK):
        message = f"The nodule at distance {norm} lies outside of the breast of radius {a}."
        raise exception.DomainError(message)
    r = a * math.acos(min(max(z / norm, -1.0), 1.0))
    return SurgeryTarget(
        r=r,
        p=phase_degrees(x, y),
        d=max(a - norm, 0.0),
        method=Method.CLOSED_FORM,
        side=Side.FRONT if nodule.rho < 0.5 else Side.BACK,
    )


def skin_shortcut(x_n, z_n, a, side=Side.FRONT):
    """Target for a nodule practically on the skin, i.e., lf ≈ 1.

    The depth vanishes, r = a arccos(z_n / a) and p = 90° - θ with θ from the chord
    angle on the given side. A nodule beyond the skin at its height gets θ = 90°.
    """
    check.raise_error_if_not_positive(a, "a")
    try:
        cos2 = cos2_theta(x_n, z_n, a) if z_n < a else 1.0
    except exception.DegenerateChord:
        cos2 = 0.0
    theta = theta_from_cos2(cos2, side, x_sign=1 if x_n >= 0 else -1)
    r = a * math.acos(min(max(z_n / a, -1.0), 1.0))
    return SurgeryTarget(
        r=r, p=_wrap_degrees(90 - theta), d=0.0, method=Method.CLOSED_FORM, side=side
    )


def candidate_targets(x_n, z_n, rho, a):
    "Targets for ρ and for the mirrored root 1 - ρ on the other side of the chord."
    return tuple(
        surgery_target(build_nodule(x_n, z_n, value, a), a) for value in (rho, 1 - rho)
    )


def _chord_factor(h, a, cos2theta):
    return (1 - (h / a) ** 2) * cos2theta


def _clamp(radicand, operation, scale=1.0):
    if radicand >= 0:
        return radicand
    if radicand >= -_config.RADICAND_CLAMP * scale:
        return 0.0
    message = f"{operation}: negative radicand {radicand}, the nodule lies outside of the breast."
    raise exception.DomainError(message)


def phase_degrees(x, y):
    "Azimuth of (x, y) in degrees within [-180, 180), 0 for the origin."
    if x == 0 and y == 0:
        return 0.0
    return _wrap_degrees(math.degrees(math.atan2(y, x)))


def _wrap_degrees(angle):
    return (angle + 180.0) % 360.0 - 180.0
