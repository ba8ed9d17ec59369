# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Measurements of the patient and the coordinate frames used by the localization.

All lengths are in centimetres. The SRG (surgery) frame has its origin at the centre of
the breast base, *Oz* points vertically up to the nipple at (0, 0, z_r), *Oy* is the
sagittal direction and *Ox* the lateral one. Everything is formulated for the left
breast; for the right breast mirror the x coordinate with :func:`mirror_x` before
passing points in and after reading them out.
"""
from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from typing import Optional, Tuple

from py4mammo import _config, exception
from py4mammo._util import check


class Side(enum.Enum):
    "Branch of the chord on which the nodule lies."
    FRONT = "front"
    "The nodule lies in front (y_n > 0), which corresponds to ρ < 0.5."
    BACK = "back"
    "The nodule lies in the back (y_n < 0), which corresponds to ρ > 0.5."

    def flipped(self):
        return Side.BACK if self is Side.FRONT else Side.FRONT


class Method(enum.Enum):
    "How the radius r of the surgery target was obtained."
    CLOSED_FORM = "closed_form"
    GEODESIC_NUMERIC = "geodesic_numeric"


@dataclasses.dataclass(frozen=True)
class BreastMeasurements:
    """Radii of the breast at SRG and the extents in the later states.

    The radii describe the upper half-ellipsoid the breast approximately forms when the
    patient lies on the operating table. H_c is the characteristic radius of the breast
    compressed for the CC view and lat_x, lat_z are the extents when lying on the table
    before the compression. Construction warns with a :class:`ModelWarning` when the
    radii differ by more than 11% or when the compressed radius is smaller than the
    radii at SRG."""

    x_r: float
    "Half width of the breast at SRG along Ox."
    y_r: float
    "Sagittal radius at SRG along Oy."
    z_r: float
    "Vertical radius at SRG; the nipple lies at (0, 0, z_r)."
    H_c: float
    "Characteristic radius at CRC, the horizontal arc divided by π."
    lat_x: float
    "Extent along x when the patient lies on the table (LAT)."
    lat_z: float
    "Extent along z at LAT."

    def __post_init__(self):
        for field in dataclasses.fields(self):
            check.raise_error_if_not_positive(getattr(self, field.name), field.name)
        disparity = radii_disparity(self)
        if disparity > _config.RADII_DISPARITY:
            message = (
                f"The radii ({self.x_r}, {self.y_r}, {self.z_r}) differ by "
                f"{100 * disparity:.1f}%. The symmetrized breast is a poor "
                "approximation if the radii differ by more than 11%."
            )
            warnings.warn(message, exception.ModelWarning, stacklevel=3)
        if self.H_c < max(self.x_r, self.z_r):
            message = (
                f"The radius at CRC H_c={self.H_c} is smaller than the radii at SRG. "
                "The compression should spread the breast, please check the arcs."
            )
            warnings.warn(message, exception.ModelWarning, stacklevel=3)

    @property
    def radii(self):
        return self.x_r, self.y_r, self.z_r


@dataclasses.dataclass(frozen=True)
class SymmetrizedBreast:
    "The sphere replacing the half-ellipsoid in the closed-form formulas."

    a: float
    "Mean radius of the three radii at SRG."
    nipple: Tuple[float, float, float]
    "Position of the nipple in the SRG frame."


@dataclasses.dataclass(frozen=True)
class CaseInputs:
    """Observed position of the nodule in the two mammograms.

    The CC coordinates are read off in the CRC frame where the breast contour crosses the
    axes at H_c. The MLO coordinates are taken in the real image with Oz through the
    highest point of the breast, b_c is the height at which Oz crosses the pectoralis
    major muscle."""

    cc_coords: Tuple[float, float]
    "Nodule position (x_c, z_c) in the CC view."
    mlo_coords: Tuple[float, float]
    "Nodule position (p_w, p_z) in the real MLO view."
    b_c: float
    "Height at which Oz crosses the pectoralis muscle in the MLO view."
    H: Optional[float] = None
    "Characteristic radius of the MLO image, defaults to H_c."

    def __post_init__(self):
        for name, value in zip(("xc", "zc"), self.cc_coords):
            check.raise_error_if_not_number(value, name)
        for name, value in zip(("pw", "pz"), self.mlo_coords):
            check.raise_error_if_not_number(value, name)
        if self.H is not None:
            check.raise_error_if_not_positive(self.H, "H")
            check.raise_error_if_outside(self.b_c, "bc", 0, self.H, closed_upper=False)
        else:
            check.raise_error_if_outside(self.b_c, "bc", 0, math.inf)

    def disk_radius(self, measurements):
        "Radius of the MLO disk, H if given otherwise H_c of the measurements."
        return measurements.H_c if self.H is None else self.H

    @property
    def mlo_point(self):
        return complex(*self.mlo_coords)


@dataclasses.dataclass(frozen=True)
class NodulePosition:
    """Nodule in the SRG frame together with the parameters it was deduced from.

    In the symmetrized breast the distance of the nodule from the origin equals lf·a."""

    x_n: float
    y_n: float
    z_n: float
    lf: float
    "Layer factor, distance from the origin relative to the mean radius."
    rho: float
    "Relative position along the chord from L to R."

    def __post_init__(self):
        if self.z_n < 0:
            raise exception.DomainError(
                f"The nodule must lie in the upper half of the breast, z_n={self.z_n}."
            )
        check.raise_error_if_outside(self.lf, "lf", 0, 1)
        check.raise_error_if_outside(self.rho, "rho", 0, 1)

    @property
    def point(self):
        return self.x_n, self.y_n, self.z_n

    @property
    def norm(self):
        return math.sqrt(self.x_n**2 + self.y_n**2 + self.z_n**2)


@dataclasses.dataclass(frozen=True)
class SurgeryTarget:
    """Polar coordinates centred at the nipple that guide the scalpel.

    The surgeon marks the point at geodesic distance r from the nipple in direction p
    and cuts until depth d."""

    r: float
    "Geodesic radius from the nipple in cm."
    p: float
    "Phase angle in degrees within [-180, 180)."
    d: float
    "Depth of the cut in cm."
    method: Method = Method.CLOSED_FORM
    "Whether r follows the spherical formula or the numeric geodesic."
    side: Optional[Side] = None
    "Branch of the chord the target belongs to."
    approximate: bool = False
    "Set when the geodesic had to fall back to the mesh approximation."

    def __post_init__(self):
        if self.r < 0 or self.d < 0:
            raise exception.DomainError(
                f"Radius and depth of the target must not be negative, r={self.r}, d={self.d}."
            )


def build_measurements(fthrx, brsep, vertical_arc, crc_arc, lat_x, lat_z):
    """Deduce the radii of the breast from the tape measurements.

    Parameters
    ----------
    fthrx : float
        Front thorax arc measured at the base of the breasts.
    brsep : float
        Separation between the two breasts along the same arc.
    vertical_arc : float
        Vertical arc over the nipple at SRG.
    crc_arc : float
        Horizontal arc of the breast compressed for the CC view.
    lat_x, lat_z : float
        Extents of the breast lying on the table.

    Returns
    -------
    BreastMeasurements
        x_r = (fthrx - brsep)/4, y_r = z_r = vertical_arc/π and H_c = crc_arc/π.
    """
    inputs = {
        "fthrx": fthrx,
        "brsep": brsep,
        "vertical_arc": vertical_arc,
        "crc_arc": crc_arc,
        "lat_x": lat_x,
        "lat_z": lat_z,
    }
    for name, value in inputs.items():
        check.raise_error_if_not_positive(value, name)
    if fthrx <= brsep:
        message = f"must be smaller than fthrx={fthrx} but is {brsep}."
        raise exception.ValidationError("brsep", message)
    vertical_radius = vertical_arc / math.pi
    return BreastMeasurements(
        x_r=(fthrx - brsep) / 4,
        y_r=vertical_radius,
        z_r=vertical_radius,
        H_c=crc_arc / math.pi,
        lat_x=lat_x,
        lat_z=lat_z,
    )


def mean_radius(measurements):
    "Radius a of the symmetrized breast, the arithmetic mean of the three radii."
    return (measurements.x_r + measurements.y_r + measurements.z_r) / 3


def symmetrize(measurements):
    "Replace the half-ellipsoid by the sphere of the mean radius."
    return SymmetrizedBreast(
        a=mean_radius(measurements), nipple=(0.0, 0.0, measurements.z_r)
    )


def radii_disparity(measurements):
    "Largest relative difference between the radii at SRG."
    radii = measurements.radii
    return (max(radii) - min(radii)) / max(radii)


def lat_dilation(measurements):
    "Growth factors of x and z from SRG to LAT."
    return measurements.lat_x / measurements.x_r, measurements.lat_z / measurements.z_r


def crc_compression(measurements):
    "Growth factors of x and z from LAT to CRC."
    return measurements.H_c / measurements.lat_x, measurements.H_c / measurements.lat_z


def net_view_scaling(measurements):
    """Linear factors (s_x, s_z) mapping the SRG coordinates to the CC view.

    They are the product of :func:`lat_dilation` and :func:`crc_compression`, e.g.,
    (1.68, 1.5) for x_r = 6.25, z_r = 7 and H_c = 10.5."""
    return measurements.H_c / measurements.x_r, measurements.H_c / measurements.z_r


def mirror_x(point):
    "Mirror a point of the right breast into the frame of the left one or vice versa."
    x, *rest = point
    return (-x, *rest)
