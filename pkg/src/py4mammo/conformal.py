# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Conformal correction between the virtual and the real MLO view.

In the MLO view the patient lifts her elbow, which projects part of the breast forward.
Instead of simulating this posture, the virtual MLO image (upper half of the disk of
radius H) is carried into the real image by the disk automorphism

.. math::

    f(\\zeta) = \\frac{\\zeta - bH\\frac{b - i}{1 - ib}}
                     {\\frac{1 + ib}{1 - ib} - \\frac{ib\\zeta}{H}}

which fixes f(H) = H and moves the origin to f(0) = ibH. The parameter b is the
height b_c at which Oz crosses the pectoralis muscle relative to H. Complex numbers
stand for points (w, z) of the view; the functions accept scalars and numpy arrays.
"""
import dataclasses

import numpy as np

from py4mammo import _config, exception
from py4mammo._util import check


@dataclasses.dataclass(frozen=True)
class MobiusParams:
    "Parameters of the disk automorphism."

    b: float
    "Relative height of the muscle crossing, 0 ≤ b < 1. b = 0 yields the identity."
    H: float
    "Radius of the disk in cm."

    def __post_init__(self):
        check.raise_error_if_outside(self.b, "b", 0, 1, closed_upper=False)
        check.raise_error_if_not_positive(self.H, "H")

    def matrix(self):
        """Coefficients [[α, β], [γ, δ]] with f(ζ) = (αζ + β) / (γζ + δ).

        Multiplying numerator and denominator of the defining fraction with (1 - ib)
        removes the nested fractions."""
        b, H = self.b, self.H
        return np.array(
            [
                [1 - 1j * b, -b * H * (b - 1j)],
                [-1j * b * (1 - 1j * b) / H, 1 + 1j * b],
            ]
        )


def mobius_param_from_case(b_c, H):
    "Deduce the parameters of the map from the muscle height b_c in the image of radius H."
    check.raise_error_if_not_positive(H, "H")
    check.raise_error_if_outside(b_c, "bc", 0, H, closed_upper=False)
    return MobiusParams(b=b_c / H, H=H)


def mobius_forward(zeta, params):
    """Map a point of the virtual MLO view into the real MLO view.

    Parameters
    ----------
    zeta : complex or np.ndarray
        Points w + iz within the closed disk of radius H.
    params : MobiusParams
        Parameters b and H of the map.

    Returns
    -------
    complex or np.ndarray
        The image f(ζ), again inside the closed disk.
    """
    zeta = _inside_disk(zeta, params.H, "mobius_forward")
    return _transform(params.matrix(), zeta)


def mobius_inverse(w, params):
    """Map a point of the real MLO view back to the virtual MLO view.

    The inverse is evaluated in closed form with the adjugate of the coefficient matrix,
    so that mobius_inverse(mobius_forward(ζ)) = ζ up to rounding.
    """
    w = _inside_disk(w, params.H, "mobius_inverse")
    return _transform(_adjugate(params.matrix()), w)


def cross_ratio(z1, z2, z3, z4):
    "Cross ratio of four distinct points, invariant under every Möbius map."
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


def _adjugate(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _transform(m, zeta):
    result = (m[0, 0] * zeta + m[0, 1]) / (m[1, 0] * zeta + m[1, 1])
    return complex(result) if np.ndim(result) == 0 else result


def _inside_disk(zeta, H, operation):
    zeta = np.asarray(zeta, dtype=np.complex128)
    radius = np.max(np.abs(zeta), initial=0.0)
    if radius > H * (1 + _config.DISK_SLACK):
        message = (
            f"{operation}: the point lies at distance {radius:.6g} from the centre, "
            f"outside of the disk of radius H={H}."
        )
        raise exception.DomainError(message)
    return zeta
