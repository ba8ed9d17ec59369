# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Forward projection of a nodule into the two mammograms and the refinement loop.

A projector predicts where a nodule at SRG appears in the CC view and in the virtual
MLO view. The closed-form localization gives a first guess of the layer factor; the
refinement then adjusts lf until the predicted CC position matches the observed one.
"""
import abc
import dataclasses
import logging
import math
import warnings
from typing import Tuple

import numpy as np

from py4mammo import _config, conformal, exception, localization
from py4mammo._util import check, convert
from py4mammo.model import BreastMeasurements, NodulePosition, Side, mean_radius

logger = logging.getLogger(__name__)

_PROJECTORS = {}
_ORIGIN = (0.0, 0.0, 0.0)


class ForwardProjector(abc.ABC):
    """Defines the methods a projector needs to implement to be used in the
    localization. Projectors must be deterministic and map the origin onto the origin of
    the CC view."""

    @abc.abstractmethod
    def predict_cc(self, point):
        "Position (x_c, z_c) of the point of the SRG frame in the CC view."

    @abc.abstractmethod
    def predict_mlo(self, point):
        "Position w + iz of the point of the SRG frame in the virtual MLO view."


class AffineProjector(ForwardProjector):
    """Scale the SRG coordinates linearly into the views.

    In the CC view x and z are multiplied by s_x = H_c/x_r and s_z = H_c/z_r, the net
    effect of lying on the table and compressing. Optionally a cross-coupling matrix,
    e.g., the phantom fit normalized by k, mixes the coordinates before scaling. The MLO
    view projects onto the bisectrix Ow of the negative x and y axes, which is a crude
    surrogate for the oblique compression.

    Parameters
    ----------
    measurements : BreastMeasurements
        Radii of the breast used to set the scales.
    coupling : np.ndarray
        3 x 3 matrix multiplied from the right onto the point (row vector).
    mlo_scale : float
        Scale s_w along Ow, defaults to H_c over the mean of x_r and y_r.
    """

    def __init__(self, measurements, coupling=None, mlo_scale=None):
        self.scales = (
            measurements.H_c / measurements.x_r,
            measurements.H_c / measurements.z_r,
        )
        self.coupling = None if coupling is None else np.asarray(coupling, dtype=float)
        if self.coupling is not None and self.coupling.shape != (3, 3):
            message = f"must be a 3 x 3 matrix, got the shape {self.coupling.shape}."
            raise exception.ValidationError("coupling", message)
        if mlo_scale is None:
            mlo_scale = 2 * measurements.H_c / (measurements.x_r + measurements.y_r)
        check.raise_error_if_not_positive(mlo_scale, "mlo_scale")
        self.mlo_scale = mlo_scale
        self._mlo_z_scale = self.scales[1]

    def predict_cc(self, point):
        x, _, z = self._couple(point)
        s_x, s_z = self.scales
        return s_x * x, s_z * z

    def predict_mlo(self, point):
        x, y, z = point
        w = -(x + y) / math.sqrt(2) * self.mlo_scale
        return complex(w, self._mlo_z_scale * z)

    def _couple(self, point):
        if self.coupling is None:
            return point
        return tuple(np.asarray(point, dtype=float) @ self.coupling)


class CalibratedProjector(ForwardProjector):
    """CC response with gains linear in the depth y_n of the nodule.

    The model x_c = x_n (g_x + h_x y_n), z_c = z_n (g_z + h_z y_n) is fitted from two
    predictions of a full simulation taken at the same (x_ref, z_ref). It reproduces
    both calibration pairs and keeps the origin fixed. The default pairs are the
    simulated views at lf = 73% and lf = 81% of case 0023-1. The MLO view is delegated
    to an :class:`AffineProjector`.
    """

    def __init__(
        self,
        measurements,
        reference=(4.07, 2.13),
        calibration=((1.810, (4.94, 2.82)), (2.967, (5.95, 3.26))),
        mlo=None,
    ):
        x_ref, z_ref = reference
        check.raise_error_if_not_positive(x_ref, "cal_x")
        check.raise_error_if_not_positive(z_ref, "cal_z")
        (y1, (x1, z1)), (y2, (x2, z2)) = calibration
        if y1 == y2:
            message = "the two calibration pairs must be taken at different depths."
            raise exception.ValidationError("cal_y2", message)
        self.reference = (x_ref, z_ref)
        self.calibration = ((y1, (x1, z1)), (y2, (x2, z2)))
        self.gain_x = _linear_gain(y1, x1 / x_ref, y2, x2 / x_ref)
        self.gain_z = _linear_gain(y1, z1 / z_ref, y2, z2 / z_ref)
        self._mlo = mlo or AffineProjector(measurements)

    def predict_cc(self, point):
        x, y, z = point
        g_x, h_x = self.gain_x
        g_z, h_z = self.gain_z
        return x * (g_x + h_x * y), z * (g_z + h_z * y)

    def predict_mlo(self, point):
        return self._mlo.predict_mlo(point)


@dataclasses.dataclass(frozen=True)
class AnalyticPass:
    "Intermediate results of the closed-form localization of a case."

    x_n: float
    z_n: float
    a: float
    "Radius of the symmetrized breast."
    cos2theta: float
    extremes: localization.ChordExtremes
    P_virtual: complex
    "Observed MLO position carried back into the virtual MLO view."
    rho: localization.RhoResult
    nodule: NodulePosition


@dataclasses.dataclass(frozen=True)
class RefinementStep:
    "One evaluation of the refinement loop."

    lf: float
    rho: float
    residual: float
    "Predicted minus observed x_c."
    bracket: Tuple[float, float]


@dataclasses.dataclass(frozen=True)
class _Iterate:
    rho: float
    residual: float
    iterations: int
    converged: bool
    history: Tuple[RefinementStep, ...]
    message: str


@dataclasses.dataclass(frozen=True)
class RefinementResult:
    "Best iterate of the refinement of the layer factor."

    lf_final: float
    rho_final: float
    nodule: NodulePosition
    target: object
    "SurgeryTarget of the best iterate."
    iterations: int
    "Number of bisection steps, 0 if the analytic guess is already accurate."
    cc_residual: float
    "Predicted minus observed x_c of the best iterate."
    mlo_residual: float
    "Distance of predicted and observed position in the virtual MLO view."
    predicted_cc: Tuple[float, float]
    converged: bool
    history: Tuple[RefinementStep, ...] = ()
    message: str = ""
    "Diagnostic explaining why the refinement did not converge."


def register_projector(name, factory):
    """Make a projector available by name, e.g., for the case files.

    The factory is called as ``factory(measurements, **options)``. Registration rejects
    factories whose projectors do not map the origin onto the origin."""
    probe_measurements = _probe_measurements()
    check.raise_error_if_not_callable(factory, probe_measurements)
    probe = factory(probe_measurements)
    if not isinstance(probe, ForwardProjector):
        message = f"The factory for '{name}' does not produce a ForwardProjector."
        raise exception.IncorrectUsage(message)
    if not np.allclose(probe.predict_cc(_ORIGIN), 0.0, atol=1e-12):
        message = f"The projector '{name}' does not map the origin onto the origin."
        raise exception.IncorrectUsage(message)
    _PROJECTORS[name] = factory


def projector_from_name(name, measurements, **options):
    "Construct a registered projector for the given measurements."
    try:
        factory = _PROJECTORS[name]
    except KeyError as error:
        known = ", ".join(sorted(_PROJECTORS))
        message = f"The projector '{name}' is unknown, please use one of {known}."
        raise exception.IncorrectUsage(message) from error
    return factory(measurements, **options)


def chord_extremes(x_n, z_n, measurements, projector):
    """Ends L and R of the chord parallel to Oy through (x_n, z_n) and their MLO images.

    Raises
    ------
    DegenerateChord
        If the chord collapses, i.e., the nodule lies on the skin.
    """
    a = mean_radius(measurements)
    radicand = a**2 - x_n**2 - z_n**2
    if radicand <= _config.RADICAND_CLAMP * a**2:
        message = (
            f"The chord through x_n={x_n}, z_n={z_n} vanishes in the breast of "
            f"radius {a}, the nodule lies on the skin."
        )
        raise exception.DegenerateChord(message)
    half = math.sqrt(radicand)
    L = (x_n, half, z_n)
    R = (x_n, -half, z_n)
    return localization.ChordExtremes(
        L=L, R=R, mlo_L=projector.predict_mlo(L), mlo_R=projector.predict_mlo(R)
    )


def predict_views(point, measurements, projector):
    "Both views ((x_c, z_c), (w, z)) of a point inside the breast."
    norm = math.sqrt(sum(x**2 for x in point))
    a = mean_radius(measurements)
    if norm > a * (1 + _config.DISK_SLACK):
        message = f"The point at distance {norm} lies outside of the breast of radius {a}."
        raise exception.DomainError(message)
    cc = tuple(float(x) for x in projector.predict_cc(point))
    return cc, convert.to_pair(projector.predict_mlo(point))


def virtual_mlo_point(case, measurements):
    "The observed MLO position mapped into the virtual MLO view."
    H = case.disk_radius(measurements)
    params = conformal.mobius_param_from_case(case.b_c, H)
    return conformal.mobius_inverse(case.mlo_point, params)


def analytic_nodule(case, measurements, projector, extremes=None, flip_side=False):
    """Locate the nodule with the closed-form formulas.

    Parameters
    ----------
    case : CaseInputs
        Observed positions in the CC and MLO view.
    measurements : BreastMeasurements
        Radii of the breast.
    projector : ForwardProjector
        Provides the MLO images of the chord ends unless they are given.
    extremes : tuple of complex
        MLO images (mlo_L, mlo_R) of the chord ends, e.g., from a full simulation.
    flip_side : bool
        Use the root 1 - ρ on the other side of the chord.
    """
    x_n, z_n = localization.mk_nodule_cc(case.cc_coords, measurements)
    a = mean_radius(measurements)
    cos2 = localization.cos2_theta(x_n, z_n, a)
    chord = chord_extremes(x_n, z_n, measurements, projector)
    if extremes is not None:
        mlo_L, mlo_R = extremes
        chord = dataclasses.replace(chord, mlo_L=complex(mlo_L), mlo_R=complex(mlo_R))
    P_virtual = virtual_mlo_point(case, measurements)
    rho = localization.rho_from_views(P_virtual, chord.mlo_L, chord.mlo_R)
    if flip_side:
        rho = localization.RhoResult(rho=1 - rho.rho, side=rho.side.flipped())
    nodule = localization.build_nodule(x_n, z_n, rho.rho, a)
    logger.debug("analytic pass: rho = %.4f, lf = %.4f", rho.rho, nodule.lf)
    return AnalyticPass(
        x_n=x_n,
        z_n=z_n,
        a=a,
        cos2theta=cos2,
        extremes=chord,
        P_virtual=P_virtual,
        rho=rho,
        nodule=nodule,
    )


def refine_layer_factor(
    case,
    measurements,
    projector,
    tol_cm=_config.REFINE_TOLERANCE,
    max_iter=_config.REFINE_MAX_ITER,
    *,
    initial=None,
    lf_tol=_config.REFINE_LF_TOLERANCE,
):
    """Adjust the layer factor until the predicted CC position matches the observation.

    The map lf -> ρ -> y_n -> x_c is evaluated on the side of the initial guess. The
    loop brackets lf in [lf_min, 1], where lf_min is attained in the middle of the
    chord, and bisects the residual of x_c. Only the CC residual steers the loop; the
    MLO residual is reported and warns if it exceeds 1.5 cm.

    Parameters
    ----------
    case : CaseInputs
        Observed positions of the nodule.
    measurements : BreastMeasurements
        Radii of the breast.
    projector : ForwardProjector
        Predicts the views for a trial position.
    tol_cm : float
        Accepted residual of x_c in cm.
    max_iter : int
        Largest number of bisection steps.
    initial : NodulePosition
        First guess, by default the result of :func:`analytic_nodule`.
    lf_tol : float
        The loop stops once the bracket is narrower than this.

    Returns
    -------
    RefinementResult
        The best iterate, also when the loop did not converge.
    """
    check.raise_error_if_not_positive(tol_cm, "tol")
    check.raise_error_if_not_positive(lf_tol, "lf_tol")
    if max_iter < 0:
        message = f"must not be negative, got {max_iter}."
        raise exception.ValidationError("max_iter", message)
    if initial is None:
        initial = analytic_nodule(case, measurements, projector).nodule
    x_n, z_n = initial.x_n, initial.z_n
    a = mean_radius(measurements)
    cos2 = localization.cos2_theta(x_n, z_n, a)
    side = Side.FRONT if initial.rho < 0.5 else Side.BACK
    observed_x = case.cc_coords[0]

    def residual(lf):
        rho = localization.rho_from_layer_factor(lf, z_n, a, cos2, side).rho
        y_n = localization.reconstruct_y(rho, x_n, z_n, a)
        x_c, _ = projector.predict_cc((x_n, y_n, z_n))
        return rho, x_c - observed_x

    lower = localization.layer_factor_minimum(z_n, a, cos2)
    upper = 1.0
    lf = min(max(initial.lf, lower), upper)
    rho, res = residual(lf)
    best = (abs(res), lf, rho, res)
    history = [RefinementStep(lf, rho, res, (lower, upper))]
    iterations = 0
    message = ""
    if abs(res) > tol_cm:
        _, res_lower = residual(lower)
        _, res_upper = residual(upper)
        if np.sign(res_lower) == np.sign(res_upper) and res_lower != 0:
            message = (
                f"The residual of x_c has the same sign at lf={lower:.4f} "
                f"({res_lower:.4f}) and lf={upper} ({res_upper:.4f}). The observation "
                "cannot be matched, please check the projector."
            )
            logger.warning(message)
        else:
            while iterations < max_iter:
                iterations += 1
                lf = 0.5 * (lower + upper)
                rho, res = residual(lf)
                history.append(RefinementStep(lf, rho, res, (lower, upper)))
                logger.debug(
                    "refinement %d: lf = %.6f, rho = %.6f, residual = %.4f",
                    iterations,
                    lf,
                    rho,
                    res,
                )
                best = min(best, (abs(res), lf, rho, res))
                if abs(res) <= tol_cm:
                    break
                if np.sign(res) == np.sign(res_lower):
                    lower, res_lower = lf, res
                else:
                    upper = lf
                if upper - lower <= lf_tol:
                    break
    _, lf, rho, res = best
    converged = abs(res) <= tol_cm
    if not converged and not message:
        message = (
            f"The residual of x_c is {res:.4f} cm after {iterations} iterations, "
            f"above the tolerance of {tol_cm} cm."
        )
    refined = _Iterate(rho, res, iterations, converged, tuple(history), message)
    return _refinement_result(case, measurements, projector, initial, refined)


def _refinement_result(case, measurements, projector, initial, refined):
    rho, res = refined.rho, refined.residual
    a = mean_radius(measurements)
    nodule = localization.build_nodule(initial.x_n, initial.z_n, rho, a)
    target = localization.surgery_target(nodule, a)
    predicted_mlo = projector.predict_mlo(nodule.point)
    mlo_residual = abs(predicted_mlo - virtual_mlo_point(case, measurements))
    if mlo_residual > _config.MLO_ACCEPTABLE:
        message_mlo = (
            f"The predicted MLO position is {mlo_residual:.2f} cm away from the "
            f"observed one, more than the acceptable {_config.MLO_ACCEPTABLE} cm."
        )
        warnings.warn(message_mlo, exception.ModelWarning, stacklevel=3)
    return RefinementResult(
        lf_final=nodule.lf,
        rho_final=rho,
        nodule=nodule,
        target=target,
        iterations=refined.iterations,
        cc_residual=res,
        mlo_residual=mlo_residual,
        predicted_cc=tuple(float(x) for x in projector.predict_cc(nodule.point)),
        converged=refined.converged,
        history=refined.history,
        message="" if refined.converged else refined.message,
    )


def _linear_gain(y1, g1, y2, g2):
    slope = (g2 - g1) / (y2 - y1)
    return g1 - slope * y1, slope


def _probe_measurements():
    return BreastMeasurements(x_r=1.0, y_r=1.0, z_r=1.0, H_c=1.0, lat_x=1.0, lat_z=1.0)


register_projector("affine", AffineProjector)
register_projector("calibrated", CalibratedProjector)
