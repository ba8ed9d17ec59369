# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""End-to-end localization of a case and the reports printed by the command line.

The stages carry the names of the commands of the breast simulator: ``coors`` sets up
the measurements, ``mk`` maps the CC position to SRG, ``mlo`` carries the MLO position
into the virtual view, ``frho`` reads off ρ from the chord extremes and ``cnt`` runs
the refinement.
"""
import dataclasses
import logging
import warnings
from typing import Optional, Tuple

from py4mammo import _config, exception, forward, geodesic, localization, phantom
from py4mammo._util import convert
from py4mammo._util.parser import CALIBRATION_KEYS, EXTREME_KEYS, REQUIRED_KEYS
from py4mammo.model import Side, SurgeryTarget, mean_radius

logger = logging.getLogger(__name__)

_REPORTED_WARNINGS = (exception.ModelWarning, exception.ApproximationWarning)


@dataclasses.dataclass(frozen=True)
class LocateOptions:
    "Choices of the command line that override the case file."

    projector: Optional[str] = None
    geodesic: Optional[str] = None
    flip_side: bool = False
    refine: bool = True
    tol: float = _config.REFINE_TOLERANCE
    max_iter: int = _config.REFINE_MAX_ITER


@dataclasses.dataclass(frozen=True)
class CaseReport:
    "All intermediate and final results of the localization of one case."

    inputs: Tuple[Tuple[str, object], ...]
    "Echo of the case file as (key, value) pairs in a stable order."
    measurements: object
    a: float
    x_n: float
    z_n: float
    cos2theta: float
    mlo_L: Optional[complex]
    mlo_R: Optional[complex]
    P_virtual: complex
    rho: float
    side: Side
    lf: float
    target: SurgeryTarget
    skin_shortcut: bool
    candidates: Tuple[SurgeryTarget, ...] = ()
    "Targets on both sides of the chord when ρ is close to 0.5."
    refinement: Optional[forward.RefinementResult] = None
    warnings: Tuple[str, ...] = ()


def locate(parsed, options=None):
    """Run the whole localization for a parsed case file.

    Warnings of the model are collected in the report and issued again afterwards.

    Parameters
    ----------
    parsed : ParseCase
        The case file.
    options : LocateOptions
        Overrides of the command line.

    Returns
    -------
    CaseReport
        The analytic target and, unless disabled, the refined one.
    """
    options = options or LocateOptions()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = _locate(parsed, options)
    messages = []
    for warning in caught:
        if issubclass(warning.category, _REPORTED_WARNINGS):
            messages.append(str(warning.message))
        warnings.warn(warning.message, warning.category, stacklevel=2)
    return dataclasses.replace(report, warnings=report.warnings + tuple(messages))


def _locate(parsed, options):
    measurements = parsed.measurements
    case = parsed.case_inputs
    projector_name = options.projector or parsed.choice("projector", "affine")
    geodesic_name = options.geodesic or parsed.choice("geodesic", "closed")
    projector = _make_projector(projector_name, parsed, measurements)
    inputs = _echo(parsed, projector_name, geodesic_name)
    a = mean_radius(measurements)
    x_n, z_n = localization.mk_nodule_cc(case.cc_coords, measurements)
    logger.debug("mk: x_n = %.4f, z_n = %.4f", x_n, z_n)
    P_virtual = forward.virtual_mlo_point(case, measurements)
    notes = []
    try:
        analytic = forward.analytic_nodule(
            case, measurements, projector, parsed.extremes, options.flip_side
        )
    except exception.DegenerateChord as error:
        logger.debug("frho: %s", error)
        analytic = None
    if analytic is None or _on_skin(analytic):
        rho = 0.0 if analytic is None else analytic.rho.rho
        side = Side.FRONT if analytic is None else analytic.rho.side
        cos2 = 1.0 if analytic is None else analytic.cos2theta
        target = localization.skin_shortcut(x_n, z_n, a, side)
        notes.append("The nodule lies practically on the skin, the depth is set to 0.")
        return CaseReport(
            inputs=inputs,
            measurements=measurements,
            a=a,
            x_n=x_n,
            z_n=z_n,
            cos2theta=cos2,
            mlo_L=None if analytic is None else analytic.extremes.mlo_L,
            mlo_R=None if analytic is None else analytic.extremes.mlo_R,
            P_virtual=P_virtual,
            rho=rho,
            side=side,
            lf=1.0 if analytic is None else analytic.nodule.lf,
            target=target,
            skin_shortcut=True,
            warnings=tuple(notes),
        )
    surface = geodesic.EllipsoidSurface.from_measurements(measurements)

    def target_of(nodule):
        if geodesic_name == "numeric":
            return geodesic.surgery_target_numeric(nodule, surface)
        return localization.surgery_target(nodule, a)

    rho = analytic.rho
    candidates = ()
    if abs(rho.rho - 0.5) <= _config.SIDE_AMBIGUITY:
        candidates = localization.candidate_targets(x_n, z_n, rho.rho, a)
        message = (
            f"rho = {rho.rho:.4f} is close to 0.5, the side of the nodule is ambiguous. "
            "Both candidate targets are reported."
        )
        warnings.warn(message, exception.ModelWarning, stacklevel=2)
    refinement = None
    if options.refine:
        refinement = forward.refine_layer_factor(
            case,
            measurements,
            projector,
            options.tol,
            options.max_iter,
            initial=analytic.nodule,
        )
        if geodesic_name == "numeric":
            numeric = target_of(refinement.nodule)
            refinement = dataclasses.replace(refinement, target=numeric)
        if not refinement.converged:
            notes.append(refinement.message)
    return CaseReport(
        inputs=inputs,
        measurements=measurements,
        a=a,
        x_n=x_n,
        z_n=z_n,
        cos2theta=analytic.cos2theta,
        mlo_L=analytic.extremes.mlo_L,
        mlo_R=analytic.extremes.mlo_R,
        P_virtual=P_virtual,
        rho=rho.rho,
        side=rho.side,
        lf=analytic.nodule.lf,
        target=target_of(analytic.nodule),
        skin_shortcut=False,
        candidates=candidates,
        refinement=refinement,
        warnings=tuple(notes),
    )


def _on_skin(analytic):
    length = analytic.extremes.mlo_length
    return (
        analytic.nodule.lf >= _config.SKIN_LAYER_FACTOR
        or length <= _config.SKIN_CHORD_LENGTH
    )


def _make_projector(name, parsed, measurements):
    options = {}
    if name == "calibrated":
        options = parsed.calibration
    elif name == "affine" and parsed.choice("phantom_coupling", "no") == "yes":
        fit = phantom.fit_affine(phantom.load_trajectories(phantom.bundled_table()))
        options = {"coupling": fit.normalized()}
    return forward.projector_from_name(name, measurements, **options)


def _echo(parsed, projector_name, geodesic_name):
    keys = REQUIRED_KEYS + ("H",) + EXTREME_KEYS + CALIBRATION_KEYS
    inputs = [(key, parsed.entries[key]) for key in keys if key in parsed.entries]
    inputs.append(("projector", projector_name))
    inputs.append(("geodesic", geodesic_name))
    if "phantom_coupling" in parsed.entries:
        inputs.append(("phantom_coupling", parsed.entries["phantom_coupling"]))
    return tuple(inputs)


def format_human(report):
    "Describe the stages of the localization in a few lines of text."
    length = convert.format_length
    m = report.measurements
    lines = [
        f"coors  x_r = {length(m.x_r)}  y_r = {length(m.y_r)}  z_r = {length(m.z_r)}  "
        f"H_c = {length(m.H_c)}  a = {length(report.a)} cm",
        f"mk     x_n = {length(report.x_n)}  z_n = {length(report.z_n)} cm",
        f"mlo    P' = {_complex(report.P_virtual)} cm (virtual MLO view)",
    ]
    if report.mlo_L is not None:
        lines.append(
            f"frho   L = {_complex(report.mlo_L)}  R = {_complex(report.mlo_R)}  "
            f"rho = {length(report.rho)} ({report.side.value})  lf = {length(report.lf)}"
        )
    lines.append(f"target {_target(report.target)}")
    for candidate in report.candidates:
        lines.append(f"       candidate ({candidate.side.value}) {_target(candidate)}")
    refinement = report.refinement
    if refinement is not None:
        status = "converged" if refinement.converged else "not converged"
        lines += [
            f"cnt    lf = {length(refinement.lf_final)}  "
            f"rho = {length(refinement.rho_final)}  "
            f"iterations = {refinement.iterations} ({status})",
            f"       CC residual = {length(refinement.cc_residual)} cm  "
            f"MLO residual = {length(refinement.mlo_residual)} cm",
            f"target {_target(refinement.target)}",
        ]
    lines += [f"warning: {message}" for message in report.warnings]
    return "\n".join(lines)


def format_machine(report):
    "Lines ``key = value`` in a stable order, parseable again as a case file."
    length = convert.format_length
    lines = ["# py4mammo locate"]
    lines += [f"{key} = {_echo_value(value)}" for key, value in report.inputs]
    items = [
        ("x_n", length(report.x_n)),
        ("z_n", length(report.z_n)),
        ("a", length(report.a)),
        ("cos2theta", length(report.cos2theta)),
    ]
    if report.mlo_L is not None:
        items += [
            ("mlo_lw", length(report.mlo_L.real)),
            ("mlo_lz", length(report.mlo_L.imag)),
            ("mlo_rw", length(report.mlo_R.real)),
            ("mlo_rz", length(report.mlo_R.imag)),
        ]
    items += [
        ("p_virtual_w", length(report.P_virtual.real)),
        ("p_virtual_z", length(report.P_virtual.imag)),
        ("rho", length(report.rho)),
        ("side", report.side.value),
        ("lf", length(report.lf)),
        ("skin_shortcut", _yes_no(report.skin_shortcut)),
    ]
    items += _target_items("", report.target)
    refinement = report.refinement
    if refinement is not None:
        items += [
            ("refined_lf", length(refinement.lf_final)),
            ("refined_rho", length(refinement.rho_final)),
            ("iterations", str(refinement.iterations)),
            ("cc_residual", length(refinement.cc_residual)),
            ("mlo_residual", length(refinement.mlo_residual)),
            ("converged", _yes_no(refinement.converged)),
        ]
        items += _target_items("refined_", refinement.target)
    lines += [f"{key} = {value}" for key, value in items]
    return "\n".join(lines)


def format_phantom(fit):
    "Coefficients, residual table and the largest residual of the phantom fit."
    lines = ["C ="]
    lines += ["".join(_column(x) for x in row) for row in fit.C]
    lines.append("residual A - B C")
    lines.append("  label        e_x       e_y       e_z")
    for label, *row in fit.residual_table():
        lines.append(f"  {label:5}" + "".join(_column(x) for x in row))
    label, axis = fit.max_residual_location
    lines.append(
        f"max |E| = {fit.max_abs_residual:.4f} at nodule {label}, axis {axis}; "
        f"largest deviation from {_config.DIAGONAL_REFERENCE} I is "
        f"{phantom.diagonal_gap(fit):.4f}"
    )
    lines.append("# machine-readable")
    for i, row in enumerate(fit.C, start=1):
        for j, x in enumerate(row, start=1):
            lines.append(f"C.{i}{j} = {convert.format_length(x)}")
    lines += [
        f"max_abs_residual = {fit.max_abs_residual:.4f}",
        f"max_residual_label = {label}",
        f"max_residual_axis = {axis}",
        f"diagonal_gap = {phantom.diagonal_gap(fit):.4f}",
    ]
    return "\n".join(lines)


def _target_items(prefix, target):
    return [
        (f"{prefix}r", convert.format_length(target.r)),
        (f"{prefix}p", convert.format_angle(target.p)),
        (f"{prefix}d", convert.format_length(target.d)),
        (f"{prefix}method", target.method.value),
        (f"{prefix}approximate", _yes_no(target.approximate)),
    ]


def _target(target):
    text = (
        f"r = {convert.format_length(target.r)} cm  p = {convert.format_angle(target.p)} "
        f"deg  d = {convert.format_length(target.d)} cm  ({target.method.value})"
    )
    return text + ("  approximate" if target.approximate else "")


def _complex(value):
    real, imag = convert.to_pair(value)
    sign = "-" if convert.format_length(imag).startswith("-") else "+"
    imag_text = convert.format_length(abs(imag))
    return f"{convert.format_length(real)} {sign} {imag_text}i"


def _echo_value(value):
    if isinstance(value, float):
        return convert.to_decimal_text(value)
    return str(value)


def _yes_no(flag):
    return "yes" if flag else "no"


def _column(value):
    return convert.format_length(value).rjust(10)
