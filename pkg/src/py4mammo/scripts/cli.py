# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
import argparse
import importlib.resources
import io
import logging
import pathlib
import sys
from argparse import RawTextHelpFormatter

from py4mammo import conformal, exception, phantom, report
from py4mammo._config import REFINE_MAX_ITER, REFINE_TOLERANCE
from py4mammo._util import convert
from py4mammo._util.parser import ParseCase

EXIT_CODES = (
    (exception.IncorrectUsage, 2),
    (exception.ParserError, 2),
    (exception.ModuleNotInstalled, 2),
    (exception.SingularConfiguration, 3),
    (exception.ConvergenceError, 3),
    (exception.DomainError, 4),
)


def get_options(args=None):
    """
    parses input arguments
    Parameters
    ----------
    locate
          run the localization for a case file
    fit-phantom
          fit the affine compression model to a phantom table
    mobius
          map a point between the real and the virtual MLO view
    example-case
          print the case file of the reference case 0023-1
    """
    parser = argparse.ArgumentParser(
        prog="py4mammo",
        description="py4mammo\n"
        + "--------\n"
        + "Locate a breast tumour for surgery from its positions in the CC and MLO\n"
        + "mammograms. The result are polar coordinates (r, p, d) centred at the nipple.",
        formatter_class=RawTextHelpFormatter,
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="print debug messages"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    locate = commands.add_parser("locate", help="locate the nodule of a case file")
    locate.add_argument("case_file", type=pathlib.Path)
    locate.add_argument("--projector", choices=("affine", "calibrated"))
    locate.add_argument("--geodesic", choices=("closed", "numeric"))
    locate.add_argument(
        "--flip-side",
        action="store_true",
        help="use the root 1 - rho on the other side of the chord",
    )
    locate.add_argument(
        "--no-refine", action="store_true", help="skip the refinement of lf (cnt)"
    )
    locate.add_argument(
        "--machine",
        action="store_true",
        help="print only the machine-readable key = value block",
    )
    locate.add_argument("--tol", type=float, default=REFINE_TOLERANCE)
    locate.add_argument("--max-iter", type=int, default=REFINE_MAX_ITER)
    locate.set_defaults(run=run_locate)

    fit = commands.add_parser("fit-phantom", help="fit the phantom compression")
    fit.add_argument(
        "file",
        nargs="?",
        type=pathlib.Path,
        help="CSV table of the nodules, defaults to the bundled reference phantom",
    )
    fit.set_defaults(run=run_fit_phantom)

    mobius = commands.add_parser("mobius", help="evaluate the conformal correction")
    mobius.add_argument("--b", type=float, required=True, help="b = b_c / H")
    mobius.add_argument("--H", type=float, required=True, help="radius of the disk")
    mobius.add_argument(
        "--inverse",
        action="store_true",
        help="map from the real into the virtual MLO view",
    )
    mobius.add_argument("re", type=float)
    mobius.add_argument("im", type=float)
    mobius.set_defaults(run=run_mobius)

    example = commands.add_parser("example-case", help="print the case 0023-1")
    example.set_defaults(run=run_example_case)
    return parser.parse_args(args)


def run_locate(options):
    parsed = ParseCase(_read(options.case_file))
    locate_options = report.LocateOptions(
        projector=options.projector,
        geodesic=options.geodesic,
        flip_side=options.flip_side,
        refine=not options.no_refine,
        tol=options.tol,
        max_iter=options.max_iter,
    )
    result = report.locate(parsed, locate_options)
    if not options.machine:
        print(report.format_human(result))
        print()
    print(report.format_machine(result))


def run_fit_phantom(options):
    if options.file is None:
        source = phantom.bundled_table()
    else:
        source = io.StringIO(_read(options.file))
    fit = phantom.fit_affine(phantom.load_trajectories(source))
    print(report.format_phantom(fit))


def run_mobius(options):
    params = conformal.MobiusParams(b=options.b, H=options.H)
    point = complex(options.re, options.im)
    if options.inverse:
        result = conformal.mobius_inverse(point, params)
    else:
        result = conformal.mobius_forward(point, params)
    real, imag = convert.to_pair(result)
    print(f"{convert.format_length(real)} {convert.format_length(imag)}")


def run_example_case(options):
    resource = importlib.resources.files("py4mammo.data") / "case_0023-1.txt"
    print(resource.read_text(encoding="utf-8"), end="")


def main(args=None):
    options = get_options(args)
    level = logging.DEBUG if options.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("py4mammo").setLevel(level)
    logging.captureWarnings(True)
    try:
        options.run(options)
    except exception.Py4MammoError as error:
        print(f"py4mammo: error: {error}", file=sys.stderr)
        return _exit_code(error)
    finally:
        logging.captureWarnings(False)
    return 0


def _exit_code(error):
    for kind, code in EXIT_CODES:
        if isinstance(error, kind):
            return code
    return 1


def _read(path):
    try:
        return path.read_text(encoding="utf-8")
    except OSError as error:
        raise exception.IncorrectUsage(f"Could not read {path}: {error}") from error
