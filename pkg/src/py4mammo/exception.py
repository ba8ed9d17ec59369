# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Deals with the possible exceptions in py4mammo.

The design goal is that all foreseeable exceptions in py4mammo issue an exception of
the Py4MammoError class. Any other kind of exception would indicate a bug in the code.
Geometric problems (a nodule outside the breast model, a point outside the Möbius
disk) are reported as DomainError so that the command line can distinguish them from
malformed input."""


class Py4MammoError(Exception):
    """Base class for all exceptions raised by py4mammo"""


class IncorrectUsage(Py4MammoError):
    """The user provided input is not suitable for processing"""


class ValidationError(IncorrectUsage):
    """A value violates a constraint of the breast model. The message names the field
    so that the user can correct the measurement."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ParserError(Py4MammoError):
    """Exception raised when the parser of a case file or phantom table encounters an
    error."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingKey(ParserError):
    """The case file does not define a key required by the pipeline."""

    def __init__(self, key):
        super().__init__(f"The case file does not define the required key '{key}'.")
        self.key = key


class DomainError(Py4MammoError):
    """A geometric precondition is violated, e.g., the nodule lies outside of the
    breast model or a point lies outside of the Möbius disk."""


class DegenerateChord(DomainError):
    """The skin-to-skin chord through the nodule collapses to a point. This happens when
    the nodule lies practically on the skin, so the skin shortcut applies."""


class NoSolution(DomainError):
    """The requested layer factor cannot be attained for the given nodule height."""

    def __init__(self, message, minimum):
        super().__init__(message)
        self.minimum = minimum


class SingularConfiguration(Py4MammoError):
    """The least-squares problem is rank deficient, e.g., because all phantom nodules
    lie in a plane through the origin."""


class ConvergenceError(Py4MammoError):
    """A numerical iteration did not converge and no fallback is available."""


class ModuleNotInstalled(Py4MammoError):
    """Exception raised when a functionality is used that relies on an optional
    dependency of py4mammo but that dependency is not installed."""


class ModelWarning(UserWarning):
    """The input is accepted but one of the assumptions of the breast model is
    stretched, e.g., the radii differ by more than 11%."""


class ApproximationWarning(UserWarning):
    """The result was obtained with a coarser fallback method and should be treated as
    an approximation."""
