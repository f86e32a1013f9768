"""Exception hierarchy for detphase.

Every failure carries the name of the violated condition and the inputs
that triggered it, so the command layer can turn it into a structured
failure record without inspecting messages.
"""

from __future__ import annotations

from typing import Any, Dict

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class DetPhaseError(Exception):
    """Base class for all detphase errors.

    Args:
        message: Human-readable description.
        invariant: Short name of the violated condition (e.g. "invertibility").
        inputs: The inputs that triggered the failure (JSON-friendly values).
    """

    exit_code: int = EXIT_NUMERICAL

    def __init__(self, message: str, invariant: str = "", inputs: Dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.invariant = invariant or type(self).__name__
        self.inputs: Dict[str, Any] = dict(inputs or {})

    def to_record(self) -> Dict[str, Any]:
        """Render as a machine-readable failure record."""
        return {
            "status": "fail",
            "invariant": self.invariant,
            "error": str(self),
            "kind": type(self).__name__,
            "inputs": self.inputs,
        }


# Usage errors (exit 2)


class SpecParseError(DetPhaseError):
    """Malformed operator spec, spectrum file or command-line value."""

    exit_code = EXIT_USAGE

    def __init__(self, message: str, field: str = "", line: int | None = None,
                 inputs: Dict[str, Any] | None = None) -> None:
        location = field
        if line is not None:
            location = f"line {line}" + (f", field '{field}'" if field else "")
        elif field:
            location = f"field '{field}'"
        full = f"{location}: {message}" if location else message
        super().__init__(full, invariant="spec-parse", inputs=inputs)
        self.field = field
        self.line = line


class ConfigError(DetPhaseError):
    """Invalid run configuration (tolerances, cutoff limits)."""

    exit_code = EXIT_USAGE


# Assertion / precondition failures (exit 1)


class PreconditionError(DetPhaseError):
    """Theorem hypotheses are not met (e.g. asymmetric spectrum)."""

    exit_code = EXIT_ASSERTION


class ModelError(DetPhaseError):
    """A computed model violates an invariant it must satisfy."""

    exit_code = EXIT_ASSERTION


class RegimeError(DetPhaseError):
    """Coefficients outside the regime where the census is exact."""

    exit_code = EXIT_ASSERTION


class InvertibilityError(DetPhaseError):
    """An eigenvalue sits at the origin within tolerance."""

    exit_code = EXIT_ASSERTION


# Numerical failures (exit 3)


class DomainLogError(DetPhaseError):
    """Logarithm of zero requested."""


class CutCollisionError(DetPhaseError):
    """An eigenvalue lies on the branch cut R_theta."""


class IntegrationError(DetPhaseError):
    """The ODE integrator met non-finite coefficient values."""


class ContourCollisionError(DetPhaseError):
    """The argument-principle contour passes too close to a root."""


class ConvergenceError(DetPhaseError):
    """Newton refinement did not converge."""


class UndersampledError(DetPhaseError):
    """Phase samples too sparse for unambiguous unwrapping."""


class BandwidthError(DetPhaseError):
    """Galerkin cutoff too small for the coefficient bandwidth."""


class EigensolverError(DetPhaseError):
    """Dense eigensolver failed or the matrix exceeds the size limit."""
