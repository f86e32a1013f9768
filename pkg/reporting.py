"""Report records shared by the computational modules and the commands.

PhaseReport and SweepTrace are the verdict records; CommandResult carries a
command's payload (or failure) plus the text artifacts it wants written.
"""

from __future__ import annotations

import functools
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config import MAX_MATRIX_SIZE
from errors import EXIT_ASSERTION, EXIT_OK, ConfigError, DetPhaseError, ModelError
from spectral_core import AxisCount, Spectrum, count_imaginary_axis, is_symmetric_spectrum

logger = logging.getLogger("detphase.reporting")


def complex_record(z: complex) -> Dict[str, float]:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def dumps(payload: Any) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class PhaseReport:
    """Sign verdict for one operator.

    Attributes:
        label: What was computed (e.g. "dirac k=1 nu=1 tilde").
        axis_count: m_+ / m_- census.
        computed_sign: (-1)^{m_+} from the computed spectrum.
        topological_prediction: Sign predicted by the topological formula.
        method: "galerkin" (dense eigensolve of a Fourier truncation),
            "monodromy", or a free-form tag for synthetic spectra.
        cutoff: Galerkin cutoff (or None).
        steps: RK4 steps (or None).
        tolerances: Tolerances used, by name.
        symmetric: Whether the spectrum passed the reflection check.
        min_abs: Smallest |λ| in the trusted spectrum.
        details: Extra operator-specific values.
    """

    label: str
    axis_count: AxisCount
    computed_sign: int
    topological_prediction: int
    method: str
    cutoff: Optional[int] = None
    steps: Optional[int] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    symmetric: bool = True
    min_abs: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def agreement(self) -> bool:
        return self.computed_sign == self.topological_prediction

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "axis_count": self.axis_count.to_dict(),
            "computed_sign": self.computed_sign,
            "topological_prediction": self.topological_prediction,
            "agreement": self.agreement,
            "method": self.method,
            "cutoff": self.cutoff,
            "steps": self.steps,
            "tolerances": dict(self.tolerances),
            "symmetric": self.symmetric,
            "min_abs": self.min_abs,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class SweepRow:
    """One parameter value of a homotopy sweep."""

    parameter: float
    near_axis: tuple
    m_plus: int
    m_minus: int
    min_abs: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameter": self.parameter,
            "near_axis": [complex_record(z) for z in self.near_axis],
            "m_plus": self.m_plus,
            "m_minus": self.m_minus,
            "min_abs": self.min_abs,
        }


@dataclass
class SweepTrace:
    """Rows of a parity sweep, ordered by parameter."""

    parameter_name: str
    rows: List[SweepRow] = field(default_factory=list)
    lower_bound: Optional[float] = None

    def __post_init__(self) -> None:
        self.rows.sort(key=lambda r: r.parameter)

    @property
    def parity_constant(self) -> bool:
        return len({r.m_plus % 2 for r in self.rows}) <= 1

    @property
    def counterexample(self) -> Optional[SweepRow]:
        """First row whose m_+ parity differs from the first row."""
        if not self.rows:
            return None
        first = self.rows[0].m_plus % 2
        for row in self.rows:
            if row.m_plus % 2 != first:
                return row
        return None

    @property
    def min_abs(self) -> float:
        return min((r.min_abs for r in self.rows), default=0.0)

    @property
    def bound_respected(self) -> bool:
        if self.lower_bound is None:
            return True
        return self.min_abs >= self.lower_bound - 1e-6

    def to_dict(self) -> Dict[str, Any]:
        bad = self.counterexample
        return {
            "parameter_name": self.parameter_name,
            "parity_constant": self.parity_constant,
            "counterexample": bad.to_dict() if bad else None,
            "lower_bound": self.lower_bound,
            "bound_respected": self.bound_respected,
            "min_abs": self.min_abs,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = [f"{self.parameter_name},m_plus,m_minus,min_abs,near_axis"]
        for r in self.rows:
            near = ";".join(f"{z.real:.16e}{z.imag:+.16e}j" for z in r.near_axis)
            lines.append(f"{r.parameter:.16e},{r.m_plus},{r.m_minus},{r.min_abs:.16e},{near}")
        return "\n".join(lines) + "\n"


@dataclass
class RunConfig:
    """Resolved options for one command run."""

    command: str
    spec: Optional[str] = None
    samples: Optional[str] = None
    beta: Optional[float] = None
    cutoff: int = 64
    steps: int = 4096
    sweep_steps: int = 20
    axis_tol: float = 1e-6
    pairing_tol: float = 1e-8
    out: str = "out"
    jobs: int = 1
    dim: int = 3
    a: float = 0.5
    graded: Optional[Sequence[float]] = None
    explore: Optional[Sequence[float]] = None
    wrapped: bool = False

    def validate(self) -> None:
        if self.axis_tol <= 0 or self.pairing_tol <= 0:
            raise ConfigError("tolerances must be positive", invariant="positive-tolerance",
                              inputs={"axis_tol": self.axis_tol, "pairing_tol": self.pairing_tol})
        if self.cutoff <= 0 or 2 * (2 * self.cutoff + 1) > MAX_MATRIX_SIZE:
            raise ConfigError(f"cutoff {self.cutoff} outside (0, {(MAX_MATRIX_SIZE // 2 - 1) // 2}]",
                              invariant="cutoff-range", inputs={"cutoff": self.cutoff})
        if self.jobs <= 0:
            raise ConfigError("jobs must be positive", invariant="positive-jobs", inputs={"jobs": self.jobs})


@dataclass
class CommandResult:
    """Outcome of a command.

    Attributes:
        status: "pass", "fail" (an assertion did not hold) or "error".
        payload: JSON-friendly result.
        artifacts: File name -> text content to be written by the caller.
        exit_code: Process exit status for the CLI.
    """

    status: str
    payload: Dict[str, Any] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)
    exit_code: int = EXIT_OK

    @classmethod
    def ok(cls, payload: Dict[str, Any], artifacts: Dict[str, str] | None = None) -> "CommandResult":
        """Create a passing result."""
        return cls(status="pass", payload=payload, artifacts=dict(artifacts or {}))

    @classmethod
    def fail(cls, payload: Dict[str, Any], artifacts: Dict[str, str] | None,
             invariant: str, message: str, inputs: Dict[str, Any] | None = None) -> "CommandResult":
        """Create a result whose assertion did not hold (exit 1).

        A failure record naming the invariant is added as failure.json.
        """
        record = {"status": "fail", "invariant": invariant, "error": message, "inputs": dict(inputs or {})}
        files = dict(artifacts or {})
        files["failure.json"] = dumps(record)
        return cls(status="fail", payload={**payload, "failure": record}, artifacts=files,
                   exit_code=EXIT_ASSERTION)

    @classmethod
    def err(cls, error: DetPhaseError) -> "CommandResult":
        """Create an error result from a library exception."""
        record = error.to_record()
        return cls(status="error", payload=record, artifacts={"failure.json": dumps(record)},
                   exit_code=error.exit_code)

    @property
    def success(self) -> bool:
        return self.exit_code == EXIT_OK

    def to_json(self) -> str:
        return dumps({"status": self.status, **self.payload})


def spectral_phase_report(label: str, spectrum: Spectrum, prediction: int, method: str,
                          cutoff: Optional[int], axis_tol: float, pairing_tol: float,
                          details: Dict[str, Any] | None = None) -> PhaseReport:
    """Count m_+ of a symmetric spectrum and compare (-1)^{m_+} with a prediction.

    Raises:
        ModelError: the spectrum is not symmetric under λ ↦ -conj(λ).
        InvertibilityError: an eigenvalue sits at the origin.
    """
    if not is_symmetric_spectrum(spectrum, pairing_tol):
        raise ModelError(
            f"computed spectrum of {label} is not symmetric",
            invariant="symmetric-spectrum",
            inputs={"operator": label, "cutoff": cutoff, "pairing_tol": pairing_tol},
        )
    count = count_imaginary_axis(spectrum, axis_tol)
    sign = -1 if count.m_plus % 2 else 1
    values = spectrum.values()
    report = PhaseReport(
        label=label,
        axis_count=count,
        computed_sign=sign,
        topological_prediction=prediction,
        method=method,
        cutoff=cutoff,
        tolerances={"axis": axis_tol, "pairing": pairing_tol},
        symmetric=True,
        min_abs=float(np.min(np.abs(values))) if values.size else 0.0,
        details=dict(details or {}),
    )
    logger.info("%s: m_+=%d sign %+d, predicted %+d", label, count.m_plus, sign, prediction)
    return report


def command_boundary(name: str) -> Callable[[Callable[..., CommandResult]], Callable[..., CommandResult]]:
    """Turn library exceptions raised by a command into CommandResult.err.

    ValueError from argument validation is reported as a usage error.
    """
    log = logging.getLogger(f"detphase.tools.{name}")

    def decorate(fn: Callable[..., CommandResult]) -> Callable[..., CommandResult]:
        @functools.wraps(fn)
        def run(*args: Any, **kwargs: Any) -> CommandResult:
            log.info("%s started", name)
            try:
                result = fn(*args, **kwargs)
            except DetPhaseError as exc:
                log.error("%s failed [%s]: %s", name, exc.invariant, exc)
                return CommandResult.err(exc)
            except ValueError as exc:
                log.error("%s rejected its arguments: %s", name, exc)
                return CommandResult.err(ConfigError(str(exc), invariant="argument"))
            log.info("%s finished: %s", name, result.status)
            return result

        return run

    return decorate
