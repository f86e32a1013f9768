"""Complex-spectrum bookkeeping.

Logarithm branches, reflection symmetry across the imaginary axis,
imaginary-axis eigenvalue counting, finite ζ-determinants, and the sign
predictor (-1)^{m_+} for operators whose spectrum is symmetric under
λ ↦ -conj(λ).

All functions are pure; summations run over the canonical (Im, Re) order
so results do not depend on evaluation order.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from config import AXIS_TOLERANCE, PAIRING_TOLERANCE
from errors import (
    CutCollisionError,
    DomainLogError,
    InvertibilityError,
    PreconditionError,
    SpecParseError,
)

logger = logging.getLogger("detphase.spectral_core")

TWO_PI = 2.0 * math.pi

# Arguments closer than this to the cut count as lying on it
_CUT_EPS = 64.0 * np.finfo(float).eps * TWO_PI

# Near-axis warning band, in units of the axis tolerance
_NEAR_AXIS_FACTOR = 100.0


class SpectrumSource(str, Enum):
    """Where a spectrum came from."""

    EXACT = "exact-formula"
    GALERKIN = "galerkin"
    MONODROMY = "monodromy"
    HODGE = "hodge-model"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class Eigenvalue:
    """A distinct eigenvalue with its algebraic multiplicity."""

    value: complex
    multiplicity: int = 1

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be >= 1, got {self.multiplicity}")
        object.__setattr__(self, "value", complex(self.value))


def _canonical_key(value: complex) -> Tuple[float, float]:
    return (value.imag, value.real)


def _merge(values: Sequence[complex], multiplicities: Sequence[int], tol: float) -> List[Eigenvalue]:
    """Merge values closer than tol into multiplicity-weighted clusters."""
    order = sorted(range(len(values)), key=lambda i: _canonical_key(values[i]))
    reps: List[complex] = []
    weights: List[int] = []
    for i in order:
        z = values[i]
        mult = int(multiplicities[i])
        if reps:
            dist = np.abs(np.asarray(reps) - z)
            j = int(np.argmin(dist))
            if dist[j] <= tol:
                total = weights[j] + mult
                reps[j] = (reps[j] * weights[j] + z * mult) / total
                weights[j] = total
                continue
        reps.append(z)
        weights.append(mult)

    merged = [Eigenvalue(z, w) for z, w in zip(reps, weights)]
    merged.sort(key=lambda e: _canonical_key(e.value))
    return merged


@dataclass(frozen=True)
class Spectrum:
    """Finite multiset of complex eigenvalues plus provenance.

    Entries are distinct (closer values are merged into one entry with
    summed multiplicity) and stored sorted by (Im, Re). The empty spectrum
    is allowed; it is symmetric and predicts sign +1.

    Attributes:
        eigenvalues: Distinct eigenvalues in canonical order.
        source: How the spectrum was obtained.
        truncation: Galerkin cutoff or other truncation order, if any.
        scale: max |λ| over entries (0 for the empty spectrum).
        method: Free-form detail (e.g. "tilde" or "K=1").
    """

    eigenvalues: Tuple[Eigenvalue, ...] = ()
    source: SpectrumSource = SpectrumSource.SYNTHETIC
    truncation: int | None = None
    scale: float = field(default=0.0)
    method: str = ""

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.eigenvalues, key=lambda e: _canonical_key(e.value)))
        object.__setattr__(self, "eigenvalues", ordered)
        scale = max((abs(e.value) for e in ordered), default=0.0)
        object.__setattr__(self, "scale", float(scale))

    @classmethod
    def from_values(
        cls,
        values: Iterable[complex],
        multiplicities: Iterable[int] | None = None,
        source: SpectrumSource = SpectrumSource.SYNTHETIC,
        truncation: int | None = None,
        merge_tol: float = PAIRING_TOLERANCE,
        method: str = "",
    ) -> "Spectrum":
        """Build a spectrum from raw values, merging near-duplicates.

        Values closer than merge_tol * (1 + max|λ|) are merged, so degenerate
        numerical clusters count with multiplicity.
        """
        vals = [complex(v) for v in values]
        mults = [1] * len(vals) if multiplicities is None else [int(m) for m in multiplicities]
        if len(mults) != len(vals):
            raise ValueError("values and multiplicities differ in length")
        scale = max((abs(v) for v in vals), default=0.0)
        merged = _merge(vals, mults, merge_tol * (1.0 + scale))
        return cls(tuple(merged), source=source, truncation=truncation, method=method)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues)

    def values(self) -> np.ndarray:
        """All eigenvalues repeated by multiplicity, canonical order."""
        out: List[complex] = []
        for e in self.eigenvalues:
            out.extend([e.value] * e.multiplicity)
        return np.asarray(out, dtype=complex)

    def within(self, radius: float) -> "Spectrum":
        """Entries with |λ| <= radius, same provenance."""
        kept = tuple(e for e in self.eigenvalues if abs(e.value) <= radius)
        return Spectrum(kept, source=self.source, truncation=self.truncation, method=self.method)

    def smallest(self, count: int) -> np.ndarray:
        """The `count` eigenvalues of smallest modulus (with multiplicity)."""
        vals = self.values()
        idx = np.lexsort((vals.real, vals.imag, np.round(np.abs(vals), 12)))
        return vals[idx[:count]]

    def mirrored(self) -> "Spectrum":
        """The reflected spectrum {-conj(λ)}."""
        return Spectrum(
            tuple(Eigenvalue(-e.value.conjugate(), e.multiplicity) for e in self.eigenvalues),
            source=self.source,
            truncation=self.truncation,
            method=self.method,
        )

    def to_records(self) -> List[Dict[str, Any]]:
        """JSON-friendly [{re, im, mult}, ...] in canonical order."""
        return [
            {"re": e.value.real, "im": e.value.imag, "mult": e.multiplicity}
            for e in self.eigenvalues
        ]

    @classmethod
    def from_records(cls, records: Sequence[Dict[str, Any]],
                     source: SpectrumSource = SpectrumSource.SYNTHETIC) -> "Spectrum":
        """Parse [{re, im, mult}, ...] as produced by to_records()."""
        values: List[complex] = []
        mults: List[int] = []
        for i, rec in enumerate(records):
            if not isinstance(rec, dict):
                raise SpecParseError("expected an object with re, im, mult", line=i + 1)
            try:
                re_part = float(rec["re"])
                im_part = float(rec["im"])
                mult = int(rec.get("mult", 1))
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecParseError(f"bad eigenvalue record: {exc}", line=i + 1) from exc
            if mult < 1:
                raise SpecParseError("multiplicity must be >= 1", field="mult", line=i + 1)
            values.append(complex(re_part, im_part))
            mults.append(mult)
        return cls.from_values(values, mults, source=source)


@dataclass(frozen=True)
class AgmonAngle:
    """A cut direction theta with an eigenvalue-free window around it.

    Attributes:
        theta: Direction in (0, 2π).
        window: Closed interval (lo, hi) containing theta, expected free of
            eigenvalue arguments.
    """

    theta: float
    window: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < TWO_PI:
            raise ValueError(f"theta must lie in (0, 2π), got {self.theta}")
        lo, hi = self.window
        if lo == hi == 0.0:
            object.__setattr__(self, "window", (self.theta, self.theta))
        elif not lo <= self.theta <= hi:
            raise ValueError(f"window {self.window} does not contain theta {self.theta}")

    @classmethod
    def around(cls, theta: float, half_width: float = 0.0) -> "AgmonAngle":
        return cls(theta, (theta - half_width, theta + half_width))

    def validate(self, spectrum: Spectrum) -> None:
        """Raise CutCollisionError when an eigenvalue argument is in the window."""
        lo, hi = self.window
        for e in spectrum.eigenvalues:
            if e.value == 0:
                raise DomainLogError("zero eigenvalue has no argument", invariant="invertibility",
                                     inputs={"theta": self.theta})
            arg = cmath.phase(e.value) % TWO_PI
            # Compare on the circle: shift the argument next to the window
            shifted = lo + ((arg - lo) % TWO_PI)
            if shifted <= hi + _CUT_EPS or (arg - lo) % TWO_PI > TWO_PI - _CUT_EPS:
                raise CutCollisionError(
                    f"eigenvalue {e.value} lies in the Agmon window {self.window}",
                    invariant="agmon-window",
                    inputs={"theta": self.theta, "eigenvalue": [e.value.real, e.value.imag]},
                )


@dataclass(frozen=True)
class AxisCount:
    """Multiplicity census of eigenvalues on the imaginary axis."""

    m_plus: int
    m_minus: int
    axis_tolerance: float

    @property
    def parity(self) -> int:
        return self.m_plus % 2

    def to_dict(self) -> Dict[str, Any]:
        return {"m_plus": self.m_plus, "m_minus": self.m_minus, "axis_tolerance": self.axis_tolerance}


@dataclass(frozen=True)
class NaiveComparison:
    """Finite product versus the sign theorem.

    Attributes:
        finite_det: exp(Σ m_k log_θ λ_k), i.e. the plain product.
        theorem_sign: (-1)^{m_+}.
        discrepant: True when the phase of finite_det is not theorem_sign.
        naive_phase: e^{iπ(m_+ - m_-)/2}, the phase a formal manipulation suggests.
    """

    finite_det: complex
    theorem_sign: int
    discrepant: bool
    naive_phase: complex

    def to_dict(self) -> Dict[str, Any]:
        return {
            "finite_det": {"re": self.finite_det.real, "im": self.finite_det.imag},
            "theorem_sign": self.theorem_sign,
            "discrepant": self.discrepant,
            "naive_phase": {"re": self.naive_phase.real, "im": self.naive_phase.imag},
        }


def log_branch(lam: complex, theta: float) -> complex:
    """Logarithm on C minus the ray R_theta, real on the positive reals.

    Returns ln|λ| + i·arg with arg in (theta - 2π, theta).

    Raises:
        DomainLogError: lam is zero.
        CutCollisionError: arg(lam) equals theta mod 2π within machine precision.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainLogError("logarithm of zero", invariant="log-domain", inputs={"theta": theta})
    base = theta - TWO_PI
    offset = (cmath.phase(lam) - base) % TWO_PI
    if offset < _CUT_EPS or offset > TWO_PI - _CUT_EPS:
        raise CutCollisionError(
            f"{lam} lies on the cut R_theta (theta={theta})",
            invariant="branch-cut",
            inputs={"lambda": [lam.real, lam.imag], "theta": theta},
        )
    return complex(math.log(abs(lam)), base + offset)


def is_symmetric_spectrum(s: Spectrum, tol: float = PAIRING_TOLERANCE) -> bool:
    """True iff the multiset is invariant under λ ↦ -conj(λ).

    Matching uses tol * (1 + scale) and compares summed multiplicities of
    the matched neighbourhood. The empty spectrum is symmetric.
    """
    if not s.eigenvalues:
        return True
    radius = tol * (1.0 + s.scale)
    values = np.array([e.value for e in s.eigenvalues])
    mults = np.array([e.multiplicity for e in s.eigenvalues])
    for e in s.eigenvalues:
        mirror = -e.value.conjugate()
        near = np.abs(values - mirror) <= radius
        if int(mults[near].sum()) != e.multiplicity:
            logger.debug("Unpaired eigenvalue %s (mirror %s)", e.value, mirror)
            return False
    return True


def count_imaginary_axis(s: Spectrum, axis_tolerance: float = AXIS_TOLERANCE) -> AxisCount:
    """Count multiplicities on the positive and negative imaginary axis.

    An eigenvalue counts as on the axis when |Re λ| <= tol * (1 + |λ|).

    Raises:
        InvertibilityError: an eigenvalue lies within axis_tolerance of 0.
    """
    m_plus = 0
    m_minus = 0
    for e in s.eigenvalues:
        lam = e.value
        if abs(lam) <= axis_tolerance:
            raise InvertibilityError(
                f"eigenvalue {lam} at the origin",
                invariant="invertibility",
                inputs={"eigenvalue": [lam.real, lam.imag], "axis_tolerance": axis_tolerance},
            )
        band = axis_tolerance * (1.0 + abs(lam))
        if abs(lam.real) <= band:
            if lam.imag > 0:
                m_plus += e.multiplicity
            else:
                m_minus += e.multiplicity
        elif abs(lam.real) <= _NEAR_AXIS_FACTOR * band:
            logger.warning("Eigenvalue %s is near the imaginary axis but outside tolerance", lam)
    return AxisCount(m_plus, m_minus, axis_tolerance)


def predicted_sign(s: Spectrum, axis_tolerance: float = AXIS_TOLERANCE,
                   pairing_tol: float = PAIRING_TOLERANCE) -> int:
    """Sign of the ζ-determinant for a symmetric spectrum: (-1)^{m_+}.

    Raises:
        PreconditionError: spectrum not symmetric under λ ↦ -conj(λ).
        InvertibilityError: eigenvalue at the origin.
    """
    if not is_symmetric_spectrum(s, pairing_tol):
        raise PreconditionError(
            "spectrum is not symmetric under reflection in the imaginary axis",
            invariant="symmetric-spectrum",
            inputs={"size": len(s), "source": s.source.value},
        )
    count = count_imaginary_axis(s, axis_tolerance)
    return -1 if count.m_plus % 2 else 1


def finite_zeta(s: Spectrum, angle: AgmonAngle, z: complex) -> complex:
    """Finite ζ-function Σ m_k λ_k^{-z} with powers taken on the θ-branch."""
    angle.validate(s)
    total = 0j
    for e in s.eigenvalues:
        total += e.multiplicity * cmath.exp(-z * log_branch(e.value, angle.theta))
    return total


def finite_zeta_prime_at_zero(s: Spectrum, angle: AgmonAngle) -> complex:
    """ζ'_θ(0) = -Σ m_k log_θ λ_k for a finite spectrum."""
    angle.validate(s)
    total = 0j
    for e in s.eigenvalues:
        total += e.multiplicity * log_branch(e.value, angle.theta)
    return -total


def finite_zeta_det(s: Spectrum, angle: AgmonAngle) -> complex:
    """ζ-determinant exp(-ζ'_θ(0)) of a finite spectrum."""
    return cmath.exp(-finite_zeta_prime_at_zero(s, angle))


def angle_shift(s: Spectrum, theta1: float, theta2: float) -> complex:
    """ζ'_{θ1}(0) - ζ'_{θ2}(0) for θ1 < θ2.

    Equals 2πi times the total multiplicity of eigenvalues whose argument
    lies strictly between the two rays, so the two determinants agree.
    """
    if not theta1 < theta2:
        raise ValueError("theta1 must be smaller than theta2")
    return (finite_zeta_prime_at_zero(s, AgmonAngle(theta1))
            - finite_zeta_prime_at_zero(s, AgmonAngle(theta2)))


def choose_agmon_angle(s: Spectrum, lo: float = math.pi / 2, hi: float = math.pi) -> AgmonAngle:
    """Pick the middle of the widest eigenvalue-free argument gap in (lo, hi).

    The returned window is the central half of that gap.

    Raises:
        CutCollisionError: the interval holds no eigenvalue-free gap.
    """
    args = sorted(
        cmath.phase(e.value) % TWO_PI
        for e in s.eigenvalues
        if e.value != 0 and lo < cmath.phase(e.value) % TWO_PI < hi
    )
    edges = [lo] + args + [hi]
    best = max(range(len(edges) - 1), key=lambda i: edges[i + 1] - edges[i])
    width = edges[best + 1] - edges[best]
    if width <= 2 * _CUT_EPS:
        raise CutCollisionError(
            "no eigenvalue-free direction in the requested interval",
            invariant="agmon-window",
            inputs={"lo": lo, "hi": hi},
        )
    mid = 0.5 * (edges[best] + edges[best + 1])
    return AgmonAngle(mid, (mid - width / 4, mid + width / 4))


def expected_naive_phase(count: AxisCount) -> complex:
    """e^{iπ(m_+ - m_-)/2}: the phase a formal product argument suggests."""
    return cmath.exp(0.5j * math.pi * (count.m_plus - count.m_minus))


def naive_vs_theorem(s: Spectrum, angle: AgmonAngle,
                     axis_tolerance: float = AXIS_TOLERANCE,
                     pairing_tol: float = PAIRING_TOLERANCE) -> NaiveComparison:
    """Compare the plain finite product with the sign theorem.

    The finite product of a symmetric spectrum has phase e^{iπ(m_+ - m_-)/2},
    while the regularized determinant of a genuine operator has sign
    (-1)^{m_+}. The two disagree whenever m_+ is odd or m_+ + m_- ≡ 2 mod 4.
    """
    theorem_sign = predicted_sign(s, axis_tolerance, pairing_tol)
    det = finite_zeta_det(s, angle)
    count = count_imaginary_axis(s, axis_tolerance)
    if det == 0:
        discrepant = True
    else:
        discrepant = abs(det / abs(det) - theorem_sign) > 1e-9
    result = NaiveComparison(det, theorem_sign, discrepant, expected_naive_phase(count))
    logger.debug("Finite det %s vs theorem sign %+d (discrepant=%s)", det, theorem_sign, discrepant)
    return result
