"""Operators on the circle of length β.

Three families are modelled:

* the scalar operator D_a = -i d/dt + ia,
* the Dirac-type operator D = i d/dt + im n̂(t), n̂ = [[0, e^{iφ}], [e^{-iφ}, 0]],
  together with its gauge-transformed form D̃_a = i d/dt + [[-aφ̇/2, im], [im, aφ̇/2]],
* the deformed DeRham-Dirac operator d + d* + m(i n₀ + c(n̄)) on (0-forms, 1-forms).

Galerkin matrices use the exponential basis e^{iπpt/β} with integer labels
p ≡ w (mod 2), |p| <= 2N, where w is the boundary phase in
ξ(β) = e^{iπw} ξ(0). The label set is closed under p ↦ -p, so the reflection
symmetries of the operators hold exactly for the truncated matrices.
Two-component matrices interleave the components: row 2i + c is component c
of mode i.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from config import (
    AXIS_TOLERANCE,
    CONTOUR_DENSITY,
    GALERKIN_CUTOFF,
    MAX_MATRIX_SIZE,
    PAIRING_TOLERANCE,
    PHASE_GRID_POINTS,
    RK4_STEPS,
)
from errors import (
    BandwidthError,
    EigensolverError,
    ModelError,
    PreconditionError,
    UndersampledError,
)
from ode_engine import (
    MonodromySystem,
    SearchRegion,
    calibrated_scalar_determinant,
    counted_region,
    find_roots,
)
from reporting import PhaseReport, SweepRow, SweepTrace, spectral_phase_report
from spectral_core import (
    TWO_PI,
    Spectrum,
    SpectrumSource,
    count_imaginary_axis,
    is_symmetric_spectrum,
)

logger = logging.getLogger("detphase.circle_operators")

# Fourier coefficients of e^{iφ} below this fraction of the largest are dropped
_COEFFICIENT_FLOOR = 1e-14

# Rows of a sweep list eigenvalues with |Re λ| <= this * (1 + |λ|)
_NEAR_AXIS_WINDOW = 1e-2


class CircleForm(str, Enum):
    """Which of the two unitarily equivalent Dirac forms to assemble."""

    ORIGINAL = "original"
    TILDE = "tilde"


@dataclass(frozen=True)
class PhaseFunction:
    """φ(t) = 2πkt/β + c_0 + Σ_{j≠0} c_j e^{2πijt/β}, real valued.

    Only c_0..c_J are stored; c_{-j} = conj(c_j) is implied, and c_0 must
    be real. φ(t + β) = φ(t) + 2πk holds by construction.
    """

    beta: float
    winding: int = 0
    coefficients: Tuple[complex, ...] = ()

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        coeffs = tuple(complex(c) for c in self.coefficients)
        if coeffs and abs(coeffs[0].imag) > 1e-14:
            raise ValueError("constant coefficient c_0 must be real")
        if coeffs:
            coeffs = (complex(coeffs[0].real, 0.0),) + coeffs[1:]
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "winding", int(self.winding))

    @classmethod
    def linear(cls, beta: float, winding: int, offset: float = 0.0) -> "PhaseFunction":
        """φ(t) = 2πkt/β + offset."""
        return cls(beta, winding, (complex(offset),))

    @classmethod
    def sinusoidal(cls, beta: float, winding: int, amplitude: float,
                   offset: float = 0.0) -> "PhaseFunction":
        """φ(t) = 2πkt/β + offset + amplitude·sin(2πt/β)."""
        return cls(beta, winding, (complex(offset), -0.5j * amplitude))

    @classmethod
    def from_pairs(cls, beta: float, winding: int,
                   pairs: Iterable[Tuple[int, complex]]) -> "PhaseFunction":
        """Build from (j, c_j) pairs with j >= 0; missing j are zero."""
        table: Dict[int, complex] = {}
        for j, c in pairs:
            if j < 0:
                raise ValueError(f"coefficient index must be >= 0, got {j}")
            table[int(j)] = table.get(int(j), 0j) + complex(c)
        size = max(table, default=-1) + 1
        return cls(beta, winding, tuple(table.get(j, 0j) for j in range(size)))

    @property
    def bandwidth(self) -> int:
        """Largest j with c_j != 0 (0 for a pure winding)."""
        for j in range(len(self.coefficients) - 1, 0, -1):
            if self.coefficients[j] != 0:
                return j
        return 0

    def _periodic(self, t: np.ndarray, derivative: bool) -> np.ndarray:
        out = np.zeros_like(t, dtype=float)
        if not derivative and self.coefficients:
            out += self.coefficients[0].real
        for j, c in enumerate(self.coefficients[1:], start=1):
            wave = c * np.exp(1j * TWO_PI * j * t / self.beta)
            if derivative:
                wave = wave * (1j * TWO_PI * j / self.beta)
            out += 2.0 * wave.real
        return out

    def value(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return TWO_PI * self.winding * t / self.beta + self._periodic(t, False)

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return TWO_PI * self.winding / self.beta + self._periodic(t, True)

    def grid(self, points: int = PHASE_GRID_POINTS) -> np.ndarray:
        return np.arange(points) * (self.beta / points)

    def max_abs_derivative(self, points: int = PHASE_GRID_POINTS) -> float:
        return float(np.max(np.abs(self.derivative(self.grid(points)))))

    def samples(self, count: int = PHASE_GRID_POINTS) -> np.ndarray:
        """φ at count + 1 uniform points of [0, β], both endpoints included."""
        return self.value(np.linspace(0.0, self.beta, count + 1))

    def derivative_coefficients(self) -> Dict[int, complex]:
        """Fourier coefficients of φ̇ (frequency unit 2π/β), both signs of j."""
        out: Dict[int, complex] = {0: complex(TWO_PI * self.winding / self.beta)}
        for j, c in enumerate(self.coefficients[1:], start=1):
            if c != 0:
                d = c * (1j * TWO_PI * j / self.beta)
                out[j] = d
                out[-j] = d.conjugate()
        return out

    def exp_coefficients(self, sign: int = 1, points: int = PHASE_GRID_POINTS) -> Dict[int, complex]:
        """Fourier coefficients of e^{±iφ}, frequency unit 2π/β.

        The coefficients of e^{-iφ} are taken as conj of the e^{iφ}
        coefficients at -q, so the two stay exactly consistent.

        Raises:
            BandwidthError: e^{iφ} is not resolved by the phase grid.
        """
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if sign == -1:
            return {-q: c.conjugate() for q, c in self.exp_coefficients(1, points).items()}
        t = self.grid(points)
        periodic = np.exp(1j * self._periodic(t, False))
        raw = np.fft.fft(periodic) / points
        freqs = np.fft.fftfreq(points, d=1.0 / points).astype(int)
        floor = _COEFFICIENT_FLOOR * float(np.max(np.abs(raw)))
        kept = {int(q): complex(c) for q, c in zip(freqs, raw) if abs(c) > floor}
        reach = max((abs(q) for q in kept), default=0)
        if reach >= points // 4:
            raise BandwidthError(
                f"e^(i phi) needs {reach} modes; phase grid of {points} points is too coarse",
                invariant="phase-grid-resolution",
                inputs={"reach": reach, "points": points},
            )
        return {q + self.winding: c for q, c in kept.items()}

    def interpolate(self, other: "PhaseFunction", s: float) -> "PhaseFunction":
        """(1 - s)·self + s·other for phases with equal β and winding."""
        if other.beta != self.beta or other.winding != self.winding:
            raise ValueError("interpolation needs equal beta and winding")
        size = max(len(self.coefficients), len(other.coefficients))
        mine = list(self.coefficients) + [0j] * (size - len(self.coefficients))
        theirs = list(other.coefficients) + [0j] * (size - len(other.coefficients))
        return PhaseFunction(self.beta, self.winding,
                             tuple((1 - s) * a + s * b for a, b in zip(mine, theirs)))


@dataclass(frozen=True)
class ScalarCircleSpec:
    """D_a = -i d/dt + ia with ξ(β) = e^{iπν} ξ(0)."""

    a: float
    beta: float
    nu: int = 0

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.nu not in (0, 1):
            raise ValueError(f"nu must be 0 or 1, got {self.nu}")

    @property
    def boundary_phase(self) -> int:
        return self.nu

    def exact_determinant(self) -> float:
        """(1 - e^{-iπν}M(0))/M(0) = e^{-aβ} - (-1)^ν."""
        return math.exp(-self.a * self.beta) - (-1.0) ** self.nu

    def label(self) -> str:
        return f"scalar a={self.a:g} beta={self.beta:g} nu={self.nu}"


@dataclass(frozen=True)
class CircleDiracSpec:
    """Dirac-type operator on the circle.

    Attributes:
        phase: φ with its winding k.
        mass: m > 0.
        nu: Boundary parity of the original form.
        deformation: a in [0, 1]; only the tilde form uses it.
        form: Original or tilde assembly.
    """

    phase: PhaseFunction
    mass: float
    nu: int = 0
    deformation: float = 1.0
    form: CircleForm = CircleForm.TILDE

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.nu not in (0, 1):
            raise ValueError(f"nu must be 0 or 1, got {self.nu}")
        if not 0.0 <= self.deformation <= 1.0:
            raise ValueError(f"deformation must lie in [0, 1], got {self.deformation}")
        object.__setattr__(self, "form", CircleForm(self.form))

    @property
    def beta(self) -> float:
        return self.phase.beta

    @property
    def winding(self) -> int:
        return self.phase.winding

    @property
    def boundary_phase(self) -> int:
        """w = ν for the original form, ν + k for the tilde form."""
        if self.form is CircleForm.TILDE:
            return self.nu + self.winding
        return self.nu

    def label(self) -> str:
        text = f"dirac k={self.winding} nu={self.nu} m={self.mass:g} {self.form.value}"
        if self.form is CircleForm.TILDE and self.deformation != 1.0:
            text += f" a={self.deformation:g}"
        return text


@dataclass(frozen=True)
class SphereBundleSection1D:
    """Unit section n = (cos ψ, sin ψ ∂_t) of ℝ ⊕ TS¹; deg n is the winding of ψ."""

    psi: PhaseFunction

    @property
    def beta(self) -> float:
        return self.psi.beta

    @property
    def degree(self) -> int:
        return self.psi.winding

    def components(self, t) -> Tuple[np.ndarray, np.ndarray]:
        """(n₀, n̄) at t; n₀² + n̄² = 1 identically."""
        angle = self.psi.value(t)
        return np.cos(angle), np.sin(angle)


@dataclass(frozen=True)
class DerhamCircleSpec:
    """Deformed DeRham-Dirac operator d + d* + mΦ(n) on the circle."""

    section: SphereBundleSection1D
    mass: float

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")

    @property
    def beta(self) -> float:
        return self.section.beta

    def label(self) -> str:
        return f"derham deg={self.section.degree} m={self.mass:g}"


OperatorSpec = Union[ScalarCircleSpec, CircleDiracSpec, DerhamCircleSpec]


def winding_number(phi_samples: Sequence[float], beta: float, wrapped: bool = False) -> int:
    """Winding k of a phase sampled uniformly on [0, β] (both endpoints).

    With wrapped=False the samples are the real values of φ and each
    increment must be below π. With wrapped=True the samples are angles
    known mod 2π; each increment is reduced to (-π, π] and must not reach π.

    Raises:
        UndersampledError: an increment is too large to unwrap unambiguously.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    values = np.asarray(phi_samples, dtype=float)
    if values.size < 2:
        raise UndersampledError("need at least two samples", invariant="sampling",
                                inputs={"samples": int(values.size)})
    if wrapped:
        values = np.unwrap(values)
    steps = np.diff(values)
    worst = int(np.argmax(np.abs(steps)))
    if abs(steps[worst]) >= math.pi * (1.0 - 1e-12):
        raise UndersampledError(
            f"phase increment {steps[worst]:.6g} at sample {worst} is not below pi",
            invariant="sampling",
            inputs={"index": worst, "increment": float(steps[worst]), "samples": int(values.size)},
        )
    return int(round(float(np.sum(steps)) / TWO_PI))


def frequency_labels(boundary_phase: int, cutoff: int) -> np.ndarray:
    """Integer labels p ≡ w (mod 2), |p| <= 2N; mode p has frequency πp/β."""
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    start = -2 * cutoff + (boundary_phase % 2)
    return np.arange(start, 2 * cutoff + 1, 2)


def trusted_radius(beta: float, cutoff: int) -> float:
    """Half the cutoff frequency, πN/β."""
    return math.pi * cutoff / beta


def _toeplitz(labels: np.ndarray, coeffs: Dict[int, complex]) -> np.ndarray:
    """Multiplication by Σ f_q e^{2πiqt/β} between modes: entry f_{(p - p')/2}."""
    shift = (labels[:, None] - labels[None, :]) // 2
    reach = int(np.max(np.abs(shift)))
    table = np.zeros(2 * reach + 1, dtype=complex)
    for q, c in coeffs.items():
        if abs(q) <= reach:
            table[q + reach] = c
    return table[shift + reach]


def _interleave(blocks: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    n = blocks[0][0].shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for c in range(2):
        for c2 in range(2):
            out[c::2, c2::2] = blocks[c][c2]
    return out


def _check_bandwidth(bandwidth: int, cutoff: int, label: str) -> None:
    if 2 * bandwidth > cutoff:
        raise BandwidthError(
            f"cutoff {cutoff} cannot hold coefficient bandwidth {bandwidth} (need cutoff >= {2 * bandwidth})",
            invariant="cutoff-bandwidth",
            inputs={"cutoff": cutoff, "bandwidth": bandwidth, "operator": label},
        )


def _check_size(size: int) -> None:
    if size > MAX_MATRIX_SIZE:
        raise EigensolverError(
            f"matrix of size {size} exceeds the configured maximum {MAX_MATRIX_SIZE}",
            invariant="matrix-size",
            inputs={"size": size, "max": MAX_MATRIX_SIZE},
        )


def _scalar_matrix(spec: ScalarCircleSpec, cutoff: int) -> np.ndarray:
    labels = frequency_labels(spec.boundary_phase, cutoff)
    return np.diag(math.pi * labels / spec.beta + 1j * spec.a).astype(complex)


def _dirac_matrix(spec: CircleDiracSpec, cutoff: int) -> np.ndarray:
    labels = frequency_labels(spec.boundary_phase, cutoff)
    n = labels.size
    _check_size(2 * n)
    diag = np.diag(-math.pi * labels / spec.beta).astype(complex)
    eye = np.eye(n, dtype=complex)
    m = spec.mass
    if spec.form is CircleForm.TILDE:
        _check_bandwidth(spec.phase.bandwidth, cutoff, spec.label())
        drift = 0.5 * spec.deformation * _toeplitz(labels, spec.phase.derivative_coefficients())
        return _interleave([[diag - drift, 1j * m * eye],
                            [1j * m * eye, diag + drift]])
    up = spec.phase.exp_coefficients(1)
    down = {-q: c.conjugate() for q, c in up.items()}
    _check_bandwidth(max(abs(q) for q in up), cutoff, spec.label())
    return _interleave([[diag, 1j * m * _toeplitz(labels, up)],
                        [1j * m * _toeplitz(labels, down), diag]])


def _section_coefficients(section: SphereBundleSection1D) -> Tuple[Dict[int, complex], Dict[int, complex]]:
    """Fourier coefficients of cos ψ and sin ψ, exactly real-symmetric."""
    up = section.psi.exp_coefficients(1)
    down = {-q: c.conjugate() for q, c in up.items()}
    keys = set(up) | set(down)
    cos_c = {q: 0.5 * (up.get(q, 0j) + down.get(q, 0j)) for q in keys}
    sin_c = {q: -0.5j * (up.get(q, 0j) - down.get(q, 0j)) for q in keys}
    return cos_c, sin_c


def _derham_matrix(spec: DerhamCircleSpec, cutoff: int) -> np.ndarray:
    labels = frequency_labels(0, cutoff)
    n = labels.size
    _check_size(2 * n)
    cos_c, sin_c = _section_coefficients(spec.section)
    _check_bandwidth(max(abs(q) for q in cos_c), cutoff, spec.label())
    omega = np.diag(math.pi * labels / spec.beta).astype(complex)
    m = spec.mass
    mass_term = 1j * m * _toeplitz(labels, cos_c)
    cliff = m * _toeplitz(labels, sin_c)
    # (f, g dx): d f = f' dx, d*(g dx) = -g'
    return _interleave([[mass_term, -1j * omega + cliff],
                        [1j * omega + cliff, mass_term]])


def galerkin_matrix(spec: OperatorSpec, cutoff: int = GALERKIN_CUTOFF) -> np.ndarray:
    """Dense Galerkin matrix of the operator over the symmetric mode window.

    Raises:
        BandwidthError: cutoff smaller than twice the coefficient bandwidth.
        EigensolverError: the matrix would exceed the configured size limit.
    """
    if isinstance(spec, ScalarCircleSpec):
        matrix = _scalar_matrix(spec, cutoff)
    elif isinstance(spec, CircleDiracSpec):
        matrix = _dirac_matrix(spec, cutoff)
    elif isinstance(spec, DerhamCircleSpec):
        matrix = _derham_matrix(spec, cutoff)
    else:
        raise TypeError(f"unsupported operator spec {type(spec).__name__}")
    logger.debug("Assembled %s: %dx%d at cutoff %d", spec.label(), matrix.shape[0], matrix.shape[1], cutoff)
    return matrix


def spectrum_galerkin(matrix: np.ndarray, cutoff: int | None = None, method: str = "",
                      merge_tol: float = PAIRING_TOLERANCE) -> Spectrum:
    """All eigenvalues of a dense matrix, tagged as a Galerkin spectrum.

    Raises:
        EigensolverError: size above the configured maximum, non-finite
            entries, or LAPACK failure.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    _check_size(matrix.shape[0])
    try:
        values = scipy.linalg.eig(matrix, right=False, check_finite=True)
    except (ValueError, np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolverError(
            f"eigensolver failed: {exc}",
            invariant="eigensolver-convergence",
            inputs={"size": matrix.shape[0], "cutoff": cutoff},
        ) from exc
    return Spectrum.from_values(values, source=SpectrumSource.GALERKIN, truncation=cutoff,
                                merge_tol=merge_tol, method=method)


def trusted_spectrum(spec: OperatorSpec, cutoff: int = GALERKIN_CUTOFF,
                     merge_tol: float = PAIRING_TOLERANCE) -> Spectrum:
    """Galerkin eigenvalues with |λ| <= πN/β."""
    method = spec.form.value if isinstance(spec, CircleDiracSpec) else type(spec).__name__
    full = spectrum_galerkin(galerkin_matrix(spec, cutoff), cutoff, method, merge_tol)
    return full.within(trusted_radius(spec.beta, cutoff))


def exact_spectrum_tilde0(m: float, beta: float, k: int, nu: int,
                          window: Tuple[int, int]) -> Spectrum:
    """λ±_n = ±im + (π/β)(2n - k - ν) for n in the closed window."""
    n_min, n_max = window
    values = []
    for n in range(n_min, n_max + 1):
        real = math.pi * (2 * n - k - nu) / beta
        values.extend([complex(real, m), complex(real, -m)])
    return Spectrum.from_values(values, source=SpectrumSource.EXACT, method="tilde0")


def exact_spectrum_scalar(spec: ScalarCircleSpec, window: Tuple[int, int]) -> Spectrum:
    """π(2n + ν)/β + ia for n in the closed window."""
    n_min, n_max = window
    values = [complex(math.pi * (2 * n + spec.nu) / spec.beta, spec.a) for n in range(n_min, n_max + 1)]
    return Spectrum.from_values(values, source=SpectrumSource.EXACT, method="scalar")


def invertibility_margin(spec: CircleDiracSpec) -> float:
    """m - max|φ̇|; positive means 0 is not an eigenvalue."""
    return spec.mass - spec.phase.max_abs_derivative()


def eigenvalue_lower_bound(spec: CircleDiracSpec) -> float:
    """√(m·margin), a lower bound for |λ| when the margin is positive."""
    margin = invertibility_margin(spec)
    return math.sqrt(spec.mass * margin) if margin > 0 else 0.0


def invertibility_margin_section(section: SphereBundleSection1D, m: float) -> float:
    """m - max(|(n̄)'| + |n₀'|) for the deformed DeRham-Dirac operator."""
    t = section.psi.grid()
    angle = section.psi.value(t)
    rate = np.abs(section.psi.derivative(t))
    return float(m - np.max(rate * (np.abs(np.cos(angle)) + np.abs(np.sin(angle)))))


def circle_sign_prediction(k: int, nu: int) -> int:
    """-(-1)^{k+ν}."""
    return -1 if (k + nu) % 2 == 0 else 1


def lemma_conjugations(matrix: np.ndarray) -> Dict[str, float]:
    """Residuals of the two conjugations of an interleaved tilde matrix T.

    sigma_z: max|σ_z T σ_z - T^H|.
    sigma_x_reflection: max|(σ_x R) T (R σ_x) + conj(T)|, R: p ↦ -p.
    """
    size = matrix.shape[0]
    if size % 2:
        raise ValueError("two-component matrix expected")
    signs = np.tile([1.0, -1.0], size // 2)
    sz = signs[:, None] * matrix * signs[None, :]
    modes = size // 2
    idx = np.arange(size)
    perm = 2 * (modes - 1 - idx // 2) + (1 - idx % 2)
    reflected = matrix[np.ix_(perm, perm)]
    return {
        "sigma_z": float(np.max(np.abs(sz - matrix.conj().T))),
        "sigma_x_reflection": float(np.max(np.abs(reflected + matrix.conj()))),
    }


def verify_circle_theorem(spec: CircleDiracSpec, cutoff: int = GALERKIN_CUTOFF,
                          axis_tol: float = AXIS_TOLERANCE,
                          pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """Sign of the Galerkin model against -(-1)^{k+ν}.

    Raises:
        PreconditionError: m <= max|φ̇|.
        ModelError: the computed spectrum is not symmetric.
    """
    margin = invertibility_margin(spec)
    if margin <= 0:
        raise PreconditionError(
            f"mass {spec.mass:g} does not exceed max|phi'| = {spec.phase.max_abs_derivative():.6g}",
            invariant="invertibility-margin",
            inputs={"operator": spec.label(), "margin": margin},
        )
    spectrum = trusted_spectrum(spec, cutoff, pairing_tol)
    details = {
        "winding": spec.winding,
        "nu": spec.nu,
        "boundary_phase": spec.boundary_phase,
        "margin": margin,
        "lower_bound": eigenvalue_lower_bound(spec),
        "trusted_radius": trusted_radius(spec.beta, cutoff),
        "trusted_size": spectrum.total_multiplicity,
    }
    return spectral_phase_report(spec.label(), spectrum, circle_sign_prediction(spec.winding, spec.nu),
                                 "galerkin", cutoff, axis_tol, pairing_tol, details)


def derham_dirac_circle(section: SphereBundleSection1D, m: float, cutoff: int = GALERKIN_CUTOFF,
                        axis_tol: float = AXIS_TOLERANCE,
                        pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """Sign of the deformed DeRham-Dirac model against (-1)^{deg n}.

    Raises:
        PreconditionError: nonpositive invertibility margin.
        ModelError: the computed spectrum is not symmetric.
    """
    spec = DerhamCircleSpec(section, m)
    margin = invertibility_margin_section(section, m)
    if margin <= 0:
        raise PreconditionError(
            f"mass {m:g} does not dominate the derivative of the section",
            invariant="invertibility-margin",
            inputs={"operator": spec.label(), "margin": margin},
        )
    spectrum = trusted_spectrum(spec, cutoff, pairing_tol)
    prediction = -1 if section.degree % 2 else 1
    details = {
        "degree": section.degree,
        "margin": margin,
        "trusted_radius": trusted_radius(spec.beta, cutoff),
        "trusted_size": spectrum.total_multiplicity,
    }
    return spectral_phase_report(spec.label(), spectrum, prediction, "galerkin", cutoff,
                                 axis_tol, pairing_tol, details)


def scalar_sign_report(spec: ScalarCircleSpec, cutoff: int = GALERKIN_CUTOFF, steps: int = RK4_STEPS,
                       axis_tol: float = AXIS_TOLERANCE,
                       pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """Calibrated monodromy determinant of D_a against (-1)^{m_+}.

    The computed sign is the sign of the calibrated determinant; the
    prediction comes from the imaginary-axis census of the Galerkin model.
    """
    det = calibrated_scalar_determinant(scalar_monodromy_system(spec), steps)
    spectrum = trusted_spectrum(spec, cutoff, pairing_tol)
    count = count_imaginary_axis(spectrum, axis_tol)
    exact = spec.exact_determinant()
    report = PhaseReport(
        label=spec.label(),
        axis_count=count,
        computed_sign=1 if det.real > 0 else -1,
        topological_prediction=-1 if count.m_plus % 2 else 1,
        method="monodromy",
        cutoff=cutoff,
        steps=steps,
        tolerances={"axis": axis_tol, "pairing": pairing_tol},
        symmetric=is_symmetric_spectrum(spectrum, pairing_tol),
        min_abs=float(np.min(np.abs(spectrum.values()))),
        details={
            "calibrated_det": {"re": det.real, "im": det.imag},
            "exact_det": exact,
            "abs_error": abs(det - exact),
        },
    )
    logger.info("%s: det %.12g (exact %.12g)", spec.label(), det.real, exact)
    return report


def _near_axis(spectrum: Spectrum) -> tuple:
    return tuple(
        e.value for e in spectrum.eigenvalues
        if abs(e.value.real) <= _NEAR_AXIS_WINDOW * (1.0 + abs(e.value))
    )


def _sweep_row(parameter: float, spectrum: Spectrum, axis_tol: float) -> SweepRow:
    count = count_imaginary_axis(spectrum, axis_tol)
    return SweepRow(
        parameter=float(parameter),
        near_axis=_near_axis(spectrum),
        m_plus=count.m_plus,
        m_minus=count.m_minus,
        min_abs=float(np.min(np.abs(spectrum.values()))) if len(spectrum) else 0.0,
    )


def _run_ordered(task: Callable[[float], SweepRow], params: Sequence[float], jobs: int) -> List[SweepRow]:
    if jobs <= 1:
        return [task(p) for p in params]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, params))


def sweep_deformation(spec: CircleDiracSpec, steps: int = 20, cutoff: int = GALERKIN_CUTOFF,
                      axis_tol: float = AXIS_TOLERANCE, jobs: int = 1,
                      a_values: Sequence[float] | None = None) -> SweepTrace:
    """m_+ along the tilde family D̃_a for a on a uniform grid of [0, 1].

    The trace carries the lower bound √(m(m - max|φ̇|)); callers check
    parity_constant and bound_respected.

    Raises:
        PreconditionError: m <= max|φ̇|, so invertibility is not guaranteed.
    """
    margin = invertibility_margin(spec)
    if margin <= 0:
        raise PreconditionError(
            "deformation sweep needs a positive invertibility margin",
            invariant="invertibility-margin",
            inputs={"operator": spec.label(), "margin": margin},
        )
    if a_values is None:
        a_values = np.linspace(0.0, 1.0, steps + 1)
    base = replace(spec, form=CircleForm.TILDE)

    def task(a: float) -> SweepRow:
        member = replace(base, deformation=float(a))
        return _sweep_row(a, trusted_spectrum(member, cutoff), axis_tol)

    rows = _run_ordered(task, [float(a) for a in a_values], jobs)
    trace = SweepTrace("a", rows, lower_bound=eigenvalue_lower_bound(spec))
    if not trace.parity_constant:
        logger.warning("Parity jump in %s at a=%s", spec.label(), trace.counterexample.parameter)
    return trace


def sweep_section(start: SphereBundleSection1D, end: SphereBundleSection1D, m: float,
                  steps: int = 20, cutoff: int = GALERKIN_CUTOFF,
                  axis_tol: float = AXIS_TOLERANCE, jobs: int = 1) -> SweepTrace:
    """m_+ along ψ_s = (1 - s)ψ_start + sψ_end at fixed degree.

    Raises:
        PreconditionError: the invertibility margin is not positive somewhere on the path.
    """
    params = [float(s) for s in np.linspace(0.0, 1.0, steps + 1)]
    sections = [SphereBundleSection1D(start.psi.interpolate(end.psi, s)) for s in params]
    for s, section in zip(params, sections):
        margin = invertibility_margin_section(section, m)
        if margin <= 0:
            raise PreconditionError(
                f"invertibility margin {margin:.6g} at s={s:g}",
                invariant="invertibility-margin",
                inputs={"s": s, "degree": start.degree, "m": m},
            )
    by_param = dict(zip(params, sections))

    def task(s: float) -> SweepRow:
        return _sweep_row(s, trusted_spectrum(DerhamCircleSpec(by_param[s], m), cutoff), axis_tol)

    trace = SweepTrace("s", _run_ordered(task, params, jobs))
    if not trace.parity_constant:
        logger.warning("Parity jump along section homotopy at s=%s", trace.counterexample.parameter)
    return trace


def match_eigenvalues(left: Sequence[complex], right: Sequence[complex]) -> np.ndarray:
    """Greedy nearest-neighbour matching; left taken in (Im, Re) order.

    Returns the distance for each entry of left (inf when right runs out).
    """
    lhs = sorted((complex(z) for z in left), key=lambda z: (z.imag, z.real))
    pool = list(complex(z) for z in right)
    distances = []
    for z in lhs:
        if not pool:
            distances.append(math.inf)
            continue
        gaps = [abs(z - w) for w in pool]
        best = min(range(len(pool)), key=lambda i: (gaps[i], pool[i].imag, pool[i].real))
        distances.append(gaps[best])
        pool.pop(best)
    return np.asarray(distances, dtype=float)


def isospectrality_check(spec: CircleDiracSpec, cutoff: int = GALERKIN_CUTOFF,
                         match_tol: float = 1e-6) -> float:
    """Max distance between matched original- and tilde-form eigenvalues.

    Tilde-form eigenvalues in the inner half of the trusted window are matched
    against the full original-form spectrum.

    Raises:
        ModelError: some eigenvalue has no partner within match_tol·(1 + |λ|).
    """
    tilde = replace(spec, form=CircleForm.TILDE, deformation=1.0)
    original = replace(spec, form=CircleForm.ORIGINAL)
    inner = 0.5 * trusted_radius(spec.beta, cutoff)
    tilde_vals = spectrum_galerkin(galerkin_matrix(tilde, cutoff), cutoff).within(inner).values()
    original_vals = spectrum_galerkin(galerkin_matrix(original, cutoff), cutoff).values()
    distances = match_eigenvalues(tilde_vals, original_vals)
    if distances.size == 0:
        return 0.0
    worst = float(np.max(distances))
    limit = match_tol * (1.0 + inner)
    if worst > limit:
        raise ModelError(
            f"eigenvalue of {tilde.label()} unmatched in original form (distance {worst:.3g})",
            invariant="isospectrality",
            inputs={"operator": spec.label(), "cutoff": cutoff, "distance": worst},
        )
    logger.debug("Isospectrality distance %.3g over %d eigenvalues", worst, distances.size)
    return worst


def scalar_monodromy_system(spec: ScalarCircleSpec) -> MonodromySystem:
    """ξ' = (a + iλ)ξ."""

    def base(t: np.ndarray) -> np.ndarray:
        return np.full((t.size, 1, 1), spec.a, dtype=complex)

    def slope(t: np.ndarray) -> np.ndarray:
        return np.full((t.size, 1, 1), 1j, dtype=complex)

    return MonodromySystem(1, base, slope, spec.beta, spec.boundary_phase, spec.label())


def _minus_i(t: np.ndarray) -> np.ndarray:
    return np.broadcast_to(-1j * np.eye(2), (t.size, 2, 2)).copy()


def dirac_monodromy_system(spec: CircleDiracSpec) -> MonodromySystem:
    """Original: ξ' = (-iλ - m n̂)ξ. Tilde: ξ' = i(B_a - λ)ξ."""
    phase = spec.phase
    m = spec.mass

    if spec.form is CircleForm.TILDE:
        a = spec.deformation

        def base(t: np.ndarray) -> np.ndarray:
            drift = 0.5 * a * phase.derivative(t)
            out = np.zeros((t.size, 2, 2), dtype=complex)
            out[:, 0, 0] = -1j * drift
            out[:, 1, 1] = 1j * drift
            out[:, 0, 1] = out[:, 1, 0] = -m
            return out
    else:

        def base(t: np.ndarray) -> np.ndarray:
            angle = phase.value(t)
            out = np.zeros((t.size, 2, 2), dtype=complex)
            out[:, 0, 1] = -m * np.exp(1j * angle)
            out[:, 1, 0] = -m * np.exp(-1j * angle)
            return out

    return MonodromySystem(2, base, _minus_i, spec.beta, spec.boundary_phase, spec.label())


def derham_monodromy_system(section: SphereBundleSection1D, m: float) -> MonodromySystem:
    """ξ = (f, g): ξ' = [[-m sin ψ, λ - im cos ψ], [im cos ψ - λ, m sin ψ]] ξ."""

    def base(t: np.ndarray) -> np.ndarray:
        n0, nbar = section.components(t)
        out = np.zeros((t.size, 2, 2), dtype=complex)
        out[:, 0, 0] = -m * nbar
        out[:, 1, 1] = m * nbar
        out[:, 0, 1] = -1j * m * n0
        out[:, 1, 0] = 1j * m * n0
        return out

    def slope(t: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex), (t.size, 2, 2)).copy()

    return MonodromySystem(2, base, slope, section.beta, 0, DerhamCircleSpec(section, m).label())


def monodromy_system(spec: OperatorSpec) -> MonodromySystem:
    if isinstance(spec, ScalarCircleSpec):
        return scalar_monodromy_system(spec)
    if isinstance(spec, CircleDiracSpec):
        return dirac_monodromy_system(spec)
    if isinstance(spec, DerhamCircleSpec):
        return derham_monodromy_system(spec.section, spec.mass)
    raise TypeError(f"unsupported operator spec {type(spec).__name__}")


def _edge_between(values: np.ndarray, inside: float) -> float:
    """Midpoint between `inside` and the next larger value (or inside + 1)."""
    above = values[values > inside + 1e-9]
    return 0.5 * (inside + float(np.min(above))) if above.size else inside + 1.0


def method_agreement(spec: OperatorSpec, count: int = 10, cutoff: int = GALERKIN_CUTOFF,
                     steps: int = RK4_STEPS, density: int = CONTOUR_DENSITY) -> Dict[str, float]:
    """Galerkin versus monodromy root-finding on the lowest eigenvalues.

    A rectangle is placed around the `count` smallest-|λ| Galerkin
    eigenvalues with edges halfway to the next eigenvalue, then searched
    with the argument principle and Newton refinement. Both counts and
    the root search use the rectangle the contour was actually taken on,
    which is shifted slightly after a contour collision.

    Returns:
        dict with galerkin_count, monodromy_count (counted inside the
        rectangle) and distance (max matched distance over the `count`
        smallest eigenvalues).
    """
    spectrum = trusted_spectrum(spec, cutoff)
    values = spectrum.values()
    lowest = spectrum.smallest(count)
    re_abs = np.abs(values.real)
    im_abs = np.abs(values.imag)
    half_width = _edge_between(re_abs, float(np.max(np.abs(lowest.real))))
    half_height = _edge_between(im_abs, float(np.max(np.abs(lowest.imag))))
    system = monodromy_system(spec)
    requested = SearchRegion(-half_width, half_width, -half_height, half_height, density)
    counted, region = counted_region(system, requested, min(steps, 1024))
    inside = [z for z in values if region.contains(z)]
    roots = find_roots(system, region, steps).values()
    distances = match_eigenvalues(lowest, roots)
    result = {
        "galerkin_count": len(inside),
        "monodromy_count": counted,
        "roots_found": int(roots.size),
        "distance": float(np.max(distances)) if distances.size else 0.0,
    }
    logger.info("%s: galerkin/monodromy distance %.3g (%d vs %d roots)",
                spec.label(), result["distance"], result["galerkin_count"], counted)
    return result


def imaginary_part_bound(spec: OperatorSpec) -> float:
    """Bound on |Im λ|: m for the Dirac forms, m·max|n₀| for DeRham-Dirac, |a| for scalar."""
    if isinstance(spec, ScalarCircleSpec):
        return abs(spec.a)
    if isinstance(spec, CircleDiracSpec):
        return spec.mass
    n0, _ = spec.section.components(spec.section.psi.grid())
    return spec.mass * float(np.max(np.abs(n0)))
