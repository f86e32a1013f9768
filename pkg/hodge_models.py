"""Finite Fourier models of the DeRham complex on the flat tori T¹ and T³.

Basis elements are e^{ik·x} dx^I with k in {-K..K}^N and I an increasing
multi-index, ordered by (degree, multi-index, frequency). The harmonic forms
are the k = 0 modes, which every truncation contains, so Betti numbers and
imaginary-axis counts are exact at any cutoff K >= 1.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import AXIS_TOLERANCE, MAX_MATRIX_SIZE, PAIRING_TOLERANCE
from errors import DetPhaseError, EigensolverError, RegimeError
from reporting import PhaseReport, spectral_phase_report
from spectral_core import Spectrum, SpectrumSource

logger = logging.getLogger("detphase.hodge_models")

# d + d* has integer frequencies, so its nonzero singular values are >= 1
SPECTRAL_GAP = 1.0


def _permutation_sign(order: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
    return -1 if inversions % 2 else 1


@dataclass
class TorusFourierComplex:
    """Assembled operators of the truncated complex.

    Attributes:
        dimension: N (1 or 3).
        cutoff: K, the max-norm frequency bound.
        forms: Multi-indices in basis order.
        modes: (M, N) integer array of frequencies, M = (2K+1)^N.
        d, dstar, star, gamma, grading: Dense complex matrices.
    """

    dimension: int
    cutoff: int
    forms: List[Tuple[int, ...]]
    modes: np.ndarray
    d: np.ndarray
    dstar: np.ndarray
    star: np.ndarray
    gamma: np.ndarray
    grading: np.ndarray
    _dirac: np.ndarray | None = field(default=None, repr=False)

    @property
    def mode_count(self) -> int:
        return int(self.modes.shape[0])

    @property
    def total_dim(self) -> int:
        return len(self.forms) * self.mode_count

    @property
    def degree_dims(self) -> List[int]:
        return [math.comb(self.dimension, j) for j in range(self.dimension + 1)]

    @property
    def dirac(self) -> np.ndarray:
        """d + d*."""
        if self._dirac is None:
            self._dirac = self.d + self.dstar
        return self._dirac

    def degrees(self) -> np.ndarray:
        """Form degree of every basis element."""
        return np.repeat([len(form) for form in self.forms], self.mode_count)

    def harmonic_indices(self) -> np.ndarray:
        """Basis positions of the k = 0 modes, i.e. ker(d + d*)."""
        zero = self.mode_count // 2
        return np.array([pos * self.mode_count + zero for pos in range(len(self.forms))])


def build_complex(N: int, K: int) -> TorusFourierComplex:
    """Assemble d, d*, ★, Γ and the degree grading on T^N with cutoff K."""
    if N not in (1, 3):
        raise ValueError(f"dimension must be 1 or 3, got {N}")
    if K < 1:
        raise ValueError(f"cutoff must be >= 1, got {K}")
    forms = [c for j in range(N + 1) for c in itertools.combinations(range(N), j)]
    position = {form: i for i, form in enumerate(forms)}
    modes = np.array(list(itertools.product(range(-K, K + 1), repeat=N)), dtype=int)
    count = modes.shape[0]
    size = len(forms) * count
    if size > MAX_MATRIX_SIZE:
        raise EigensolverError(
            f"complex of dimension {size} exceeds the configured maximum {MAX_MATRIX_SIZE}",
            invariant="matrix-size",
            inputs={"N": N, "K": K, "size": size},
        )
    span = np.arange(count)

    d = np.zeros((size, size), dtype=complex)
    star = np.zeros((size, size), dtype=complex)
    gamma = np.zeros((size, size), dtype=complex)
    half = (N - 1) // 2
    for form in forms:
        col = position[form] * count + span
        for j in range(N):
            if j in form:
                continue
            target = tuple(sorted(form + (j,)))
            sign = -1 if sum(1 for i in form if i < j) % 2 else 1
            d[position[target] * count + span, col] = sign * 1j * modes[:, j]
        complement = tuple(i for i in range(N) if i not in form)
        eps = _permutation_sign(form + complement)
        row = position[complement] * count + span
        star[row, col] = eps
        deg = len(form)
        gamma[row, col] = (1j ** (half + 1)) * (-1) ** (deg * (deg + 1) // 2) * eps

    degrees = np.repeat([len(form) for form in forms], count)
    grading = np.diag((-1.0) ** degrees).astype(complex)
    logger.debug("Built T^%d complex with K=%d: dimension %d", N, K, size)
    return TorusFourierComplex(N, K, forms, modes, d, d.conj().T.copy(), star, gamma, grading)


def structural_residuals(c: TorusFourierComplex) -> Dict[str, float]:
    """Max-entry residuals of the identities the complex must satisfy."""
    eye = np.eye(c.total_dim)
    dirac = c.dirac

    def norm(m: np.ndarray) -> float:
        return float(np.max(np.abs(m))) if m.size else 0.0

    return {
        "d_squared": norm(c.d @ c.d),
        "gamma_squared": norm(c.gamma @ c.gamma - eye),
        "gamma_hermitian": norm(c.gamma - c.gamma.conj().T),
        "gamma_commutator": norm(c.gamma @ dirac - dirac @ c.gamma),
        "star_unitary": norm(c.star @ c.star.conj().T - eye),
        "grading_anticommutes": norm(c.grading @ dirac @ c.grading + dirac),
    }


@dataclass(frozen=True)
class GradedCoefficients:
    """a_j acting on j-forms; all nonzero."""

    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if any(v == 0 for v in vals):
            raise ValueError("graded coefficients must be nonzero")
        object.__setattr__(self, "values", vals)

    def check_regime(self, gap: float = SPECTRAL_GAP) -> None:
        worst = max((abs(v) for v in self.values), default=0.0)
        if worst >= gap:
            raise RegimeError(
                f"|a_j| = {worst:g} is not below the spectral gap {gap:g}",
                invariant="coefficient-regime",
                inputs={"coefficients": list(self.values), "gap": gap},
            )


def betti_numbers(c: TorusFourierComplex) -> List[int]:
    """dim ker(d + d*) in each degree."""
    laplacian = c.dirac @ c.dirac
    degrees = c.degrees()
    out = []
    for j in range(c.dimension + 1):
        idx = np.flatnonzero(degrees == j)
        block = laplacian[np.ix_(idx, idx)]
        out.append(int(np.sum(np.linalg.eigvalsh(block) < 0.5)))
    return out


def spectral_gap(c: TorusFourierComplex) -> float:
    """Smallest nonzero singular value of d + d*."""
    sv = scipy.linalg.svdvals(c.dirac)
    return float(np.min(sv[sv > 1e-9]))


def complex_summary(c: TorusFourierComplex) -> Dict[str, Any]:
    betti = betti_numbers(c)
    return {
        "dimension": c.dimension,
        "cutoff": c.cutoff,
        "total_dim": c.total_dim,
        "degree_dims": c.degree_dims,
        "betti": betti,
        "euler": sum((-1) ** j * b for j, b in enumerate(betti)),
        "gap": spectral_gap(c),
    }


def _eigen(matrix: np.ndarray, label: str, merge_tol: float) -> Spectrum:
    try:
        values = scipy.linalg.eig(matrix, right=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise EigensolverError(f"eigensolver failed on {label}: {exc}",
                               invariant="eigensolver-convergence",
                               inputs={"operator": label}) from exc
    return Spectrum.from_values(values, source=SpectrumSource.HODGE, merge_tol=merge_tol, method=label)


def spectrum_Da(c: TorusFourierComplex, a: float, axis_tol: float = AXIS_TOLERANCE,
                pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """d + d* + ia; the prediction is +1 for every a.

    Raises:
        RegimeError: a = 0 or |a| >= 1.
    """
    if a == 0 or abs(a) >= SPECTRAL_GAP:
        raise RegimeError(
            f"a = {a:g} outside 0 < |a| < {SPECTRAL_GAP:g}",
            invariant="coefficient-regime",
            inputs={"a": a, "N": c.dimension, "K": c.cutoff},
        )
    label = f"T^{c.dimension} d+d*+ia a={a:g}"
    spectrum = _eigen(c.dirac + 1j * a * np.eye(c.total_dim), label, pairing_tol)
    betti = betti_numbers(c)
    details = {"betti": betti, "expected_m_plus": sum(betti) if a > 0 else 0}
    return spectral_phase_report(label, spectrum, 1, "galerkin", c.cutoff, axis_tol, pairing_tol, details)


def spectrum_graded(c: TorusFourierComplex, coeffs: GradedCoefficients,
                    axis_tol: float = AXIS_TOLERANCE,
                    pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """d + d* + iA with A = a_j on j-forms; prediction (-1)^{Σ_{a_j>0} β_j}.

    Raises:
        RegimeError: some |a_j| >= 1.
        ValueError: wrong number of coefficients.
    """
    if len(coeffs.values) != c.dimension + 1:
        raise ValueError(f"need {c.dimension + 1} coefficients, got {len(coeffs.values)}")
    coeffs.check_regime()
    return _graded_report(c, coeffs, axis_tol, pairing_tol)


def _graded_report(c: TorusFourierComplex, coeffs: GradedCoefficients,
                   axis_tol: float, pairing_tol: float) -> PhaseReport:
    label = "T^{} d+d*+iA a=({})".format(c.dimension, ",".join(f"{v:g}" for v in coeffs.values))
    weights = np.asarray(coeffs.values)[c.degrees()]
    spectrum = _eigen(c.dirac + 1j * np.diag(weights), label, pairing_tol)
    betti = betti_numbers(c)
    expected = sum(b for b, v in zip(betti, coeffs.values) if v > 0)
    prediction = -1 if expected % 2 else 1
    details = {"betti": betti, "expected_m_plus": expected, "coefficients": list(coeffs.values)}
    return spectral_phase_report(label, spectrum, prediction, "galerkin", c.cutoff, axis_tol, pairing_tol, details)


def gamma_kernel_eigenvalues(c: TorusFourierComplex) -> Dict[str, int]:
    """Multiplicities of +1 and -1 for Γ restricted to ker(d + d*)."""
    idx = c.harmonic_indices()
    values = np.linalg.eigvalsh(c.gamma[np.ix_(idx, idx)])
    return {"plus": int(np.sum(values > 0)), "minus": int(np.sum(values < 0))}


def spectrum_Dgamma(c: TorusFourierComplex, axis_tol: float = AXIS_TOLERANCE,
                    pairing_tol: float = PAIRING_TOLERANCE) -> PhaseReport:
    """d + d* + iΓ; prediction (-1)^{½Σβ_j}."""
    label = f"T^{c.dimension} d+d*+iGamma"
    spectrum = _eigen(c.dirac + 1j * c.gamma, label, pairing_tol)
    betti = betti_numbers(c)
    half = sum(betti) // 2
    details = {"betti": betti, "expected_m_plus": half, "gamma_kernel": gamma_kernel_eigenvalues(c)}
    return spectral_phase_report(label, spectrum, -1 if half % 2 else 1, "galerkin", c.cutoff,
                                 axis_tol, pairing_tol, details)


def exploratory_graded_sweep(c: TorusFourierComplex, scales: Sequence[float],
                             pattern: Sequence[float] | None = None,
                             axis_tol: float = AXIS_TOLERANCE,
                             pairing_tol: float = PAIRING_TOLERANCE) -> List[Dict[str, Any]]:
    """Graded operators with a = scale·pattern, including |a_j| beyond the gap.

    Nothing here is an assertion: every entry has asserted = False and
    failures are recorded rather than raised.
    """
    if pattern is None:
        pattern = [(-1.0) ** j for j in range(c.dimension + 1)]
    rows: List[Dict[str, Any]] = []
    for scale in scales:
        coeffs = GradedCoefficients(tuple(scale * p for p in pattern))
        row: Dict[str, Any] = {"scale": float(scale), "coefficients": list(coeffs.values), "asserted": False}
        if max(abs(v) for v in coeffs.values) >= SPECTRAL_GAP:
            logger.warning("Exploratory graded run at scale %g is outside the gap regime", scale)
        try:
            report = _graded_report(c, coeffs, axis_tol, pairing_tol)
            row.update({
                "m_plus": report.axis_count.m_plus,
                "m_minus": report.axis_count.m_minus,
                "expected_m_plus": report.details["expected_m_plus"],
                "agreement": report.agreement,
            })
        except DetPhaseError as exc:
            row.update({"error": str(exc), "invariant": exc.invariant})
        rows.append(row)
    return rows
