"""Monodromy matrices and argument-principle root finding.

A MonodromySystem describes ξ' = A(t, λ) ξ on [0, β] with boundary condition
ξ(β) = e^{iπw} ξ(0). The coefficient is affine in λ, A(t, λ) = P(t) + λ Q(t),
which lets one fixed-step RK4 sweep propagate a whole batch of λ values.

λ belongs to the spectrum of the boundary-value problem iff
det(M(λ) - e^{iπw} I) = 0, where M(λ) is the monodromy matrix.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config import CONTOUR_DENSITY, NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE, RK4_STEPS
from errors import ContourCollisionError, ConvergenceError, IntegrationError
from spectral_core import Spectrum, SpectrumSource

logger = logging.getLogger("detphase.ode_engine")

MIN_STEPS = 64

# Largest phase change allowed between neighbouring contour samples
_MAX_PHASE_STEP = 0.5 * math.pi

# Midpoint-insertion rounds before a contour is rejected
_MAX_REFINE_ROUNDS = 14

# Irrational fractions used to place subdivision cuts away from roots
_SPLIT_FRACTIONS = (0.5, 0.5 + 0.0372 * (math.sqrt(5) - 1), 0.5 - 0.0419 * (math.sqrt(3) - 1))

CoefficientFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MonodromySystem:
    """First-order periodic system ξ' = (P(t) + λ Q(t)) ξ.

    Attributes:
        dimension: 1 or 2.
        base: Vectorised t ↦ P(t), returning shape (len(t), d, d).
        slope: Vectorised t ↦ Q(t), returning shape (len(t), d, d).
        beta: Period length (> 0).
        boundary_phase: w in ξ(β) = e^{iπw} ξ(0).
        label: Short description for logs and reports.
    """

    dimension: int
    base: CoefficientFn
    slope: CoefficientFn
    beta: float
    boundary_phase: float = 0.0
    label: str = ""
    _nodes: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @classmethod
    def from_callable(
        cls,
        dimension: int,
        coefficient: Callable[[float, complex], np.ndarray],
        beta: float,
        boundary_phase: float = 0.0,
        label: str = "",
    ) -> "MonodromySystem":
        """Wrap a scalar coefficient(t, λ) that is affine in λ."""

        def base(t: np.ndarray) -> np.ndarray:
            return np.stack([np.atleast_2d(coefficient(float(s), 0.0)) for s in t]).astype(complex)

        def slope(t: np.ndarray) -> np.ndarray:
            return np.stack([
                np.atleast_2d(coefficient(float(s), 1.0)) - np.atleast_2d(coefficient(float(s), 0.0))
                for s in t
            ]).astype(complex)

        return cls(dimension, base, slope, beta, boundary_phase, label)

    @property
    def boundary_factor(self) -> complex:
        return cmath.exp(1j * math.pi * self.boundary_phase)

    def coefficient(self, t: float, lam: complex) -> np.ndarray:
        """A(t, λ) as a d×d matrix."""
        ts = np.array([t], dtype=float)
        return self.base(ts)[0] + complex(lam) * self.slope(ts)[0]

    def nodes(self, steps: int) -> Tuple[np.ndarray, np.ndarray]:
        """P and Q sampled at the 2·steps + 1 RK4 nodes (cached per step count)."""
        cached = self._nodes.get(steps)
        if cached is not None:
            return cached
        t = np.linspace(0.0, self.beta, 2 * steps + 1)
        p = np.asarray(self.base(t), dtype=complex).reshape(len(t), self.dimension, self.dimension)
        q = np.asarray(self.slope(t), dtype=complex).reshape(len(t), self.dimension, self.dimension)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise IntegrationError(
                "coefficient is not finite on [0, beta]",
                invariant="finite-coefficient",
                inputs={"system": self.label, "steps": steps},
            )
        self._nodes[steps] = (p, q)
        return p, q


@dataclass(frozen=True)
class SearchRegion:
    """Axis-aligned rectangle in the λ-plane for root counting.

    Attributes:
        re_min, re_max, im_min, im_max: Rectangle bounds.
        density: Contour samples per unit length.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    density: int = CONTOUR_DENSITY

    def __post_init__(self) -> None:
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate rectangle {self}")
        if self.density <= 0:
            raise ValueError("density must be positive")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.re_min - margin <= z.real <= self.re_max + margin
                and self.im_min - margin <= z.imag <= self.im_max + margin)

    def shifted(self, dz: complex) -> "SearchRegion":
        return SearchRegion(self.re_min + dz.real, self.re_max + dz.real,
                            self.im_min + dz.imag, self.im_max + dz.imag, self.density)

    def contour(self) -> np.ndarray:
        """Counter-clockwise boundary samples, closed (last == first)."""
        corners = [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]
        pieces: List[np.ndarray] = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            n = max(8, int(math.ceil(abs(b - a) * self.density)))
            pieces.append(a + (b - a) * np.arange(n) / n)
        pts = np.concatenate(pieces)
        return np.append(pts, pts[0])


def monodromy_batch(sys: MonodromySystem, lams: Sequence[complex], steps: int = RK4_STEPS) -> np.ndarray:
    """Monodromy matrices M(λ) for a batch of λ via fixed-step RK4.

    Returns:
        Array of shape (len(lams), d, d).
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be >= {MIN_STEPS}, got {steps}")
    lam = np.asarray(lams, dtype=complex).reshape(-1)
    p, q = sys.nodes(steps)
    d = sys.dimension
    h = sys.beta / steps
    lam_b = lam[:, None, None]

    y = np.broadcast_to(np.eye(d, dtype=complex), (len(lam), d, d)).copy()
    a_next = p[0][None] + lam_b * q[0][None]
    for n in range(steps):
        a0 = a_next
        ah = p[2 * n + 1][None] + lam_b * q[2 * n + 1][None]
        a_next = p[2 * n + 2][None] + lam_b * q[2 * n + 2][None]
        k1 = a0 @ y
        k2 = ah @ (y + (0.5 * h) * k1)
        k3 = ah @ (y + (0.5 * h) * k2)
        k4 = a_next @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(y)):
        raise IntegrationError(
            "monodromy overflowed",
            invariant="finite-monodromy",
            inputs={"system": sys.label, "steps": steps},
        )
    return y


def monodromy(sys: MonodromySystem, lam: complex, steps: int = RK4_STEPS) -> np.ndarray:
    """M(λ): value at t = β of the fundamental solution with M = I at t = 0.

    Classical 4th-order Runge-Kutta with `steps` fixed steps; error O(steps^-4).
    """
    return monodromy_batch(sys, [lam], steps)[0]


def liouville_determinant(sys: MonodromySystem, lams: Sequence[complex], steps: int = RK4_STEPS) -> np.ndarray:
    """det M(λ) = exp(∫₀^β tr A(t, λ) dt), by composite Simpson on the RK4 nodes."""
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be >= {MIN_STEPS}, got {steps}")
    lam = np.asarray(lams, dtype=complex).reshape(-1)
    p, q = sys.nodes(steps)
    weights = np.ones(2 * steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= sys.beta / (6.0 * steps)
    tr_p = complex(np.dot(weights, np.trace(p, axis1=1, axis2=2)))
    tr_q = complex(np.dot(weights, np.trace(q, axis1=1, axis2=2)))
    return np.exp(tr_p + lam * tr_q)


def char_values(sys: MonodromySystem, lams: Sequence[complex], steps: int = RK4_STEPS) -> np.ndarray:
    """det(M(λ) - e^{iπw} I) for a batch of λ.

    For 2×2 systems this is det M - c·tr M + c² with c = e^{iπw} and det M
    from liouville_determinant. The entrywise determinant of M does not
    resolve the decaying Floquet multiplier at large |Im λ|.
    """
    m = monodromy_batch(sys, lams, steps)
    c = sys.boundary_factor
    if sys.dimension == 1:
        return m[:, 0, 0] - c
    trace = m[:, 0, 0] + m[:, 1, 1]
    return liouville_determinant(sys, lams, steps) - c * trace + c * c


def char_value(sys: MonodromySystem, lam: complex, steps: int = RK4_STEPS) -> complex:
    """Characteristic function det(M(λ) - e^{iπw} I); its zeros are the eigenvalues."""
    return complex(char_values(sys, [lam], steps)[0])


def relative_determinant(sys: MonodromySystem, steps: int = RK4_STEPS) -> complex:
    """det(e^{iπw} I - M(0)).

    Only meaningful up to a normalisation that is not fixed for 2×2 systems;
    never used for magnitude claims there.
    """
    m = monodromy(sys, 0.0, steps)
    return complex(np.linalg.det(sys.boundary_factor * np.eye(sys.dimension) - m))


def calibrated_scalar_determinant(sys: MonodromySystem, steps: int = RK4_STEPS) -> complex:
    """(1 - e^{-iπw} M(0)) / M(0) for a scalar system.

    For -i d/dt + ia on a circle of length β this is e^{-aβ} - (-1)^w:
    e^{-aβ} - 1 in the periodic case and e^{-aβ} + 1 > 0 in the
    antiperiodic case, where no eigenvalue lies on the imaginary axis.
    """
    if sys.dimension != 1:
        raise ValueError("calibrated determinant is only defined for scalar systems")
    m0 = complex(monodromy(sys, 0.0, steps)[0, 0])
    return (1.0 - sys.boundary_factor.conjugate() * m0) / m0


def _winding(values: np.ndarray) -> Tuple[float, np.ndarray]:
    steps = np.angle(values[1:] / values[:-1])
    return float(np.sum(steps)), steps


def _collision(region: SearchRegion, invariant: str, message: str) -> ContourCollisionError:
    return ContourCollisionError(
        message,
        invariant=invariant,
        inputs={"region": [region.re_min, region.re_max, region.im_min, region.im_max]},
    )


def _trace_contour(sys: MonodromySystem, region: SearchRegion, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary samples and char values, refined until every phase step is below π/2."""
    pts = region.contour()
    vals = char_values(sys, pts, steps)

    scale = float(np.median(np.abs(vals)))
    threshold = 1e-8 * (1.0 + scale)
    if float(np.min(np.abs(vals))) <= threshold:
        raise _collision(region, "contour-clear", "characteristic function nearly vanishes on the contour")

    for round_no in range(_MAX_REFINE_ROUNDS):
        _, increments = _winding(vals)
        bad = np.nonzero(np.abs(increments) > _MAX_PHASE_STEP)[0]
        if bad.size == 0:
            return pts, vals
        logger.debug("Refining %d contour segments (round %d)", bad.size, round_no + 1)
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mid_vals = char_values(sys, mids, steps)
        if float(np.min(np.abs(mid_vals))) <= threshold:
            raise _collision(region, "contour-clear", "characteristic function nearly vanishes on the contour")
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mid_vals)

    raise _collision(region, "contour-sampling", "phase increments stay above π/2 after refinement")


def _count_on_contour(sys: MonodromySystem, region: SearchRegion, steps: int) -> int:
    _, vals = _trace_contour(sys, region, steps)
    return int(round(_winding(vals)[0] / (2.0 * math.pi)))


def contour_centroid(sys: MonodromySystem, region: SearchRegion, count: int,
                     steps: int = RK4_STEPS) -> complex:
    """Mean of the `count` roots inside the rectangle, (1/2πi)∮ z f'/f dz / count.

    Each segment contributes its midpoint times the increment of log f.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    pts, vals = _trace_contour(sys, region, steps)
    ratio = vals[1:] / vals[:-1]
    dlog = np.log(np.abs(ratio)) + 1j * np.angle(ratio)
    mids = 0.5 * (pts[1:] + pts[:-1])
    return complex(np.sum(mids * dlog) / (2j * math.pi * count))


def counted_region(sys: MonodromySystem, region: SearchRegion,
                   steps: int = RK4_STEPS) -> Tuple[int, SearchRegion]:
    """Root count together with the rectangle it was taken on.

    When the contour passes too close to a root the rectangle is shifted
    once by a small irrational offset; the shifted rectangle is returned.

    Raises:
        ContourCollisionError: the contour cannot be kept away from roots.
    """
    try:
        return _count_on_contour(sys, region, steps), region
    except ContourCollisionError:
        size = min(region.width, region.height)
        offset = complex(math.sqrt(2) - 1, math.sqrt(3) - 1) * 1e-3 * size
        logger.warning("Contour collision on %s, retrying with offset %s", region, offset)
        moved = region.shifted(offset)
        return _count_on_contour(sys, moved, steps), moved


def count_roots(sys: MonodromySystem, region: SearchRegion, steps: int = RK4_STEPS) -> int:
    """Number of eigenvalues inside the rectangle, with multiplicity.

    Winding number of char_value along the boundary; see counted_region
    for the collision retry.
    """
    return counted_region(sys, region, steps)[0]


def refine_root(
    sys: MonodromySystem,
    seed: complex,
    tol: float = NEWTON_TOLERANCE,
    steps: int = RK4_STEPS,
    max_iterations: int = NEWTON_MAX_ITERATIONS,
    max_distance: float | None = None,
) -> complex:
    """Newton refinement of a simple root of char_value.

    The derivative is a central difference with step 1e-6·(1 + |λ|).
    Iteration stops when the Newton step is below tol·(1 + |λ|).

    Raises:
        ConvergenceError: no convergence within max_iterations, a non-finite
            iterate, or an iterate farther than max_distance from the seed
            (default 10·(1 + |seed|)).
    """
    seed = complex(seed)
    lam = seed
    limit = 10.0 * (1.0 + abs(seed)) if max_distance is None else max_distance
    for iteration in range(max_iterations):
        h = 1e-6 * (1.0 + abs(lam))
        f0, fp, fm = char_values(sys, [lam, lam + h, lam - h], steps)
        deriv = (fp - fm) / (2.0 * h)
        if f0 == 0:
            return lam
        if deriv == 0 or not np.isfinite(deriv):
            break
        delta = -f0 / deriv
        lam = lam + complex(delta)
        if not cmath.isfinite(lam) or abs(lam - seed) > limit:
            break
        if abs(delta) <= tol * (1.0 + abs(lam)):
            logger.debug("Newton converged to %s in %d iterations", lam, iteration + 1)
            return lam
    raise ConvergenceError(
        f"Newton refinement from {seed} did not converge",
        invariant="newton-convergence",
        inputs={"seed": [seed.real, seed.imag], "system": sys.label},
    )


def _split(region: SearchRegion) -> List[List[SearchRegion]]:
    """Candidate quadrisections, one per split fraction."""
    out = []
    for frac in _SPLIT_FRACTIONS:
        xm = region.re_min + frac * region.width
        ym = region.im_min + frac * region.height
        out.append([
            SearchRegion(region.re_min, xm, region.im_min, ym, region.density),
            SearchRegion(xm, region.re_max, region.im_min, ym, region.density),
            SearchRegion(region.re_min, xm, ym, region.im_max, region.density),
            SearchRegion(xm, region.re_max, ym, region.im_max, region.density),
        ])
    return out


def _seeds(sys: MonodromySystem, box: SearchRegion, steps: int) -> List[complex]:
    """Newton starting points for a box holding one root: centroid, centre, quarter points."""
    seeds: List[complex] = []
    try:
        seeds.append(contour_centroid(sys, box, 1, steps))
    except ContourCollisionError:
        pass
    seeds.append(box.center)
    for fx in (0.25, 0.75):
        for fy in (0.25, 0.75):
            seeds.append(complex(box.re_min + fx * box.width, box.im_min + fy * box.height))
    return seeds


def find_roots(
    sys: MonodromySystem,
    region: SearchRegion,
    steps: int = RK4_STEPS,
    count_steps: int | None = None,
    tol: float = NEWTON_TOLERANCE,
    min_size: float = 1e-3,
) -> Spectrum:
    """All eigenvalues in the rectangle by quadrisection plus Newton.

    A box holding a single root is refined by Newton from its contour
    centroid, then its centre and quarter points. Boxes holding several
    roots that survive down to min_size are reported once at the contour
    centroid with the counted multiplicity.

    Args:
        count_steps: RK4 steps for the counting contours (default min(steps, 1024)).

    Raises:
        ConvergenceError: a single-root box shrank to min_size without a
            Newton iterate converging inside it.
        ContourCollisionError: no consistent subdivision was found.
    """
    c_steps = min(steps, 1024) if count_steps is None else count_steps
    roots: List[complex] = []
    mults: List[int] = []

    def single(box: SearchRegion) -> complex | None:
        for seed in _seeds(sys, box, c_steps):
            try:
                root = refine_root(sys, seed, tol, steps,
                                   max_distance=2.0 * abs(complex(box.width, box.height)))
            except ConvergenceError:
                continue
            if box.contains(root, margin=1e-6 * (1.0 + abs(root))):
                return root
        return None

    def visit(box: SearchRegion, count: int) -> None:
        if count == 0:
            return
        if count == 1:
            root = single(box)
            if root is not None:
                roots.append(root)
                mults.append(1)
                return
        if max(box.width, box.height) <= min_size:
            if count == 1:
                raise ConvergenceError(
                    f"Newton refinement failed for the root near {box.center}",
                    invariant="newton-convergence",
                    inputs={"region": [box.re_min, box.re_max, box.im_min, box.im_max],
                            "system": sys.label},
                )
            center = contour_centroid(sys, box, count, c_steps)
            logger.warning("Unresolved cluster of %d roots near %s", count, center)
            roots.append(center)
            mults.append(count)
            return
        for children in _split(box):
            try:
                counts = [_count_on_contour(sys, child, c_steps) for child in children]
            except ContourCollisionError:
                continue
            if sum(counts) == count:
                for child, n in zip(children, counts):
                    visit(child, n)
                return
        raise ContourCollisionError(
            "could not subdivide region consistently",
            invariant="subdivision",
            inputs={"region": [box.re_min, box.re_max, box.im_min, box.im_max], "count": count},
        )

    total, region = counted_region(sys, region, c_steps)
    logger.debug("Region %s holds %d roots", region, total)
    visit(region, total)
    return Spectrum.from_values(roots, mults, source=SpectrumSource.MONODROMY,
                                truncation=steps, method=sys.label)
