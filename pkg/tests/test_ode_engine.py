"""Tests for ode_engine.py: RK4 monodromy, characteristic function, root finding."""

import cmath
import math
import sys
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
import scipy.linalg

# Add parent directory to path for module imports
_parent_dir = str(Path(__file__).parent.parent)
if _parent_dir not in sys.path:
    sys.path.insert(0, _parent_dir)

from errors import ConvergenceError, IntegrationError  # noqa: E402
import ode_engine  # noqa: E402
from ode_engine import (  # noqa: E402
    MonodromySystem,
    SearchRegion,
    calibrated_scalar_determinant,
    char_value,
    contour_centroid,
    count_roots,
    counted_region,
    find_roots,
    liouville_determinant,
    monodromy,
    monodromy_batch,
    refine_root,
    relative_determinant,
)
from spectral_core import SpectrumSource  # noqa: E402

STEPS = 512


def scalar_system(a: float, beta: float = 1.0, w: int = 0) -> MonodromySystem:
    """ξ' = (a + iλ)ξ, roots 2πn/β + ia for w = 0."""
    return MonodromySystem(
        1,
        lambda t: np.full((t.size, 1, 1), a, dtype=complex),
        lambda t: np.full((t.size, 1, 1), 1j, dtype=complex),
        beta,
        w,
        "scalar",
    )


def constant_system(matrix: np.ndarray, beta: float = 1.0) -> MonodromySystem:
    return MonodromySystem(
        2,
        lambda t: np.broadcast_to(matrix, (t.size, 2, 2)).copy(),
        lambda t: np.broadcast_to(-1j * np.eye(2), (t.size, 2, 2)).copy(),
        beta,
    )


class TestMonodromy(unittest.TestCase):
    """Tests for monodromy() and monodromy_batch()."""

    def test_scalar_monodromy_is_exponential(self) -> None:
        sys_ = scalar_system(0.5, beta=2.0)
        m = monodromy(sys_, 0.3 + 0.1j, STEPS)
        expected = cmath.exp((0.5 + 1j * (0.3 + 0.1j)) * 2.0)
        self.assertAlmostEqual(complex(m[0, 0]), expected, places=10)

    def test_constant_matrix_matches_expm(self) -> None:
        a = np.array([[0.2, -1.0], [1.5, -0.3]], dtype=complex)
        m = monodromy(constant_system(a), 0.0, STEPS)
        np.testing.assert_allclose(m, scipy.linalg.expm(a), atol=1e-10)

    def test_batch_matches_single_evaluations(self) -> None:
        sys_ = scalar_system(0.25)
        lams = [0.0, 1.0 + 0.5j, -2.0 - 0.1j]
        batch = monodromy_batch(sys_, lams, STEPS)
        for lam, m in zip(lams, batch):
            np.testing.assert_allclose(m, monodromy(sys_, lam, STEPS))

    def test_rk4_error_drops_sixteenfold_when_step_halves(self) -> None:
        a = np.array([[0.0, 3.0], [-3.0, 0.5]], dtype=complex)
        exact = scipy.linalg.expm(a)
        coarse = np.linalg.norm(monodromy(constant_system(a), 0.0, 64) - exact)
        fine = np.linalg.norm(monodromy(constant_system(a), 0.0, 128) - exact)
        self.assertGreater(fine, 0.0)
        self.assertGreaterEqual(coarse / fine, 8.0)

    def test_liouville_determinant_matches_monodromy(self) -> None:
        def base(t: np.ndarray) -> np.ndarray:
            out = np.zeros((t.size, 2, 2), dtype=complex)
            out[:, 0, 0] = np.sin(2 * math.pi * t)
            out[:, 0, 1] = 1.0
            out[:, 1, 0] = np.cos(2 * math.pi * t)
            out[:, 1, 1] = 0.5
            return out

        sys_ = MonodromySystem(2, base, lambda t: np.broadcast_to(-1j * np.eye(2), (t.size, 2, 2)).copy(), 1.0)
        lam = 0.3 + 0.2j
        expected = cmath.exp(0.5 - 2j * lam)
        self.assertAlmostEqual(complex(np.linalg.det(monodromy(sys_, lam, 1024))), expected, places=9)
        self.assertAlmostEqual(complex(liouville_determinant(sys_, [lam], 1024)[0]), expected, places=12)

    def test_liouville_determinant_too_few_steps(self) -> None:
        with self.assertRaises(ValueError):
            liouville_determinant(scalar_system(0.5), [0.0], 16)

    def test_too_few_steps(self) -> None:
        with self.assertRaises(ValueError):
            monodromy(scalar_system(0.5), 0.0, 16)

    def test_non_finite_coefficient(self) -> None:
        bad = MonodromySystem(
            1,
            lambda t: np.full((t.size, 1, 1), np.nan, dtype=complex),
            lambda t: np.zeros((t.size, 1, 1), dtype=complex),
            1.0,
        )
        with self.assertRaises(IntegrationError):
            monodromy(bad, 0.0, STEPS)

    def test_from_callable_splits_affine_coefficient(self) -> None:
        sys_ = MonodromySystem.from_callable(1, lambda t, lam: np.array([[0.5 + 1j * lam]]), 1.0)
        np.testing.assert_allclose(sys_.coefficient(0.3, 2.0), [[0.5 + 2j]])

    def test_invalid_dimension(self) -> None:
        with self.assertRaises(ValueError):
            MonodromySystem(3, lambda t: t, lambda t: t, 1.0)


class TestDeterminants(unittest.TestCase):
    """Tests for the determinant helpers."""

    def test_calibrated_scalar_determinant(self) -> None:
        for a, beta in ((0.5, 1.0), (-0.25, 2 * math.pi)):
            det = calibrated_scalar_determinant(scalar_system(a, beta), 1024)
            self.assertAlmostEqual(det, math.exp(-a * beta) - 1.0, places=9)

    def test_calibrated_determinant_antiperiodic(self) -> None:
        det = calibrated_scalar_determinant(scalar_system(0.5, 1.0, w=1), 1024)
        self.assertAlmostEqual(det, math.exp(-0.5) + 1.0, places=9)
        self.assertGreater(det.real, 0.0)

    def test_calibrated_determinant_needs_scalar(self) -> None:
        with self.assertRaises(ValueError):
            calibrated_scalar_determinant(constant_system(np.eye(2, dtype=complex)), STEPS)

    def test_relative_determinant(self) -> None:
        self.assertAlmostEqual(relative_determinant(scalar_system(0.5), STEPS), 1.0 - math.exp(0.5), places=10)


class TestRootFinding(unittest.TestCase):
    """Tests for the argument principle and Newton refinement."""

    def test_char_value_vanishes_on_spectrum(self) -> None:
        sys_ = scalar_system(0.5)
        self.assertLess(abs(char_value(sys_, 2 * math.pi + 0.5j, 1024)), 1e-8)
        self.assertGreater(abs(char_value(sys_, math.pi + 0.5j, 1024)), 1.0)

    def test_count_single_root(self) -> None:
        region = SearchRegion(-1.0, 1.0, 0.0, 1.0, density=64)
        self.assertEqual(count_roots(scalar_system(0.5), region, STEPS), 1)

    def test_count_three_roots(self) -> None:
        region = SearchRegion(-7.0, 7.0, 0.0, 1.0, density=64)
        self.assertEqual(count_roots(scalar_system(0.5), region, STEPS), 3)

    def test_count_empty_region(self) -> None:
        region = SearchRegion(1.0, 5.0, 0.0, 1.0, density=64)
        self.assertEqual(count_roots(scalar_system(0.5), region, STEPS), 0)

    def test_char_value_with_strongly_decaying_multiplier(self) -> None:
        m = 20.0
        sys_ = constant_system(np.array([[0.0, -m], [-m, 0.0]], dtype=complex))
        lam = 0.05 - 19.9j
        exact = (cmath.exp(-1j * lam + m) - 1.0) * (cmath.exp(-1j * lam - m) - 1.0)
        self.assertAlmostEqual(char_value(sys_, lam, 1024), exact, places=8)
        self.assertAlmostEqual(refine_root(sys_, lam, steps=1024), -20j, places=8)

    def test_centroid_locates_single_root(self) -> None:
        region = SearchRegion(-1.0, 1.0, 0.0, 1.0, density=64)
        centroid = contour_centroid(scalar_system(0.5), region, 1, STEPS)
        self.assertLess(abs(centroid - 0.5j), 1e-2)

    def test_centroid_needs_positive_count(self) -> None:
        with self.assertRaises(ValueError):
            contour_centroid(scalar_system(0.5), SearchRegion(-1.0, 1.0, 0.0, 1.0), 0, STEPS)

    def test_counted_region_moves_off_a_root(self) -> None:
        # the top edge samples 0.5i, a root, exactly
        region = SearchRegion(-1.0, 1.0, -0.5, 0.5, density=64)
        count, counted = counted_region(scalar_system(0.5), region, STEPS)
        self.assertNotEqual(counted, region)
        self.assertEqual(count, 1)
        self.assertTrue(counted.contains(0.5j))
        self.assertEqual(count_roots(scalar_system(0.5), region, STEPS), count)

    def test_find_roots_after_contour_collision(self) -> None:
        region = SearchRegion(-1.0, 1.0, -0.5, 0.5, density=64)
        found = find_roots(scalar_system(0.5), region, 1024)
        np.testing.assert_allclose(found.values(), [0.5j], atol=1e-8)

    def test_find_roots_raises_when_newton_fails(self) -> None:
        failure = ConvergenceError("no convergence", invariant="newton-convergence")
        region = SearchRegion(-1.0, 1.0, 0.0, 1.0, density=64)
        with patch.object(ode_engine, "refine_root", side_effect=failure):
            with self.assertRaises(ConvergenceError) as ctx:
                find_roots(scalar_system(0.5), region, STEPS, min_size=10.0)
        self.assertEqual(ctx.exception.invariant, "newton-convergence")
        self.assertIn("region", ctx.exception.inputs)

    def test_refine_root(self) -> None:
        root = refine_root(scalar_system(0.5), 0.1 + 0.4j, steps=1024)
        self.assertAlmostEqual(root, 0.5j, places=8)

    def test_refine_root_far_seed_fails(self) -> None:
        with self.assertRaises(ConvergenceError):
            refine_root(scalar_system(0.5), 3.0 + 0.4j, steps=STEPS, max_iterations=2, max_distance=0.01)

    def test_find_roots(self) -> None:
        region = SearchRegion(-7.0, 7.0, 0.0, 1.0, density=64)
        found = find_roots(scalar_system(0.5), region, 1024)
        self.assertEqual(found.source, SpectrumSource.MONODROMY)
        expected = [2 * math.pi * n + 0.5j for n in (-1, 0, 1)]
        np.testing.assert_allclose(np.sort_complex(found.values()), np.sort_complex(expected), atol=1e-7)


class TestSearchRegion(unittest.TestCase):
    """Tests for SearchRegion geometry."""

    def test_degenerate_rectangle(self) -> None:
        with self.assertRaises(ValueError):
            SearchRegion(1.0, 1.0, 0.0, 1.0)

    def test_contour_is_closed(self) -> None:
        pts = SearchRegion(0.0, 1.0, 0.0, 2.0, density=4).contour()
        self.assertEqual(pts[0], pts[-1])
        self.assertEqual(pts[0], 0j)

    def test_shifted(self) -> None:
        region = SearchRegion(0.0, 1.0, 0.0, 1.0).shifted(0.5 + 0.25j)
        self.assertEqual(region.center, 1.0 + 0.75j)


if __name__ == "__main__":
    unittest.main()
