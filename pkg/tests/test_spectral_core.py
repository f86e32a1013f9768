"""Tests for spectral_core.py.

Covers logarithm branches, reflection symmetry, the imaginary-axis census,
finite ζ-determinants and the naive-product comparison.
"""

import cmath
import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add parent directory to path for module imports
_parent_dir = str(Path(__file__).parent.parent)
if _parent_dir not in sys.path:
    sys.path.insert(0, _parent_dir)

from errors import (  # noqa: E402
    CutCollisionError,
    DomainLogError,
    InvertibilityError,
    PreconditionError,
    SpecParseError,
)
from spectral_core import (  # noqa: E402
    AgmonAngle,
    Spectrum,
    angle_shift,
    choose_agmon_angle,
    count_imaginary_axis,
    expected_naive_phase,
    finite_zeta,
    finite_zeta_det,
    finite_zeta_prime_at_zero,
    is_symmetric_spectrum,
    log_branch,
    naive_vs_theorem,
    predicted_sign,
)


class TestLogBranch(unittest.TestCase):
    """Tests for log_branch()."""

    def test_real_on_positive_axis(self) -> None:
        self.assertAlmostEqual(log_branch(1.0, math.pi), 0j)
        self.assertAlmostEqual(log_branch(math.e, 3.0), 1 + 0j)

    def test_argument_lies_below_theta(self) -> None:
        """With the cut at π/2, -1 gets argument -π."""
        value = log_branch(-1.0, math.pi / 2)
        self.assertAlmostEqual(value.real, 0.0)
        self.assertAlmostEqual(value.imag, -math.pi)

    def test_exponential_recovers_input(self) -> None:
        for lam in (2 + 3j, -1 - 0.5j, 0.1j, -4 + 0j):
            self.assertAlmostEqual(cmath.exp(log_branch(lam, 3 * math.pi / 4 + 0.1)), lam)

    def test_random_inputs_land_in_branch_strip(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(200):
            lam = complex(rng.normal(), rng.normal()) * math.exp(rng.uniform(-3.0, 3.0))
            theta = rng.uniform(-2 * math.pi, 2 * math.pi)
            value = log_branch(lam, theta)
            self.assertGreater(value.imag, theta - 2 * math.pi)
            self.assertLess(value.imag, theta)
            self.assertAlmostEqual(value.real, math.log(abs(lam)))
            self.assertLess(abs(cmath.exp(value) - lam), 1e-12 * (1.0 + abs(lam)))

    def test_zero_raises(self) -> None:
        with self.assertRaises(DomainLogError):
            log_branch(0, math.pi)

    def test_value_on_cut_raises(self) -> None:
        with self.assertRaises(CutCollisionError):
            log_branch(1j, math.pi / 2)


class TestSpectrum(unittest.TestCase):
    """Tests for the Spectrum container."""

    def test_near_duplicates_merge_with_multiplicity(self) -> None:
        s = Spectrum.from_values([2j, 2j + 1e-12, -1 + 1j])
        self.assertEqual(len(s), 2)
        self.assertEqual(s.total_multiplicity, 3)

    def test_canonical_order_is_im_then_re(self) -> None:
        s = Spectrum.from_values([1 + 2j, -1 + 2j, 3 - 1j])
        self.assertEqual([e.value for e in s.eigenvalues], [3 - 1j, -1 + 2j, 1 + 2j])

    def test_within_and_smallest(self) -> None:
        s = Spectrum.from_values([0.5j, 3 + 0j, -3 + 0j, 10j])
        self.assertEqual(s.within(4.0).total_multiplicity, 3)
        np.testing.assert_allclose(s.smallest(1), [0.5j])

    def test_mirrored_reflects_in_imaginary_axis(self) -> None:
        s = Spectrum.from_values([1 + 2j])
        self.assertEqual(s.mirrored().eigenvalues[0].value, -1 + 2j)

    def test_records_round_trip(self) -> None:
        s = Spectrum.from_values([1 + 1j, -1 + 1j, 2j], [1, 1, 3])
        again = Spectrum.from_records(s.to_records())
        self.assertEqual(again.to_records(), s.to_records())

    def test_bad_record_reports_line(self) -> None:
        with self.assertRaises(SpecParseError) as ctx:
            Spectrum.from_records([{"re": 1.0, "im": 0.0}, {"re": 1.0}])
        self.assertEqual(ctx.exception.line, 2)

    def test_empty_spectrum(self) -> None:
        s = Spectrum.from_values([])
        self.assertEqual(s.scale, 0.0)
        self.assertTrue(is_symmetric_spectrum(s))
        self.assertEqual(predicted_sign(s), 1)


class TestSymmetryAndCensus(unittest.TestCase):
    """Tests for is_symmetric_spectrum() and count_imaginary_axis()."""

    def test_symmetric_pairs(self) -> None:
        self.assertTrue(is_symmetric_spectrum(Spectrum.from_values([1 + 1j, -1 + 1j, 3j])))

    def test_unpaired_value(self) -> None:
        self.assertFalse(is_symmetric_spectrum(Spectrum.from_values([1 + 1j])))

    def test_multiplicity_mismatch_is_asymmetric(self) -> None:
        s = Spectrum.from_values([1 + 1j, -1 + 1j], [2, 1])
        self.assertFalse(is_symmetric_spectrum(s))

    def test_census_counts_multiplicities(self) -> None:
        s = Spectrum.from_values([2j, -3j, 1 + 1j, -1 + 1j], [2, 1, 1, 1])
        count = count_imaginary_axis(s, 1e-6)
        self.assertEqual((count.m_plus, count.m_minus), (2, 1))
        self.assertEqual(count.parity, 0)

    def test_census_tolerance_scales_with_modulus(self) -> None:
        s = Spectrum.from_values([1e-4 + 100j, -1e-4 + 100j])
        self.assertEqual(count_imaginary_axis(s, 1e-5).m_plus, 2)
        self.assertEqual(count_imaginary_axis(s, 1e-7).m_plus, 0)

    def test_origin_is_not_invertible(self) -> None:
        with self.assertRaises(InvertibilityError):
            count_imaginary_axis(Spectrum.from_values([0j, 1j, -1j]))

    def test_predicted_sign(self) -> None:
        self.assertEqual(predicted_sign(Spectrum.from_values([1j, -1j])), -1)
        self.assertEqual(predicted_sign(Spectrum.from_values([1j, 2j])), 1)

    def test_symmetry_survives_positive_scaling(self) -> None:
        for values in ([1 + 1j, -1 + 1j, 3j], [1 + 1j, 2j], [0.5 - 2j, -0.5 - 2j, 7 + 0.1j, -7 + 0.1j]):
            s = Spectrum.from_values(values)
            scaled = Spectrum.from_values([3.7 * v for v in values])
            self.assertEqual(is_symmetric_spectrum(scaled), is_symmetric_spectrum(s))

    def test_predicted_sign_ignores_mirror_pairs(self) -> None:
        base = [3j, 1 + 2j, -1 + 2j, -4j]
        sign = predicted_sign(Spectrum.from_values(base))
        self.assertEqual(sign, -1)
        self.assertEqual(predicted_sign(Spectrum.from_values(base + [2.5 + 0.5j, -2.5 + 0.5j])), sign)
        self.assertEqual(predicted_sign(Spectrum.from_values(base + [0.3 - 5j, -0.3 - 5j])), sign)
        self.assertEqual(predicted_sign(Spectrum.from_values([3j, -4j])), sign)

    def test_predicted_sign_requires_symmetry(self) -> None:
        with self.assertRaises(PreconditionError):
            predicted_sign(Spectrum.from_values([1 + 1j, 2j]))


class TestFiniteZeta(unittest.TestCase):
    """Tests for the finite ζ-function and determinant."""

    def setUp(self) -> None:
        self.spectrum = Spectrum.from_values([1 + 1j, -1 + 1j, 2j])
        self.angle = AgmonAngle(3.0)

    def test_zeta_at_zero_is_total_multiplicity(self) -> None:
        self.assertAlmostEqual(finite_zeta(self.spectrum, self.angle, 0), 3 + 0j)

    def test_zeta_at_minus_one_is_trace(self) -> None:
        self.assertAlmostEqual(finite_zeta(self.spectrum, self.angle, -1), 4j)

    def test_determinant_is_plain_product(self) -> None:
        self.assertAlmostEqual(finite_zeta_det(self.spectrum, self.angle), -4j)

    def test_prime_at_zero_sums_logs(self) -> None:
        expected = -sum(log_branch(z, 3.0) for z in (1 + 1j, -1 + 1j, 2j))
        self.assertAlmostEqual(finite_zeta_prime_at_zero(self.spectrum, self.angle), expected)

    def test_angle_shift_counts_crossed_rays(self) -> None:
        """Only -1+i (argument 3π/4) lies between the rays at 1.0 and 3.0."""
        s = Spectrum.from_values([1 + 1j, -1 + 1j])
        self.assertAlmostEqual(angle_shift(s, 1.0, 3.0), 2j * math.pi)

    def test_angle_shift_needs_ordered_angles(self) -> None:
        with self.assertRaises(ValueError):
            angle_shift(self.spectrum, 3.0, 1.0)

    def test_determinant_independent_of_angle_in_window(self) -> None:
        window = choose_agmon_angle(self.spectrum).window
        dets = [finite_zeta_det(self.spectrum, AgmonAngle(t)) for t in np.linspace(*window, 4)]
        for det in dets:
            self.assertAlmostEqual(det, dets[0])


class TestAgmonAngle(unittest.TestCase):
    """Tests for AgmonAngle and choose_agmon_angle()."""

    def test_choose_middle_of_free_gap(self) -> None:
        angle = choose_agmon_angle(Spectrum.from_values([1j, -1j]))
        self.assertAlmostEqual(angle.theta, 3 * math.pi / 4)
        self.assertAlmostEqual(angle.window[0], 3 * math.pi / 4 - math.pi / 8)
        self.assertAlmostEqual(angle.window[1], 3 * math.pi / 4 + math.pi / 8)

    def test_choose_avoids_eigenvalue_arguments(self) -> None:
        s = Spectrum.from_values([cmath.rect(1.0, 2.0), cmath.rect(1.0, 2.2)])
        angle = choose_agmon_angle(s)
        angle.validate(s)
        self.assertFalse(2.0 <= angle.theta <= 2.2)

    def test_theta_must_lie_in_open_circle(self) -> None:
        with self.assertRaises(ValueError):
            AgmonAngle(0.0)

    def test_window_collision(self) -> None:
        with self.assertRaises(CutCollisionError):
            AgmonAngle.around(math.pi / 2, 0.1).validate(Spectrum.from_values([1j]))


class TestNaiveProduct(unittest.TestCase):
    """Tests for naive_vs_theorem()."""

    def test_pair_on_axis_disagrees(self) -> None:
        s = Spectrum.from_values([1j, -1j])
        result = naive_vs_theorem(s, choose_agmon_angle(s))
        self.assertAlmostEqual(result.finite_det, 1 + 0j)
        self.assertEqual(result.theorem_sign, -1)
        self.assertTrue(result.discrepant)
        self.assertAlmostEqual(result.naive_phase, 1 + 0j)

    def test_off_axis_pair_agrees(self) -> None:
        s = Spectrum.from_values([1 + 1j, -1 + 1j])
        result = naive_vs_theorem(s, choose_agmon_angle(s))
        self.assertEqual(result.theorem_sign, 1)
        self.assertAlmostEqual(result.finite_det, -2 + 0j)
        # (1+i)(-1+i) = -2: the phase is -1 although the sign theorem says +1
        self.assertTrue(result.discrepant)

    def test_expected_phase(self) -> None:
        count = count_imaginary_axis(Spectrum.from_values([1j, 2j, -1j]))
        self.assertAlmostEqual(expected_naive_phase(count), 1j)


if __name__ == "__main__":
    unittest.main()
