"""Tests for the command implementations in tools/."""

import json
import math
import sys
import unittest
from pathlib import Path

# Add parent directory to path for module imports
_parent_dir = str(Path(__file__).parent.parent)
if _parent_dir not in sys.path:
    sys.path.insert(0, _parent_dir)

from circle_operators import PhaseFunction  # noqa: E402
from errors import EXIT_ASSERTION, EXIT_NUMERICAL, EXIT_USAGE  # noqa: E402
from tests.test_utils import TEST_CUTOFF, TempWorkspace  # noqa: E402
from tools import det_sign, hodge, spectrum, sweep, winding  # noqa: E402

DIRAC = '{"type": "dirac", "winding": 1, "nu": 1, "fourier": [[1, 0, -0.2]], "m_margin": 3}'
DERHAM = '{"type": "derham", "winding": 1, "fourier": [[1, 0, -0.15]], "m_margin": 3}'
SCALAR = '{"type": "scalar", "a": 0.5, "beta": 1}'


class TestSpectrumTool(unittest.TestCase):
    """Tests for spectrum()."""

    def test_dirac_spectrum(self) -> None:
        result = spectrum(DIRAC, TEST_CUTOFF)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(set(result.artifacts), {"spectrum.csv", "spectrum.json"})
        payload = json.loads(result.artifacts["spectrum.json"])
        self.assertTrue(payload["symmetric"])
        self.assertEqual(payload["matrix_size"], 2 * (2 * TEST_CUTOFF + 1))
        self.assertAlmostEqual(payload["trusted_radius"], math.pi * TEST_CUTOFF)

    def test_bad_spec_is_usage_error(self) -> None:
        result = spectrum('{"type": "dirac"', TEST_CUTOFF)
        self.assertEqual(result.status, "error")
        self.assertEqual(result.exit_code, EXIT_USAGE)
        self.assertIn("failure.json", result.artifacts)

    def test_cutoff_below_bandwidth(self) -> None:
        result = spectrum(DIRAC, 1)
        self.assertEqual(result.exit_code, EXIT_NUMERICAL)
        self.assertEqual(result.payload["kind"], "BandwidthError")


class TestDetSignTool(unittest.TestCase):
    """Tests for det_sign()."""

    def test_scalar(self) -> None:
        result = det_sign(SCALAR, 8, 1024)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(result.payload["sign"], -1)
        self.assertAlmostEqual(result.payload["exact_det"], math.exp(-0.5) - 1.0)

    def test_scalar_antiperiodic(self) -> None:
        result = det_sign('{"type": "scalar", "a": 0.5, "beta": 1, "nu": 1}', 8, 1024)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(result.payload["sign"], 1)
        self.assertAlmostEqual(result.payload["exact_det"], math.exp(-0.5) + 1.0)

    def test_dirac(self) -> None:
        result = det_sign(DIRAC, TEST_CUTOFF)
        self.assertTrue(result.success, result.payload)
        # k = 1, nu = 1: -(-1)^{k+nu} = -1
        self.assertEqual(result.payload["report"]["topological_prediction"], -1)
        self.assertEqual(result.payload["sign"], -1)

    def test_derham(self) -> None:
        result = det_sign(DERHAM, TEST_CUTOFF)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(result.payload["sign"], -1)

    def test_mass_below_threshold(self) -> None:
        result = det_sign('{"type": "dirac", "winding": 1, "m": 1}', TEST_CUTOFF)
        self.assertEqual(result.exit_code, EXIT_ASSERTION)
        self.assertEqual(result.payload["invariant"], "invertibility-margin")


class TestWindingTool(unittest.TestCase):
    """Tests for winding()."""

    def test_samples_file(self) -> None:
        with TempWorkspace() as ws:
            values = PhaseFunction.sinusoidal(2.0, -2, 0.3).samples(400)
            path = ws.create_file("phi.txt", "\n".join(f"{v:.17g}" for v in values))
            result = winding(str(path), 2.0)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(result.payload["winding"], -2)
        self.assertEqual(result.payload["samples"], 401)

    def test_from_spec(self) -> None:
        result = winding(spec=DERHAM)
        self.assertEqual(result.payload["winding"], 1)

    def test_needs_exactly_one_source(self) -> None:
        self.assertEqual(winding().exit_code, EXIT_USAGE)
        self.assertEqual(winding("phi.txt", 1.0, DIRAC).exit_code, EXIT_USAGE)

    def test_samples_need_beta(self) -> None:
        with TempWorkspace() as ws:
            path = ws.create_file("phi.txt", "0\n1\n")
            self.assertEqual(winding(str(path)).exit_code, EXIT_USAGE)

    def test_undersampled(self) -> None:
        with TempWorkspace() as ws:
            path = ws.create_file("phi.txt", "0\n4\n8\n")
            result = winding(str(path), 1.0)
        self.assertEqual(result.exit_code, EXIT_NUMERICAL)


class TestSweepTool(unittest.TestCase):
    """Tests for sweep()."""

    def test_dirac_sweep(self) -> None:
        result = sweep(DIRAC, 4, TEST_CUTOFF)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(len(result.payload["trace"]["rows"]), 5)
        self.assertTrue(result.artifacts["sweep.csv"].startswith("a,m_plus"))

    def test_derham_sweep(self) -> None:
        result = sweep(DERHAM, 3, TEST_CUTOFF)
        self.assertTrue(result.success, result.payload)
        self.assertEqual(result.payload["trace"]["parameter_name"], "s")

    def test_scalar_is_rejected(self) -> None:
        self.assertEqual(sweep(SCALAR, 4, TEST_CUTOFF).exit_code, EXIT_USAGE)

    def test_steps_must_be_positive(self) -> None:
        self.assertEqual(sweep(DIRAC, 0, TEST_CUTOFF).exit_code, EXIT_USAGE)


class TestHodgeTool(unittest.TestCase):
    """Tests for hodge()."""

    def test_torus_one(self) -> None:
        result = hodge(1, 1, 0.5, [0.5, -0.5])
        self.assertTrue(result.success, result.payload)
        payload = json.loads(result.artifacts["hodge.json"])
        self.assertEqual(payload["summary"]["betti"], [1, 1])
        self.assertEqual(len(payload["reports"]), 3)

    def test_reports_are_labelled_galerkin(self) -> None:
        result = hodge(1, 1, 0.5, [0.5, -0.5])
        payload = json.loads(result.artifacts["hodge.json"])
        self.assertEqual({r["method"] for r in payload["reports"]}, {"galerkin"})

    def test_exploratory_rows_never_fail(self) -> None:
        result = hodge(1, 1, 0.5, None, [0.5, 2.0])
        self.assertTrue(result.success, result.payload)
        rows = json.loads(result.artifacts["exploratory.json"])["rows"]
        self.assertEqual([row["scale"] for row in rows], [0.5, 2.0])
        self.assertTrue(all(row["asserted"] is False for row in rows))
        self.assertEqual(rows[1]["coefficients"], [2.0, -2.0])
        self.assertTrue(rows[0]["agreement"])

    def test_no_exploratory_artifact_by_default(self) -> None:
        self.assertNotIn("exploratory.json", hodge(1, 1, 0.5).artifacts)

    def test_regime_error(self) -> None:
        result = hodge(1, 1, 1.5)
        self.assertEqual(result.status, "error")
        self.assertEqual(result.exit_code, EXIT_ASSERTION)
        self.assertEqual(result.payload["invariant"], "coefficient-regime")

    def test_bad_dimension_is_usage_error(self) -> None:
        self.assertEqual(hodge(2, 1).exit_code, EXIT_USAGE)


if __name__ == "__main__":
    unittest.main()
