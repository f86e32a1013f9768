"""Tests for server.py MCP tool wrappers."""

import json
import sys
import unittest
from pathlib import Path
from unittest.mock import patch

# Add parent directory to path for module imports
_parent_dir = str(Path(__file__).parent.parent)
if _parent_dir not in sys.path:
    sys.path.insert(0, _parent_dir)

from reporting import CommandResult  # noqa: E402
from tests.test_utils import run_async  # noqa: E402


class TestArgumentNormalization(unittest.TestCase):
    """Tests for _coerce_optional_int()."""

    def test_blank_strings_are_treated_as_none(self) -> None:
        import server

        self.assertIsNone(server._coerce_optional_int("cutoff", ""))
        self.assertIsNone(server._coerce_optional_int("cutoff", "   "))
        self.assertIsNone(server._coerce_optional_int("cutoff", None))

    def test_numeric_strings_are_parsed(self) -> None:
        import server

        self.assertEqual(server._coerce_optional_int("cutoff", " 16 "), 16)
        self.assertEqual(server._coerce_optional_int("cutoff", 8), 8)

    def test_garbage_raises(self) -> None:
        import server

        with self.assertRaises(ValueError):
            server._coerce_optional_int("steps", "many")

    def test_spectrum_passes_coerced_cutoff(self) -> None:
        import server

        with patch.object(server, "spectrum_impl", return_value=CommandResult.ok({"n": 1})) as impl:
            result = run_async(server.spectrum('{"type": "scalar", "a": 1}', cutoff=""))
        impl.assert_called_once_with('{"type": "scalar", "a": 1}', None)
        self.assertEqual(json.loads(result), {"status": "pass", "n": 1})


class TestToolOutput(unittest.TestCase):
    """End-to-end tool calls."""

    def test_hodge_returns_json(self) -> None:
        import server

        result = json.loads(run_async(server.hodge(dim=1, cutoff=1, a=0.5)))
        self.assertEqual(result["status"], "pass")
        self.assertEqual(result["summary"]["betti"], [1, 1])

    def test_errors_are_rendered_as_text(self) -> None:
        import server

        result = run_async(server.det_sign('{"type": "nonsense"}'))
        self.assertTrue(result.startswith("Error: "))

    def test_bad_graded_list(self) -> None:
        import server

        result = run_async(server.hodge(dim=1, graded="0.5,abc"))
        self.assertTrue(result.startswith("Error: "))

    def test_hodge_explore(self) -> None:
        import server

        result = json.loads(run_async(server.hodge(dim=1, cutoff=1, a=0.5, explore="0.5,2")))
        self.assertEqual(result["status"], "pass")
        self.assertEqual(len(result["exploratory"]), 2)
        self.assertTrue(run_async(server.hodge(dim=1, explore="0.5,x")).startswith("Error: "))

    def test_winding_from_spec(self) -> None:
        import server

        result = json.loads(run_async(server.winding('{"type": "dirac", "winding": -2, "m": 20}')))
        self.assertEqual(result["winding"], -2)


if __name__ == "__main__":
    unittest.main()
