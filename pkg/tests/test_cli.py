"""Tests for the detphase command-line entry point."""

import json
import sys
import unittest
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

# Add parent directory to path for module imports
_parent_dir = str(Path(__file__).parent.parent)
if _parent_dir not in sys.path:
    sys.path.insert(0, _parent_dir)

from errors import EXIT_ASSERTION, EXIT_OK, EXIT_USAGE  # noqa: E402
from tests.test_utils import TempWorkspace  # noqa: E402


def run_cli(*argv: str) -> tuple:
    """Run detphase.main and capture stdout."""
    import detphase

    buffer = StringIO()
    with redirect_stdout(buffer):
        code = detphase.main(list(argv))
    return code, buffer.getvalue()


class TestCommandLine(unittest.TestCase):
    """End-to-end runs of the subcommands."""

    def test_hodge_writes_artifact(self) -> None:
        with TempWorkspace() as ws:
            code, out = run_cli("hodge", "--dim", "1", "--cutoff", "1", "--out", str(ws.path / "out"))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(json.loads(out)["status"], "pass")
            self.assertEqual(ws.read_json("out/hodge.json")["summary"]["betti"], [1, 1])

    def test_hodge_explore_writes_rows(self) -> None:
        with TempWorkspace() as ws:
            code, out = run_cli("hodge", "--dim", "1", "--explore", "0.5,2.0", "--out", str(ws.path))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(len(json.loads(out)["exploratory"]), 2)
            rows = ws.read_json("exploratory.json")["rows"]
            self.assertEqual([row["scale"] for row in rows], [0.5, 2.0])

    def test_det_sign_from_spec_file(self) -> None:
        with TempWorkspace() as ws:
            spec = ws.create_spec("scalar.json", {"type": "scalar", "a": 0.5})
            code, out = run_cli("det-sign", "--spec", str(spec), "--cutoff", "8", "--steps", "1024",
                                "--out", str(ws.path))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(json.loads(out)["sign"], -1)
            self.assertTrue((ws.path / "report.json").is_file())

    def test_winding_from_samples(self) -> None:
        with TempWorkspace() as ws:
            samples = ws.create_file("phi.txt", "\n".join(str(0.1 * i) for i in range(64)))
            code, out = run_cli("winding", "--samples", str(samples), "--beta", "1", "--out", str(ws.path))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(json.loads(out)["winding"], 1)

    def test_graded_hodge_outside_regime(self) -> None:
        with TempWorkspace() as ws:
            code, out = run_cli("hodge", "--dim", "1", "--graded", "0.5,1.5", "--out", str(ws.path))
            self.assertEqual(code, EXIT_ASSERTION)
            self.assertEqual(json.loads(out)["invariant"], "coefficient-regime")
            self.assertTrue((ws.path / "failure.json").is_file())

    def test_invalid_spec_exits_with_usage_status(self) -> None:
        with TempWorkspace() as ws:
            code, out = run_cli("spectrum", "--spec", '{"type": "dirac", "m": -1}', "--out", str(ws.path))
            self.assertEqual(code, EXIT_USAGE)
            self.assertEqual(ws.read_json("failure.json")["invariant"], "spec-parse")

    def test_invalid_tolerance(self) -> None:
        with TempWorkspace() as ws:
            code, _ = run_cli("spectrum", "--spec", "{}", "--axis-tol", "-1", "--out", str(ws.path))
            self.assertEqual(code, EXIT_USAGE)

    def test_missing_required_flag(self) -> None:
        with self.assertRaises(SystemExit) as ctx:
            run_cli("det-sign")
        self.assertEqual(ctx.exception.code, EXIT_USAGE)

    def test_unknown_command(self) -> None:
        with self.assertRaises(SystemExit) as ctx:
            run_cli("factorize")
        self.assertEqual(ctx.exception.code, EXIT_USAGE)


class TestConfigFromArgs(unittest.TestCase):
    """Flags override settings; missing flags fall back to appsettings.json."""

    def test_defaults_come_from_settings(self) -> None:
        import config
        import detphase

        args = detphase.build_parser().parse_args(["verify"])
        run = detphase.config_from_args(args)
        self.assertEqual(run.cutoff, config.get_setting("galerkinCutoff", "verify"))
        self.assertEqual(run.steps, config.get_setting("rk4Steps", "verify"))

    def test_flags_win(self) -> None:
        import detphase

        args = detphase.build_parser().parse_args(
            ["sweep", "--spec", "{}", "--cutoff", "12", "--jobs", "2", "--sweep-steps", "5"]
        )
        run = detphase.config_from_args(args)
        self.assertEqual((run.cutoff, run.jobs, run.sweep_steps), (12, 2, 5))

    def test_hodge_cutoff_defaults_to_one(self) -> None:
        import detphase

        run = detphase.config_from_args(detphase.build_parser().parse_args(["hodge", "--graded", "0.1,0.2"]))
        self.assertEqual(run.cutoff, 1)
        self.assertEqual(list(run.graded), [0.1, 0.2])


if __name__ == "__main__":
    unittest.main()
