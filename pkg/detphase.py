"""detphase - command-line entry point.

    detphase.py spectrum --spec SPEC [--cutoff N] [--out DIR]
    detphase.py det-sign --spec SPEC [--cutoff N] [--steps S] [--axis-tol T]
    detphase.py winding (--samples FILE --beta B | --spec SPEC)
    detphase.py sweep --spec SPEC [--sweep-steps K] [--jobs J]
    detphase.py hodge [--dim {1,3}] [--cutoff K] [--a A] [--graded a0,a1,...] [--explore s1,s2,...]
    detphase.py verify [--cutoff N] [--steps S] [--jobs J]
    detphase.py serve

Exit status: 0 pass, 1 assertion failure, 2 usage error, 3 numerical error.
"""

import argparse
import logging
import os
import sys
import tempfile
from logging.handlers import RotatingFileHandler
from typing import List, Sequence

from config import LOG_LEVEL, get_setting
from errors import EXIT_USAGE, ConfigError, DetPhaseError
from reporting import CommandResult, RunConfig
from spec_io import write_artifacts

logger = logging.getLogger("detphase.cli")

COMMANDS = ("spectrum", "det-sign", "winding", "sweep", "hodge", "verify")


def _setup_logging(level: str = LOG_LEVEL) -> None:
    """Log to a rotating file in the temp directory (DEBUG) and to stderr."""
    root = logging.getLogger("detphase")
    if root.handlers:
        return

    log_dir = os.path.join(tempfile.gettempdir(), "detphase")
    os.makedirs(log_dir, exist_ok=True)
    log_file = os.path.join(log_dir, "detphase.log")

    fmt = logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    # Rotating file handler: 2 MB, keep 3 backups
    file_handler = RotatingFileHandler(
        log_file, maxBytes=2 * 1024 * 1024, backupCount=3, encoding="utf-8"
    )
    file_handler.setFormatter(fmt)
    file_handler.setLevel(logging.DEBUG)

    stderr_handler = logging.StreamHandler(sys.stderr)
    stderr_handler.setFormatter(fmt)
    stderr_handler.setLevel(getattr(logging, level, logging.INFO))

    root.setLevel(logging.DEBUG)
    root.addHandler(file_handler)
    root.addHandler(stderr_handler)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage status."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="detphase", description="Determinant signs of non-self-adjoint operators")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, spec: bool = True) -> None:
        if spec:
            p.add_argument("--spec", required=True, help="operator spec: JSON text or file path")
        p.add_argument("--cutoff", type=int, help="Galerkin cutoff N (hodge: frequency cutoff K)")
        p.add_argument("--steps", type=int, help="RK4 steps per period")
        p.add_argument("--axis-tol", type=float, help="imaginary-axis tolerance")
        p.add_argument("--pairing-tol", type=float, help="eigenvalue pairing tolerance")
        p.add_argument("--out", help="artifact directory")
        p.add_argument("--jobs", type=int, help="worker threads")

    common(sub.add_parser("spectrum", help="Galerkin spectrum in the trusted window"))
    common(sub.add_parser("det-sign", help="determinant sign versus prediction"))

    p = sub.add_parser("winding", help="winding number of a phase")
    common(p, spec=False)
    p.add_argument("--spec", help="dirac or derham spec whose phase is sampled")
    p.add_argument("--samples", help="file with one phase value per line")
    p.add_argument("--beta", type=float, help="period length for --samples")
    p.add_argument("--wrapped", action="store_true", help="samples are angles mod 2π")

    p = sub.add_parser("sweep", help="parity sweep along a homotopy")
    common(p)
    p.add_argument("--sweep-steps", type=int, default=20, help="number of parameter intervals")

    p = sub.add_parser("hodge", help="torus DeRham models")
    common(p, spec=False)
    p.add_argument("--dim", type=int, choices=(1, 3), default=3)
    p.add_argument("--a", type=float, default=0.5, help="coefficient of d+d*+ia")
    p.add_argument("--graded", type=_float_list, help="a_0,...,a_dim for d+d*+iA")
    p.add_argument("--explore", type=_float_list,
                   help="scales for unasserted graded runs, written to exploratory.json")

    common(sub.add_parser("verify", help="run the acceptance suite"), spec=False)
    sub.add_parser("serve", help="run the MCP server on stdio")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge flags with per-command settings from appsettings.json."""
    command = args.command
    default_cutoff = 1 if command == "hodge" else get_setting("galerkinCutoff", command)
    config = RunConfig(
        command=command,
        spec=getattr(args, "spec", None),
        samples=getattr(args, "samples", None),
        beta=getattr(args, "beta", None),
        cutoff=args.cutoff or default_cutoff,
        steps=args.steps or get_setting("rk4Steps", command),
        sweep_steps=getattr(args, "sweep_steps", 20),
        axis_tol=args.axis_tol or get_setting("axisTolerance", command),
        pairing_tol=args.pairing_tol or get_setting("pairingTolerance", command),
        out=args.out or get_setting("outputDir", command),
        jobs=args.jobs or get_setting("jobs", command),
        dim=getattr(args, "dim", 3),
        a=getattr(args, "a", 0.5),
        graded=getattr(args, "graded", None),
        explore=getattr(args, "explore", None),
        wrapped=getattr(args, "wrapped", False),
    )
    config.validate()
    return config


def run(config: RunConfig) -> CommandResult:
    """Dispatch one command; artifacts are written to config.out."""
    import tools

    if config.command == "spectrum":
        result = tools.spectrum(config.spec, config.cutoff, config.pairing_tol)
    elif config.command == "det-sign":
        result = tools.det_sign(config.spec, config.cutoff, config.steps, config.axis_tol, config.pairing_tol)
    elif config.command == "winding":
        result = tools.winding(config.samples, config.beta, config.spec, config.wrapped)
    elif config.command == "sweep":
        result = tools.sweep(config.spec, config.sweep_steps, config.cutoff, config.axis_tol, config.jobs)
    elif config.command == "hodge":
        result = tools.hodge(config.dim, config.cutoff, config.a, config.graded, config.explore,
                             config.axis_tol, config.pairing_tol)
    elif config.command == "verify":
        result = tools.verify(config.cutoff, config.steps, config.jobs)
    else:
        raise ConfigError(f"unknown command {config.command!r}", invariant="command")

    written = write_artifacts(config.out, result.artifacts)
    logger.info("%s: %s (exit %d), wrote %d artifact(s) to %s",
                config.command, result.status, result.exit_code, len(written), config.out)
    return result


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(LOG_LEVEL)

    if args.command == "serve":
        from server import main as serve

        serve()
        return 0

    try:
        config = config_from_args(args)
    except DetPhaseError as exc:
        logger.error("%s", exc)
        return exc.exit_code

    result = run(config)
    print(result.to_json(), end="")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
