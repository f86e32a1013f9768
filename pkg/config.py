"""Configuration management for detphase.

Handles loading numerical defaults from appsettings.json with sensible
fallbacks. Every loader returns its DEFAULT_* constant when the file is
missing, unreadable, not valid JSON, or holds an invalid value.
"""

import json
from pathlib import Path
from typing import Any, Dict

# Axis classification: |Re λ| <= tol * (1 + |λ|)
DEFAULT_AXIS_TOLERANCE: float = 1e-6

# Eigenvalues closer than tol * (1 + scale) are merged into one entry
DEFAULT_PAIRING_TOLERANCE: float = 1e-8

# Galerkin frequency cutoff N (modes with |ω| <= (π/β)·2N)
DEFAULT_GALERKIN_CUTOFF: int = 64

# Largest dense matrix handed to the eigensolver
DEFAULT_MAX_MATRIX_SIZE: int = 4096

# Fixed RK4 steps per period
DEFAULT_RK4_STEPS: int = 4096

# Argument-principle samples per unit contour length
DEFAULT_CONTOUR_DENSITY: int = 256

DEFAULT_NEWTON_TOLERANCE: float = 1e-10
DEFAULT_NEWTON_MAX_ITERATIONS: int = 50

# Grid used to evaluate max|φ̇| and to sample phases
DEFAULT_PHASE_GRID_POINTS: int = 4096

DEFAULT_JOBS: int = 1
DEFAULT_OUTPUT_DIR: str = "out"
DEFAULT_LOG_LEVEL: str = "INFO"

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _read_config(config_dir: Path | None) -> Dict[str, Any]:
    """Read appsettings.json as a dict, or {} when unavailable."""
    if config_dir is None:
        config_dir = Path(__file__).parent

    config_path = config_dir / "appsettings.json"

    try:
        if config_path.is_file():
            with config_path.open("r", encoding="utf-8") as f:
                config = json.load(f)
                if isinstance(config, dict):
                    return config
    except (OSError, json.JSONDecodeError):
        # Corrupted or unreadable - defaults apply
        pass

    return {}


def _is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def load_axis_tolerance(config_dir: Path | None = None) -> float:
    """Load the imaginary-axis classification tolerance.

    An eigenvalue λ counts as lying on the imaginary axis when
    |Re λ| <= tolerance * (1 + |λ|).

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Positive tolerance. Defaults to 1e-6.
    """
    value = _read_config(config_dir).get("axisTolerance")
    if _is_number(value) and value > 0:
        return float(value)
    return DEFAULT_AXIS_TOLERANCE


def load_pairing_tolerance(config_dir: Path | None = None) -> float:
    """Load the relative tolerance used to merge and pair eigenvalues.

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Positive tolerance. Defaults to 1e-8.
    """
    value = _read_config(config_dir).get("pairingTolerance")
    if _is_number(value) and value > 0:
        return float(value)
    return DEFAULT_PAIRING_TOLERANCE


def load_galerkin_cutoff(config_dir: Path | None = None) -> int:
    """Load the default Galerkin cutoff N.

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Positive integer cutoff. Defaults to 64.
    """
    value = _read_config(config_dir).get("galerkinCutoff")
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULT_GALERKIN_CUTOFF


def load_max_matrix_size(config_dir: Path | None = None) -> int:
    """Load the largest matrix dimension the eigensolver will accept.

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Positive integer. Defaults to 4096.
    """
    value = _read_config(config_dir).get("maxMatrixSize")
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULT_MAX_MATRIX_SIZE


def load_rk4_steps(config_dir: Path | None = None) -> int:
    """Load the fixed number of RK4 steps per period.

    Values below 64 are rejected because the integrator contract requires
    at least 64 steps.

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Step count. Defaults to 4096.
    """
    value = _read_config(config_dir).get("rk4Steps")
    if isinstance(value, int) and not isinstance(value, bool) and value >= 64:
        return value
    return DEFAULT_RK4_STEPS


def load_contour_density(config_dir: Path | None = None) -> int:
    """Load the argument-principle sampling density (points per unit length).

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Positive integer. Defaults to 256.
    """
    value = _read_config(config_dir).get("contourDensity")
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULT_CONTOUR_DENSITY


def load_newton_tolerance(config_dir: Path | None = None) -> float:
    """Load the Newton refinement tolerance (relative to the local scale)."""
    value = _read_config(config_dir).get("newtonTolerance")
    if _is_number(value) and value > 0:
        return float(value)
    return DEFAULT_NEWTON_TOLERANCE


def load_newton_max_iterations(config_dir: Path | None = None) -> int:
    """Load the Newton iteration limit."""
    value = _read_config(config_dir).get("newtonMaxIterations")
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULT_NEWTON_MAX_ITERATIONS


def load_phase_grid_points(config_dir: Path | None = None) -> int:
    """Load the grid size used for max|φ̇| and phase sampling."""
    value = _read_config(config_dir).get("phaseGridPoints")
    if isinstance(value, int) and not isinstance(value, bool) and value >= 16:
        return value
    return DEFAULT_PHASE_GRID_POINTS


def load_jobs(config_dir: Path | None = None) -> int:
    """Load the default worker count for fan-out commands."""
    value = _read_config(config_dir).get("jobs")
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    return DEFAULT_JOBS


def load_output_dir(config_dir: Path | None = None) -> str:
    """Load the default artifact directory.

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Directory name or path. Defaults to "out".
    """
    value = _read_config(config_dir).get("outputDir")
    if isinstance(value, str) and value.strip():
        return value
    return DEFAULT_OUTPUT_DIR


def load_log_level(config_dir: Path | None = None) -> str:
    """Load the stderr log level (file logging is always DEBUG)."""
    value = _read_config(config_dir).get("logLevel")
    if isinstance(value, str) and value.upper() in _LOG_LEVELS:
        return value.upper()
    return DEFAULT_LOG_LEVEL


def load_command_overrides(config_dir: Path | None = None) -> dict:
    """Load per-command overrides from appsettings.json.

    Each key is a command name (e.g. "verify") and the value is a dict of
    settings that replace the global ones for that command.

    Example config:
        {
            "commandOverrides": {
                "verify": { "galerkinCutoff": 64 },
                "sweep": { "rk4Steps": 2048 }
            }
        }

    Args:
        config_dir: Directory containing appsettings.json. If None, uses script directory.

    Returns:
        Dict mapping command names to their overrides.
    """
    overrides = _read_config(config_dir).get("commandOverrides")
    if isinstance(overrides, dict):
        return overrides
    return {}


def get_setting(name: str, command: str | None = None) -> Any:
    """Get the effective value of a setting for a command.

    Checks commandOverrides first (case-insensitive command match), then
    falls back to the global singleton. Override values must have the same
    type as the global value, otherwise they are ignored.

    Args:
        name: Setting key as written in appsettings.json (e.g. "galerkinCutoff").
        command: Command name (e.g. "verify"). If None, returns the global value.

    Returns:
        The effective setting value.

    Raises:
        KeyError: If the setting name is unknown.
    """
    if name not in _GLOBALS:
        raise KeyError(f"Unknown setting: {name}")
    default = _GLOBALS[name]

    if command:
        command_lower = command.lower()
        for key, override in COMMAND_OVERRIDES.items():
            if key.lower() == command_lower and isinstance(override, dict) and name in override:
                value = override[name]
                if isinstance(default, float) and _is_number(value) and value > 0:
                    return float(value)
                if type(value) is type(default):
                    return value

    return default


# Singletons loaded at module import
AXIS_TOLERANCE: float = load_axis_tolerance()
PAIRING_TOLERANCE: float = load_pairing_tolerance()
GALERKIN_CUTOFF: int = load_galerkin_cutoff()
MAX_MATRIX_SIZE: int = load_max_matrix_size()
RK4_STEPS: int = load_rk4_steps()
CONTOUR_DENSITY: int = load_contour_density()
NEWTON_TOLERANCE: float = load_newton_tolerance()
NEWTON_MAX_ITERATIONS: int = load_newton_max_iterations()
PHASE_GRID_POINTS: int = load_phase_grid_points()
JOBS: int = load_jobs()
OUTPUT_DIR: str = load_output_dir()
LOG_LEVEL: str = load_log_level()
COMMAND_OVERRIDES: dict = load_command_overrides()

_GLOBALS: Dict[str, Any] = {
    "axisTolerance": AXIS_TOLERANCE,
    "pairingTolerance": PAIRING_TOLERANCE,
    "galerkinCutoff": GALERKIN_CUTOFF,
    "maxMatrixSize": MAX_MATRIX_SIZE,
    "rk4Steps": RK4_STEPS,
    "contourDensity": CONTOUR_DENSITY,
    "newtonTolerance": NEWTON_TOLERANCE,
    "newtonMaxIterations": NEWTON_MAX_ITERATIONS,
    "phaseGridPoints": PHASE_GRID_POINTS,
    "jobs": JOBS,
    "outputDir": OUTPUT_DIR,
    "logLevel": LOG_LEVEL,
}
