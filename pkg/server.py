"""detphase MCP server - tool registration.

Exposes the spectrum, det_sign, winding, sweep and hodge commands over MCP
(stdio). Specs are passed inline as JSON text; results come back as JSON
text, or "Error: ..." when the command failed with an error.
"""

import logging

from mcp.server.fastmcp import FastMCP

from reporting import CommandResult
from tools import (
    det_sign as det_sign_impl,
    hodge as hodge_impl,
    spectrum as spectrum_impl,
    sweep as sweep_impl,
    winding as winding_impl,
)

logger = logging.getLogger("detphase.server")

# Create MCP server instance
mcp = FastMCP("detphase")


def _coerce_optional_int(name: str, value: int | str | None) -> int | None:
    """Normalize optional integer tool arguments.

    Empty strings are treated as omitted values so clients that serialize
    optional fields as blank strings do not trip validation.
    """
    if value is None:
        return None
    if isinstance(value, str):
        stripped = value.strip()
        if stripped == "":
            return None
        value = stripped
    if isinstance(value, int):
        return value
    try:
        return int(value)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"'{name}' must be an integer, got: {value!r}") from exc


def _render(result: CommandResult) -> str:
    if result.status == "error":
        return f"Error: {result.payload.get('error', 'unknown failure')}"
    return result.to_json()


@mcp.tool()
async def spectrum(spec: str, cutoff: int | str | None = None) -> str:
    """Galerkin spectrum of an operator inside the trusted window.

    Args:
        spec: Operator spec JSON, e.g. {"type": "dirac", "m": 8, "winding": 1}
        cutoff: Optional Galerkin cutoff N

    Returns:
        JSON with the eigenvalues ({re, im, mult}) and a symmetry verdict.
    """
    logger.debug("spectrum(%s, cutoff=%s)", spec, cutoff)
    return _render(spectrum_impl(spec, _coerce_optional_int("cutoff", cutoff)))


@mcp.tool()
async def det_sign(spec: str, cutoff: int | str | None = None, steps: int | str | None = None) -> str:
    """Determinant sign of an operator against its topological prediction.

    Args:
        spec: Operator spec JSON (scalar, dirac or derham)
        cutoff: Optional Galerkin cutoff N
        steps: Optional RK4 steps for scalar monodromy

    Returns:
        JSON report with m_+, the computed sign and the prediction.
    """
    logger.debug("det_sign(%s)", spec)
    return _render(det_sign_impl(spec, _coerce_optional_int("cutoff", cutoff),
                                 _coerce_optional_int("steps", steps)))


@mcp.tool()
async def winding(spec: str) -> str:
    """Winding number of the phase of a dirac or derham spec.

    Args:
        spec: Operator spec JSON with "winding" and "fourier" fields

    Returns:
        JSON with the winding number recovered from sampled phase values.
    """
    return _render(winding_impl(spec=spec))


@mcp.tool()
async def sweep(spec: str, steps: int | str | None = None, cutoff: int | str | None = None) -> str:
    """m_+ parity along a homotopy (deformation for dirac, section path for derham).

    Args:
        spec: Operator spec JSON (dirac or derham)
        steps: Optional number of sweep intervals (default 20)
        cutoff: Optional Galerkin cutoff N

    Returns:
        JSON trace with one row per parameter value.
    """
    return _render(sweep_impl(spec, _coerce_optional_int("steps", steps) or 20,
                              _coerce_optional_int("cutoff", cutoff)))


@mcp.tool()
async def hodge(dim: int = 3, cutoff: int = 1, a: float = 0.5, graded: str = "", explore: str = "") -> str:
    """Betti numbers and determinant signs on the torus T^dim.

    Args:
        dim: 1 or 3
        cutoff: Frequency cutoff K
        a: Coefficient of d+d*+ia, 0 < |a| < 1
        graded: Optional comma-separated a_0,...,a_dim for d+d*+iA
        explore: Optional comma-separated scales for unasserted graded runs

    Returns:
        JSON with the complex summary and one report per operator.
    """
    lists = {}
    for name, text in (("graded", graded), ("explore", explore)):
        try:
            lists[name] = [float(x) for x in text.split(",") if x.strip()] or None
        except ValueError:
            return f"Error: {name} must be comma-separated numbers, got {text!r}"
    return _render(hodge_impl(dim, cutoff, a, lists["graded"], lists["explore"]))


def main() -> None:
    """Run the MCP server on stdio."""
    logger.info("Starting detphase MCP server")
    mcp.run()
