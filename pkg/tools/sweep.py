"""Sweep tool - m_+ parity along a homotopy of operators."""

from circle_operators import (
    CircleDiracSpec,
    DerhamCircleSpec,
    PhaseFunction,
    SphereBundleSection1D,
    sweep_deformation,
    sweep_section,
)
from config import get_setting
from errors import SpecParseError
from reporting import CommandResult, command_boundary, dumps
from spec_io import parse_operator_spec, spec_to_dict


@command_boundary("sweep")
def sweep(
    spec: str,
    steps: int = 20,
    cutoff: int | None = None,
    axis_tol: float | None = None,
    jobs: int | None = None,
) -> CommandResult:
    """Track the imaginary-axis census along a homotopy.

    Dirac specs sweep the deformation a over [0, 1] in the tilde form.
    Derham specs sweep from the pure-degree section (periodic part removed)
    to the given section.

    Returns:
        Result with sweep.csv and sweep.json; fails on a parity jump or when
        min|λ| drops below the invertibility bound.
    """
    parsed = parse_operator_spec(spec)
    n = cutoff or get_setting("galerkinCutoff", "sweep")
    axis = axis_tol or get_setting("axisTolerance", "sweep")
    workers = jobs or get_setting("jobs", "sweep")
    if steps <= 0:
        raise SpecParseError(f"steps must be positive, got {steps}", field="steps")

    if isinstance(parsed, CircleDiracSpec):
        trace = sweep_deformation(parsed, steps, n, axis, workers)
    elif isinstance(parsed, DerhamCircleSpec):
        psi = parsed.section.psi
        offset = psi.coefficients[0] if psi.coefficients else 0.0
        start = SphereBundleSection1D(PhaseFunction.linear(psi.beta, psi.winding, offset.real))
        trace = sweep_section(start, parsed.section, parsed.mass, steps, n, axis, workers)
    else:
        raise SpecParseError("sweep needs a dirac or derham spec", field="type")

    payload = {"spec": spec_to_dict(parsed), "cutoff": n, "trace": trace.to_dict()}
    artifacts = {"sweep.csv": trace.to_csv(), "sweep.json": dumps(payload)}
    if not trace.parity_constant:
        bad = trace.counterexample
        return CommandResult.fail(payload, artifacts, "parity-constant",
                                  f"m_+ parity changes at {trace.parameter_name}={bad.parameter:g}",
                                  bad.to_dict())
    if not trace.bound_respected:
        return CommandResult.fail(payload, artifacts, "eigenvalue-lower-bound",
                                  f"min|lambda| {trace.min_abs:.6g} below bound {trace.lower_bound:.6g}",
                                  {"min_abs": trace.min_abs, "lower_bound": trace.lower_bound})
    return CommandResult.ok(payload, artifacts)
