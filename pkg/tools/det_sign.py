"""Det-sign tool - sign of the determinant against its topological prediction."""

from circle_operators import (
    CircleDiracSpec,
    DerhamCircleSpec,
    ScalarCircleSpec,
    derham_dirac_circle,
    scalar_sign_report,
    verify_circle_theorem,
)
from config import get_setting
from reporting import CommandResult, command_boundary, dumps
from spec_io import parse_operator_spec, spec_to_dict

# Calibrated scalar determinant must match e^{iπν}e^{-aβ} - 1 to this
SCALAR_DET_TOLERANCE = 1e-8


@command_boundary("det-sign")
def det_sign(
    spec: str,
    cutoff: int | None = None,
    steps: int | None = None,
    axis_tol: float | None = None,
    pairing_tol: float | None = None,
) -> CommandResult:
    """Compute the determinant sign of an operator and check it.

    Scalar specs use the calibrated monodromy determinant; Dirac and derham
    specs use the imaginary-axis census of the Galerkin model.

    Returns:
        Result with report.json; fails when the computed sign disagrees
        with the prediction (or the scalar determinant misses its closed form).
    """
    parsed = parse_operator_spec(spec)
    n = cutoff or get_setting("galerkinCutoff", "det-sign")
    rk4 = steps or get_setting("rk4Steps", "det-sign")
    axis = axis_tol or get_setting("axisTolerance", "det-sign")
    pairing = pairing_tol or get_setting("pairingTolerance", "det-sign")

    if isinstance(parsed, ScalarCircleSpec):
        report = scalar_sign_report(parsed, n, rk4, axis, pairing)
    elif isinstance(parsed, CircleDiracSpec):
        report = verify_circle_theorem(parsed, n, axis, pairing)
    elif isinstance(parsed, DerhamCircleSpec):
        report = derham_dirac_circle(parsed.section, parsed.mass, n, axis, pairing)
    else:  # pragma: no cover
        raise TypeError(type(parsed).__name__)

    payload = {"spec": spec_to_dict(parsed), "report": report.to_dict(), "sign": report.computed_sign}
    if isinstance(parsed, ScalarCircleSpec):
        payload["exact_det"] = report.details["exact_det"]
        error = report.details["abs_error"]
        if error > SCALAR_DET_TOLERANCE:
            return CommandResult.fail(payload, {"report.json": dumps(payload)}, "scalar-determinant",
                                      f"calibrated determinant off by {error:.3g}",
                                      {"a": parsed.a, "beta": parsed.beta, "steps": rk4})
    artifacts = {"report.json": dumps(payload)}
    if not report.agreement:
        return CommandResult.fail(payload, artifacts, "sign-agreement",
                                  f"computed sign {report.computed_sign:+d} but predicted "
                                  f"{report.topological_prediction:+d}",
                                  {"operator": report.label, "cutoff": n})
    return CommandResult.ok(payload, artifacts)
