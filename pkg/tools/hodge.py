"""Hodge tool - torus DeRham models and their sign formulas."""

from typing import Sequence

from config import get_setting
from hodge_models import (
    GradedCoefficients,
    build_complex,
    complex_summary,
    exploratory_graded_sweep,
    spectrum_Da,
    spectrum_Dgamma,
    spectrum_graded,
    structural_residuals,
)
from reporting import CommandResult, command_boundary, dumps

# Structural identities are exact up to this entrywise residual
RESIDUAL_TOLERANCE = 1e-12


@command_boundary("hodge")
def hodge(
    dim: int = 3,
    cutoff: int = 1,
    a: float = 0.5,
    graded: Sequence[float] | None = None,
    explore: Sequence[float] | None = None,
    axis_tol: float | None = None,
    pairing_tol: float | None = None,
) -> CommandResult:
    """Betti numbers and sign checks for d+d*+ia, d+d*+iA and d+d*+iΓ on T^dim.

    With `explore`, graded operators a = scale·pattern are also run for each
    scale, pattern being `graded` or the alternating (1, -1, ...). Those rows
    go to exploratory.json and never fail the command.

    Returns:
        Result with hodge.json; fails on a broken structural identity or a
        sign disagreement.
    """
    axis = axis_tol or get_setting("axisTolerance", "hodge")
    pairing = pairing_tol or get_setting("pairingTolerance", "hodge")
    c = build_complex(dim, cutoff)

    residuals = structural_residuals(c)
    reports = [spectrum_Da(c, a, axis, pairing)]
    if graded:
        reports.append(spectrum_graded(c, GradedCoefficients(tuple(graded)), axis, pairing))
    reports.append(spectrum_Dgamma(c, axis, pairing))

    payload = {
        "summary": complex_summary(c),
        "residuals": residuals,
        "reports": [r.to_dict() for r in reports],
    }
    artifacts = {"hodge.json": dumps(payload)}
    if explore:
        rows = exploratory_graded_sweep(c, explore, graded or None, axis, pairing)
        artifacts["exploratory.json"] = dumps({"pattern": list(graded) if graded else None, "rows": rows})
        payload["exploratory"] = rows

    broken = {k: v for k, v in residuals.items() if v > RESIDUAL_TOLERANCE}
    if broken:
        name = sorted(broken)[0]
        return CommandResult.fail(payload, artifacts, name, f"structural residual {name} = {broken[name]:.3g}",
                                  {"dim": dim, "cutoff": cutoff})
    for report in reports:
        if not report.agreement:
            return CommandResult.fail(payload, artifacts, "sign-agreement",
                                      f"{report.label}: sign {report.computed_sign:+d}, "
                                      f"predicted {report.topological_prediction:+d}",
                                      {"dim": dim, "cutoff": cutoff})
    return CommandResult.ok(payload, artifacts)
