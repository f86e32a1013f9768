"""Verify tool - run the acceptance suite and write a summary report.

Each check is a plain function returning a dict with a boolean "passed"
plus the numbers it compared, so tests can call checks one at a time.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from circle_operators import (
    CircleDiracSpec,
    CircleForm,
    PhaseFunction,
    ScalarCircleSpec,
    SphereBundleSection1D,
    calibrated_scalar_determinant,
    derham_dirac_circle,
    exact_spectrum_tilde0,
    invertibility_margin_section,
    match_eigenvalues,
    method_agreement,
    scalar_monodromy_system,
    sweep_deformation,
    trusted_radius,
    trusted_spectrum,
    verify_circle_theorem,
)
from config import get_setting
from errors import DetPhaseError
from hodge_models import (
    GradedCoefficients,
    betti_numbers,
    build_complex,
    spectrum_Da,
    spectrum_Dgamma,
    spectrum_graded,
)
from reporting import CommandResult, command_boundary, dumps
from spectral_core import (
    AgmonAngle,
    Spectrum,
    angle_shift,
    choose_agmon_angle,
    finite_zeta_det,
    is_symmetric_spectrum,
    naive_vs_theorem,
)

logger = logging.getLogger("detphase.tools.verify")

CIRCLE_CASES = [(k, nu) for k in range(-2, 3) for nu in (0, 1)]
PERTURBATION = 0.4
MASS_MARGIN = 3.0

SYNTHETIC_SPECTRUM = (
    1 + 1j, -1 + 1j, 2 + 0.5j, -2 + 0.5j, 3 - 1j, -3 - 1j,
    0.5 + 3j, -0.5 + 3j, 1.5 - 2j, -1.5 - 2j, 4j, -2.5j,
)


def circle_case(k: int, nu: int, a: float = 1.0) -> CircleDiracSpec:
    """φ = 2πkt + 0.4 sin 2πt on β = 1, m = max|φ̇| + 3."""
    phase = PhaseFunction.sinusoidal(1.0, k, PERTURBATION)
    return CircleDiracSpec(phase, phase.max_abs_derivative() + MASS_MARGIN, nu, a, CircleForm.TILDE)


def check_scalar_determinant(cutoff: int, steps: int) -> Dict[str, Any]:
    rows = []
    for a in (0.25, -0.25, 0.5, -0.5, 1.0, -1.0):
        for beta in (1.0, 2 * math.pi):
            spec = ScalarCircleSpec(a, beta)
            det = calibrated_scalar_determinant(scalar_monodromy_system(spec), steps)
            exact = math.exp(-a * beta) - 1.0
            sign_ok = (det.real < 0) == (a > 0)
            rows.append({"a": a, "beta": beta, "error": abs(det - exact), "sign_ok": sign_ok})
    worst = max(r["error"] for r in rows)
    return {"passed": worst < 1e-8 and all(r["sign_ok"] for r in rows), "max_error": worst, "cases": len(rows)}


def _tilde0_spectra(k: int, nu: int, cutoff: int) -> Tuple[Spectrum, Spectrum]:
    m = 5.0
    spec = CircleDiracSpec(PhaseFunction.linear(1.0, k), m, nu, 0.0, CircleForm.TILDE)
    computed = trusted_spectrum(spec, cutoff)
    radius = trusted_radius(1.0, cutoff)
    reach = cutoff + 4
    exact = exact_spectrum_tilde0(m, 1.0, k, nu, (-reach, reach)).within(radius)
    return computed, exact


def check_exact_spectrum(cutoff: int, steps: int) -> Dict[str, Any]:
    worst = 0.0
    sizes_ok = True
    for k, nu in CIRCLE_CASES:
        computed, exact = _tilde0_spectra(k, nu, cutoff)
        sizes_ok &= computed.total_multiplicity == exact.total_multiplicity
        worst = max(worst, float(np.max(match_eigenvalues(computed.values(), exact.values()))))
    return {"passed": sizes_ok and worst < 1e-8, "max_distance": worst, "sizes_match": sizes_ok}


def check_circle_sign(cutoff: int, steps: int) -> Dict[str, Any]:
    rows = []
    for k, nu in CIRCLE_CASES:
        report = verify_circle_theorem(circle_case(k, nu), cutoff, 1e-6)
        rows.append({"k": k, "nu": nu, "m_plus": report.axis_count.m_plus,
                     "sign": report.computed_sign, "agreement": report.agreement})
    return {"passed": all(r["agreement"] for r in rows), "cases": rows}


def check_symmetry(cutoff: int, steps: int) -> Dict[str, Any]:
    spectra: List[Spectrum] = []
    for k, nu in CIRCLE_CASES:
        spectra.append(_tilde0_spectra(k, nu, cutoff)[0])
        spectra.append(trusted_spectrum(circle_case(k, nu), cutoff))
    failures = sum(1 for s in spectra if not is_symmetric_spectrum(s, 1e-8))
    return {"passed": failures == 0, "spectra": len(spectra), "asymmetric": failures}


def hardest_case() -> CircleDiracSpec:
    """Largest |k| (largest max|φ̇|) among the circle cases."""
    return circle_case(2, 1)


def check_stability_sweep(cutoff: int, steps: int) -> Dict[str, Any]:
    trace = sweep_deformation(hardest_case(), 20, cutoff)
    return {
        "passed": trace.parity_constant and trace.bound_respected,
        "parity_constant": trace.parity_constant,
        "min_abs": trace.min_abs,
        "lower_bound": trace.lower_bound,
        "m_plus": [r.m_plus for r in trace.rows],
    }


def agreement_specs() -> List[CircleDiracSpec]:
    return [
        circle_case(0, 1),
        circle_case(1, 1),
        CircleDiracSpec(PhaseFunction.linear(1.0, -1), 8.0, 0),
    ]


def check_method_agreement(cutoff: int, steps: int) -> Dict[str, Any]:
    rows = []
    for spec in agreement_specs():
        result = method_agreement(spec, 10, cutoff, steps, density=32)
        result["operator"] = spec.label()
        rows.append(result)
    passed = all(r["distance"] < 1e-6 and r["galerkin_count"] == r["monodromy_count"] for r in rows)
    return {"passed": passed, "cases": rows}


def check_hodge_signs(cutoff: int, steps: int) -> Dict[str, Any]:
    t3 = build_complex(3, 1)
    t1 = build_complex(1, 1)
    found = {
        "betti_t3": betti_numbers(t3),
        "Da": spectrum_Da(t3, 0.5),
        "graded_plus": spectrum_graded(t3, GradedCoefficients((0.3, 0.3, -0.3, -0.3))),
        "graded_minus": spectrum_graded(t3, GradedCoefficients((-0.3, 0.3, -0.3, -0.3))),
        "gamma_t3": spectrum_Dgamma(t3),
        "gamma_t1": spectrum_Dgamma(t1),
    }
    expected = {"Da": (8, 1), "graded_plus": (4, 1), "graded_minus": (3, -1), "gamma_t3": (4, 1), "gamma_t1": (1, -1)}
    counts = {name: (found[name].axis_count.m_plus, found[name].computed_sign) for name in expected}
    passed = found["betti_t3"] == [1, 3, 3, 1] and counts == expected and all(
        found[name].agreement for name in expected)
    return {"passed": passed, "betti_t3": found["betti_t3"],
            "counts": {name: list(v) for name, v in counts.items()}}


def degree_section(degree: int) -> Tuple[SphereBundleSection1D, float]:
    section = SphereBundleSection1D(PhaseFunction.sinusoidal(1.0, degree, 0.3))
    return section, MASS_MARGIN - invertibility_margin_section(section, 0.0)


def check_degree_theorem(cutoff: int, steps: int) -> Dict[str, Any]:
    rows = []
    for degree in (-1, 0, 1, 2):
        section, m = degree_section(degree)
        report = derham_dirac_circle(section, m, cutoff)
        rows.append({"degree": degree, "sign": report.computed_sign, "agreement": report.agreement})
    return {"passed": all(r["agreement"] and r["sign"] == (-1) ** (r["degree"] % 2) for r in rows),
            "cases": rows}


def check_naive_product(cutoff: int, steps: int) -> Dict[str, Any]:
    s = Spectrum.from_values([1j, -1j])
    result = naive_vs_theorem(s, choose_agmon_angle(s))
    passed = (abs(result.finite_det - 1.0) < 1e-12 and result.theorem_sign == -1 and result.discrepant)
    return {"passed": passed, **result.to_dict()}


def check_angle_invariance(cutoff: int, steps: int) -> Dict[str, Any]:
    s = Spectrum.from_values(SYNTHETIC_SPECTRUM)
    window = choose_agmon_angle(s).window
    angles = np.linspace(window[0], window[1], 5)
    dets = [finite_zeta_det(s, AgmonAngle(theta)) for theta in angles]
    spread = max(abs(d - dets[0]) for d in dets) / abs(dets[0])
    # Crossing rays changes ζ'(0) by 2πi·(count), never the determinant
    shift = angle_shift(s, float(angles[0]), float(angles[0]) + 0.5)
    winding = shift / (2j * math.pi)
    return {
        "passed": spread < 1e-12 and abs(winding - round(winding.real)) < 1e-9,
        "relative_spread": spread,
        "angles": [float(t) for t in angles],
        "shift_count": round(winding.real),
    }


ACCEPTANCE_CHECKS: List[Tuple[int, str, Callable[[int, int], Dict[str, Any]]]] = [
    (1, "scalar determinant", check_scalar_determinant),
    (2, "exact spectrum cross-check", check_exact_spectrum),
    (3, "circle sign theorem", check_circle_sign),
    (4, "spectrum symmetry", check_symmetry),
    (5, "stability sweep", check_stability_sweep),
    (6, "method agreement", check_method_agreement),
    (7, "hodge signs", check_hodge_signs),
    (8, "degree theorem", check_degree_theorem),
    (9, "formal-manipulation demo", check_naive_product),
    (10, "angle invariance", check_angle_invariance),
]


def _run_check(entry: Tuple[int, str, Callable], cutoff: int, steps: int) -> Dict[str, Any]:
    number, name, check = entry
    started = time.perf_counter()
    try:
        detail = check(cutoff, steps)
    except DetPhaseError as exc:
        detail = {"passed": False, **exc.to_record()}
    passed = bool(detail.pop("passed"))
    elapsed = time.perf_counter() - started
    logger.info("Acceptance %d (%s): %s in %.2fs", number, name, "pass" if passed else "FAIL", elapsed)
    return {"id": number, "name": name, "passed": passed, "detail": detail}


@command_boundary("verify")
def verify(cutoff: int | None = None, steps: int | None = None, jobs: int | None = None) -> CommandResult:
    """Run acceptance checks 1-10.

    Returns:
        Result with summary.json; passes only when every row passes.
    """
    n = cutoff or get_setting("galerkinCutoff", "verify")
    rk4 = steps or get_setting("rk4Steps", "verify")
    workers = jobs or get_setting("jobs", "verify")

    if workers <= 1:
        rows = [_run_check(entry, n, rk4) for entry in ACCEPTANCE_CHECKS]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda entry: _run_check(entry, n, rk4), ACCEPTANCE_CHECKS))

    failed = [row["id"] for row in rows if not row["passed"]]
    payload = {"cutoff": n, "steps": rk4, "rows": rows, "all_passed": not failed}
    artifacts = {"summary.json": dumps(payload)}
    if failed:
        return CommandResult.fail(payload, artifacts, "acceptance", f"acceptance rows failed: {failed}",
                                  {"failed": failed})
    return CommandResult.ok(payload, artifacts)
