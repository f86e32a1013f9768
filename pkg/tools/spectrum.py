"""Spectrum tool - Galerkin spectrum of an operator spec."""

from circle_operators import galerkin_matrix, spectrum_galerkin, trusted_radius
from config import get_setting
from reporting import CommandResult, command_boundary, dumps
from spec_io import parse_operator_spec, spec_to_dict, spectrum_to_csv
from spectral_core import is_symmetric_spectrum


@command_boundary("spectrum")
def spectrum(spec: str, cutoff: int | None = None, pairing_tol: float | None = None) -> CommandResult:
    """Compute the Galerkin spectrum inside the trusted window.

    Args:
        spec: Operator spec JSON (inline) or a path to a spec file.
        cutoff: Galerkin cutoff N. Defaults to galerkinCutoff.
        pairing_tol: Merge/pairing tolerance. Defaults to pairingTolerance.

    Returns:
        Result with spectrum.csv and spectrum.json; fails when the trusted
        spectrum is not symmetric under λ ↦ -conj(λ).
    """
    parsed = parse_operator_spec(spec)
    n = cutoff or get_setting("galerkinCutoff", "spectrum")
    tol = pairing_tol or get_setting("pairingTolerance", "spectrum")

    full = spectrum_galerkin(galerkin_matrix(parsed, n), n, merge_tol=tol)
    radius = trusted_radius(parsed.beta, n)
    trusted = full.within(radius)
    symmetric = is_symmetric_spectrum(trusted, tol)

    payload = {
        "spec": spec_to_dict(parsed),
        "cutoff": n,
        "matrix_size": full.total_multiplicity,
        "trusted_radius": radius,
        "trusted_size": trusted.total_multiplicity,
        "symmetric": symmetric,
        "eigenvalues": trusted.to_records(),
    }
    artifacts = {"spectrum.csv": spectrum_to_csv(trusted), "spectrum.json": dumps(payload)}
    if not symmetric:
        return CommandResult.fail(payload, artifacts, "symmetric-spectrum",
                                  "trusted spectrum is not symmetric",
                                  {"cutoff": n, "pairing_tol": tol})
    return CommandResult.ok(payload, artifacts)
