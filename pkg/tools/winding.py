"""Winding tool - winding number of a sampled or specified phase."""

from circle_operators import CircleDiracSpec, DerhamCircleSpec, winding_number
from config import get_setting
from errors import SpecParseError
from reporting import CommandResult, command_boundary, dumps
from spec_io import parse_operator_spec, read_samples


@command_boundary("winding")
def winding(
    samples: str | None = None,
    beta: float | None = None,
    spec: str | None = None,
    wrapped: bool = False,
) -> CommandResult:
    """Winding number of φ over one period.

    Args:
        samples: Path to a file of φ values uniform over [0, β], endpoints included.
        beta: Period length; required with samples.
        spec: Dirac or derham spec whose phase is sampled on phaseGridPoints.
        wrapped: Samples are angles known only mod 2π.

    Returns:
        Result with winding.json holding the integer winding.
    """
    if (samples is None) == (spec is None):
        raise SpecParseError("give exactly one of samples or spec", field="samples")

    if spec is not None:
        parsed = parse_operator_spec(spec)
        if isinstance(parsed, CircleDiracSpec):
            phase = parsed.phase
        elif isinstance(parsed, DerhamCircleSpec):
            phase = parsed.section.psi
        else:
            raise SpecParseError("scalar specs carry no phase", field="type")
        values = phase.samples(get_setting("phaseGridPoints", "winding"))
        period = phase.beta
        source = "spec"
    else:
        if beta is None or beta <= 0:
            raise SpecParseError("a positive beta is required with samples", field="beta")
        values = read_samples(samples)
        period = beta
        source = samples

    k = winding_number(values, period, wrapped=wrapped)
    payload = {"winding": k, "samples": len(values), "beta": period, "source": source}
    return CommandResult.ok(payload, {"winding.json": dumps(payload)})
