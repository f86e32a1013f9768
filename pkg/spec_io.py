"""Operator spec parsing and artifact codecs.

Operator specs are JSON objects, given either as a file path or inline:

    {"type": "dirac", "beta": 1, "m": 12, "nu": 1, "winding": 1,
     "fourier": [[1, 0, -0.2]], "form": "tilde", "a": 1}

"fourier" lists [j, re, im] for j >= 0 (c_{-j} = conj(c_j) is implied).
Dirac and derham specs may give "m_margin" instead of "m"; the mass is then
the invertibility threshold plus the margin.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List

from circle_operators import (
    CircleDiracSpec,
    CircleForm,
    DerhamCircleSpec,
    OperatorSpec,
    PhaseFunction,
    ScalarCircleSpec,
    SphereBundleSection1D,
    invertibility_margin_section,
)
from errors import SpecParseError
from spectral_core import Spectrum, SpectrumSource

logger = logging.getLogger("detphase.spec_io")

SPEC_TYPES = ("scalar", "dirac", "derham")
_KNOWN_FIELDS = {"type", "beta", "m", "m_margin", "nu", "a", "winding", "fourier", "form"}


def _line_of(text: str, name: str) -> int | None:
    """1-based line of the first occurrence of "name" in the raw text."""
    needle = f'"{name}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


class _Fields:
    """Typed access to a spec object with field/line diagnostics."""

    def __init__(self, data: Dict[str, Any], text: str) -> None:
        self.data = data
        self.text = text

    def fail(self, name: str, message: str) -> SpecParseError:
        return SpecParseError(f"{name}: {message}", field=name, line=_line_of(self.text, name))

    def number(self, name: str, default: float | None = None, positive: bool = False) -> float:
        value = self.data.get(name, default)
        if value is None:
            raise self.fail(name, "required")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise self.fail(name, f"expected a finite number, got {value!r}")
        if positive and value <= 0:
            raise self.fail(name, f"must be positive, got {value!r}")
        return float(value)

    def integer(self, name: str, default: int | None = None, choices: tuple | None = None) -> int:
        value = self.data.get(name, default)
        if value is None:
            raise self.fail(name, "required")
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(name, f"expected an integer, got {value!r}")
        if choices is not None and value not in choices:
            raise self.fail(name, f"must be one of {list(choices)}, got {value!r}")
        return value

    def phase(self, beta: float) -> PhaseFunction:
        winding = self.integer("winding", 0)
        raw = self.data.get("fourier", [])
        if not isinstance(raw, list):
            raise self.fail("fourier", "expected a list of [j, re, im]")
        pairs = []
        for entry in raw:
            if (not isinstance(entry, list) or len(entry) != 3
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                raise self.fail("fourier", f"bad entry {entry!r}; expected [j, re, im]")
            j, re_part, im_part = entry
            if not isinstance(j, int) or j < 0:
                raise self.fail("fourier", f"index must be a nonnegative integer, got {j!r}")
            if j == 0 and im_part != 0:
                raise self.fail("fourier", "c_0 must be real")
            pairs.append((j, complex(re_part, im_part)))
        return PhaseFunction.from_pairs(beta, winding, pairs)


def load_spec_text(source: str) -> str:
    """Spec text from a file path, or the source itself when it is inline JSON."""
    stripped = source.strip()
    if stripped.startswith("{"):
        return stripped
    path = Path(source)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {source}: {exc}", field="spec") from exc


def parse_operator_spec(source: str) -> OperatorSpec:
    """Parse a scalar, dirac or derham operator spec.

    Raises:
        SpecParseError: unreadable file, invalid JSON, or a bad field.
    """
    text = load_spec_text(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise SpecParseError("spec must be a JSON object", line=1)
    fields = _Fields(data, text)

    unknown = sorted(set(data) - _KNOWN_FIELDS)
    if unknown:
        raise fields.fail(unknown[0], "unknown field")

    kind = data.get("type")
    if kind not in SPEC_TYPES:
        raise fields.fail("type", f"must be one of {list(SPEC_TYPES)}, got {kind!r}")
    beta = fields.number("beta", 1.0, positive=True)
    nu = fields.integer("nu", 0, choices=(0, 1))

    if kind == "scalar":
        a = fields.number("a")
        return ScalarCircleSpec(a, beta, nu)

    phase = fields.phase(beta)
    if kind == "dirac":
        form_name = data.get("form", CircleForm.TILDE.value)
        try:
            form = CircleForm(form_name)
        except ValueError:
            raise fields.fail("form", f"must be 'original' or 'tilde', got {form_name!r}") from None
        a = fields.number("a", 1.0)
        if not 0.0 <= a <= 1.0:
            raise fields.fail("a", f"deformation must lie in [0, 1], got {a!r}")
        if "m" in data:
            mass = fields.number("m", positive=True)
        else:
            mass = phase.max_abs_derivative() + fields.number("m_margin", positive=True)
        return CircleDiracSpec(phase, mass, nu, a, form)

    section = SphereBundleSection1D(phase)
    if "m" in data:
        mass = fields.number("m", positive=True)
    else:
        threshold = -invertibility_margin_section(section, 0.0)
        mass = threshold + fields.number("m_margin", positive=True)
    return DerhamCircleSpec(section, mass)


def spec_to_dict(spec: OperatorSpec) -> Dict[str, Any]:
    """JSON form of a parsed spec (mass always explicit)."""
    if isinstance(spec, ScalarCircleSpec):
        return {"type": "scalar", "a": spec.a, "beta": spec.beta, "nu": spec.nu}
    if isinstance(spec, CircleDiracSpec):
        phase = spec.phase
        extra = {"nu": spec.nu, "a": spec.deformation, "form": spec.form.value, "m": spec.mass, "type": "dirac"}
    else:
        phase = spec.section.psi
        extra = {"m": spec.mass, "type": "derham"}
    fourier = [[j, c.real, c.imag] for j, c in enumerate(phase.coefficients) if c != 0]
    return {"beta": phase.beta, "winding": phase.winding, "fourier": fourier, **extra}


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """Header re,im,mult; canonical order; 17 significant digits."""
    lines = ["re,im,mult"]
    for e in spectrum.eigenvalues:
        lines.append(f"{e.value.real:.16e},{e.value.imag:.16e},{e.multiplicity}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str, source: SpectrumSource = SpectrumSource.SYNTHETIC) -> Spectrum:
    """Parse a spectrum CSV written by spectrum_to_csv.

    Raises:
        SpecParseError: missing header or a malformed row.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["re", "im", "mult"]:
        raise SpecParseError("expected header re,im,mult", line=1)
    records: List[Dict[str, Any]] = []
    for number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise SpecParseError(f"expected 3 columns, got {len(row)}", line=number)
        try:
            records.append({"re": float(row[0]), "im": float(row[1]), "mult": int(row[2])})
        except ValueError as exc:
            raise SpecParseError(f"bad row: {exc}", line=number) from exc
    return Spectrum.from_records(records, source=source)


def read_samples(path: str) -> List[float]:
    """Phase samples, one per line (first CSV column); blank and # lines skipped.

    Raises:
        SpecParseError: unreadable file or a non-numeric value.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read samples file {path}: {exc}", field="samples") from exc
    values: List[float] = []
    for number, line in enumerate(text.splitlines(), start=1):
        cell = line.split(",")[0].strip()
        if not cell or cell.startswith("#"):
            continue
        try:
            values.append(float(cell))
        except ValueError as exc:
            if not values and number == 1:
                continue  # header row
            raise SpecParseError(f"not a number: {cell!r}", field="samples", line=number) from exc
    return values


def write_artifacts(out_dir: str | Path, artifacts: Dict[str, str]) -> List[Path]:
    """Write text artifacts under out_dir (created if needed), sorted by name."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(artifacts):
        target = root / name
        with target.open("w", encoding="utf-8", newline="\n") as f:
            f.write(artifacts[name])
        written.append(target)
        logger.debug("Wrote %s", target)
    return written
