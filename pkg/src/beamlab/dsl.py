"""The line-oriented experiment description language.

One statement per line.  ``#`` starts a comment, blank lines are ignored.
Settings are ``name = value`` (``num_seconds``, ``offline_mode``); components
are ``KindName, key=value, key=value, ...``.  Kind names are case-insensitive
and the common short aliases (BS, PBS, HWP, QWP, NDF, ENT) are accepted.
Parsing never raises on malformed input: every bad line yields a diagnostic
with its line and column, and parsing continues.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields as dc_fields
from typing import Callable, Optional

from . import components as comp
from .circuit import GridPlacement
from .constants import DELTA_T

DEFAULT_NUM_SECONDS = 1e-3
SUGGESTED_EXTENSION = ".vqol"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" or "warning"
    line: int  # 1-based
    col: int  # 1-based
    message: str

    def __str__(self) -> str:
        return f"{self.severity} line {self.line} col {self.col}: {self.message}"


@dataclass
class ExperimentSpec:
    """A parsed experiment: run settings plus canonically ordered placements."""

    num_seconds: float = DEFAULT_NUM_SECONDS
    offline_mode: bool = False
    placements: list = field(default_factory=list)
    source_hash: str = ""

    @property
    def num_steps(self) -> int:
        return max(1, round(self.num_seconds / DELTA_T))


@dataclass
class ParseResult:
    spec: Optional[ExperimentSpec]
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.spec is not None and not any(
            d.severity == "error" for d in self.diagnostics
        )


class _BadValue(ValueError):
    pass


def _float_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise _BadValue(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise _BadValue(f"not finite: {text!r}")
    return value


def _nonneg(text: str) -> float:
    value = _float_value(text)
    if value < 0:
        raise _BadValue(f"must be nonnegative, got {text}")
    return value


def _unit_interval(text: str) -> float:
    value = _float_value(text)
    if not 0.0 <= value <= 1.0:
        raise _BadValue(f"must be in [0, 1], got {text}")
    return value


def _rotator_angle(text: str) -> float:
    value = _float_value(text)
    if not 0.0 <= value <= 90.0:
        raise _BadValue(f"must be in [0, 90] degrees, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = _float_value(text)
    if value != int(value) or value < 0:
        raise _BadValue(f"must be a nonnegative integer, got {text}")
    return int(value)


def _dcr_value(text: str) -> float:
    value = _nonneg(text)
    if value * DELTA_T > 1.0:
        raise _BadValue(f"dark count probability exceeds 1 (dcr {text})")
    return value


def _enum(*options: str) -> Callable[[str], str]:
    canon = {o.upper(): o for o in options}

    def parse(text: str) -> str:
        key = text.strip().upper()
        if key not in canon:
            raise _BadValue(f"expected one of {', '.join(options)}, got {text!r}")
        return canon[key]

    return parse


@dataclass(frozen=True)
class _Field:
    key: str
    attr: str
    parse: Callable[[str], object]


@dataclass(frozen=True)
class _KindSpec:
    name: str  # canonical spelling used when serializing
    params_cls: type
    aliases: tuple
    fields: tuple


_KIND_SPECS = (
    _KindSpec("Laser", comp.Laser, (), (
        _Field("power", "power", _nonneg),
        _Field("polarization", "polarization", _enum("H", "V", "D", "A", "R", "L")),
    )),
    _KindSpec("LED", comp.LED, (), (_Field("power", "power", _nonneg),)),
    _KindSpec("Polarizer", comp.Polarizer, (), (
        _Field("angle", "theta", _float_value),
        _Field("phi", "phi", _float_value),
    )),
    _KindSpec("PowerMeter", comp.PowerMeter, (), ()),
    _KindSpec("Detector", comp.Detector, (), (_Field("dcr", "dcr", _dcr_value),)),
    _KindSpec("BeamSplitter", comp.BeamSplitter, ("BS",), (_Field("r", "r", _unit_interval),)),
    _KindSpec("Mirror", comp.Mirror, (), ()),
    _KindSpec("PolarizingBeamSplitter", comp.PolarizingBeamSplitter, ("PBS",), (
        _Field("basis", "basis", _enum("HV", "DA", "RL")),
    )),
    _KindSpec("HalfWavePlate", comp.HalfWavePlate, ("HWP",), (
        _Field("angle", "theta", _float_value),
    )),
    _KindSpec("QuarterWavePlate", comp.QuarterWavePlate, ("QWP",), (
        _Field("angle", "theta", _float_value),
    )),
    _KindSpec("PhaseDelay", comp.PhaseDelay, (), (_Field("phi", "phi", _float_value),)),
    _KindSpec("Dephaser", comp.Dephaser, (), ()),
    _KindSpec("TimeDelay", comp.TimeDelay, (), (_Field("steps", "steps", _nonneg_int),)),
    _KindSpec("Rotator", comp.Rotator, (), (_Field("angle", "theta", _rotator_angle),)),
    _KindSpec("PhaseRetarder", comp.PhaseRetarder, (), (_Field("phi", "phi", _float_value),)),
    _KindSpec("Depolarizer", comp.Depolarizer, (), ()),
    _KindSpec("NeutralDensityFilter", comp.NeutralDensityFilter, ("NDF",), (
        _Field("d", "d", _nonneg),
    )),
    _KindSpec("BeamBlocker", comp.BeamBlocker, (), ()),
    _KindSpec("EntanglementSource", comp.EntanglementSource, ("ENT",), (
        _Field("type", "ent_type", _enum("I", "II")),
        _Field("r", "r", _nonneg),
        _Field("varphi", "varphi", _float_value),
        _Field("directions", "directions", _enum("LR", "LU", "LD", "UR", "DR", "UD")),
    )),
)

_KIND_BY_ALIAS = {}
for _spec in _KIND_SPECS:
    _KIND_BY_ALIAS[_spec.name.lower()] = _spec
    for _alias in _spec.aliases:
        _KIND_BY_ALIAS[_alias.lower()] = _spec

_SPEC_BY_CLS = {s.params_cls: s for s in _KIND_SPECS}

_ORIENTATIONS = {0, 90, 180, 270}


def _split_pairs(line: str):
    """Comma-separated segments of a line with their 1-based start columns."""

    segments = []
    start = 0
    for i, ch in enumerate(line + ","):
        if ch == ",":
            segments.append((line[start:i], start + 1))
            start = i + 1
    return segments


def parse(text: str) -> ParseResult:
    """Parse experiment text; always returns, collecting all diagnostics."""

    diagnostics: list = []
    num_seconds = DEFAULT_NUM_SECONDS
    offline_mode = False
    placements: list = []

    def error(line_no: int, col: int, message: str) -> None:
        diagnostics.append(ParseDiagnostic("error", line_no, col, message))

    def warning(line_no: int, col: int, message: str) -> None:
        diagnostics.append(ParseDiagnostic("warning", line_no, col, message))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.strip().startswith("<JS>"):
            error(
                line_no,
                line.index("<JS>") + 1,
                "embedded scripting is not supported; use the CLI sweep command "
                "for parameter scans",
            )
            continue

        segments = _split_pairs(line)
        head, head_col = segments[0]
        if "=" in head:  # settings line
            name, _, value = head.partition("=")
            name = name.strip().lower()
            value = value.strip()
            if name == "num_seconds":
                try:
                    seconds = _float_value(value)
                except _BadValue as exc:
                    error(line_no, head_col, f"num_seconds: {exc}")
                    continue
                steps = round(seconds / DELTA_T)
                if seconds <= 0 or steps < 1:
                    error(line_no, head_col, "num_seconds must cover at least one time step")
                    continue
                if abs(steps * DELTA_T - seconds) > 1e-9 * max(1.0, abs(seconds)):
                    warning(
                        line_no,
                        head_col,
                        f"num_seconds rounded to {steps * DELTA_T:g} "
                        f"(whole number of {DELTA_T:g} s steps)",
                    )
                num_seconds = steps * DELTA_T
            elif name == "offline_mode":
                if value.lower() in ("true", "false"):
                    offline_mode = value.lower() == "true"
                else:
                    error(line_no, head_col, f"offline_mode must be True or False, got {value!r}")
            else:
                error(line_no, head_col, f"unknown setting {name!r}")
            continue

        # component line
        kind_name = head.strip()
        spec = _KIND_BY_ALIAS.get(kind_name.lower())
        if spec is None:
            error(line_no, head_col + _leading_ws(head), f"unknown component kind {kind_name!r}")
            continue

        known = {f.key: f for f in spec.fields}
        seen: dict = {}
        x = y = None
        orientation = 0
        label = None
        line_ok = True
        for segment, col in segments[1:]:
            if not segment.strip():
                continue
            if "=" not in segment:
                error(line_no, col + _leading_ws(segment), f"expected key=value, got {segment.strip()!r}")
                line_ok = False
                break
            key, _, value = segment.partition("=")
            key = key.strip().lower()
            value = value.strip()
            value_col = col + segment.index("=") + 1
            try:
                if key == "x":
                    x = _nonneg_int(value)
                elif key == "y":
                    y = _nonneg_int(value)
                elif key == "orientation":
                    orientation = _nonneg_int(value)
                    if orientation not in _ORIENTATIONS:
                        raise _BadValue(f"orientation must be one of 0, 90, 180, 270, got {value}")
                elif key == "id":
                    if not value:
                        raise _BadValue("id must not be empty")
                    label = value
                elif key in known:
                    seen[known[key].attr] = known[key].parse(value)
                else:
                    error(line_no, col + _leading_ws(segment), f"unknown key {key!r} for {spec.name}")
                    line_ok = False
                    break
            except _BadValue as exc:
                error(line_no, value_col, f"{key}: {exc}")
                line_ok = False
                break
        if not line_ok:
            continue
        if x is None or y is None:
            missing = "x" if x is None else "y"
            error(line_no, head_col, f"{spec.name} is missing required key {missing!r}")
            continue
        if spec.params_cls is comp.EntanglementSource and "varphi" not in seen:
            seen["varphi"] = 180.0 if seen.get("ent_type", "I") == "II" else 0.0
        params = spec.params_cls(**seen)
        placements.append(GridPlacement(params, x, y, orientation, label))

    placements.sort(key=lambda p: (p.y, p.x))
    spec_obj = None
    if not any(d.severity == "error" for d in diagnostics):
        spec_obj = ExperimentSpec(
            num_seconds=num_seconds,
            offline_mode=offline_mode,
            placements=placements,
            source_hash=hashlib.sha256(text.encode()).hexdigest(),
        )
    return ParseResult(spec_obj, diagnostics)


def _leading_ws(text: str) -> int:
    return len(text) - len(text.lstrip())


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


def serialize(spec: ExperimentSpec) -> str:
    """Canonical text: settings first, then components in (y, x) order.

    Only non-default keys are written (besides the mandatory x and y), so
    ``parse(serialize(s))`` reproduces ``s`` exactly.
    """

    lines = []
    if spec.num_seconds != DEFAULT_NUM_SECONDS:
        lines.append(f"num_seconds = {_format_value(spec.num_seconds)}")
    if spec.offline_mode:
        lines.append("offline_mode = True")

    for placement in sorted(spec.placements, key=lambda p: (p.y, p.x)):
        kind_spec = _SPEC_BY_CLS[type(placement.params)]
        parts = [kind_spec.name, f"x={placement.x}", f"y={placement.y}"]
        if placement.orientation:
            parts.append(f"orientation={placement.orientation}")
        if placement.label:
            parts.append(f"id={placement.label}")
        defaults = {f.name: f.default for f in dc_fields(placement.params)}
        if isinstance(placement.params, comp.EntanglementSource):
            # varphi's effective default follows the source type
            defaults["varphi"] = 180.0 if placement.params.ent_type == "II" else 0.0
        for fld in kind_spec.fields:
            value = getattr(placement.params, fld.attr)
            if value != defaults[fld.attr]:
                parts.append(f"{fld.key}={_format_value(value)}")
        lines.append(", ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_file(path) -> ParseResult:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# Parameter overrides (CLI --set / --sweep, pipelines, tests)
# ---------------------------------------------------------------------------


def resolve_component(spec: ExperimentSpec, selector: str) -> int:
    """Index of the placement a selector names.

    A selector is either a component id given in the text, or a kind name /
    alias with an optional 1-based ordinal suffix counting components of
    that kind in (y, x) order: ``meas``, ``polarizer``, ``detector2``, ``hwp1``.
    """

    wanted = selector.strip().lower()
    for i, placement in enumerate(spec.placements):
        if placement.label is not None and placement.label.lower() == wanted:
            return i
    base = wanted.rstrip("0123456789")
    ordinal = int(wanted[len(base):]) if len(base) < len(wanted) else 1
    kind_spec = _KIND_BY_ALIAS.get(base)
    if kind_spec is None:
        raise KeyError(f"no component matches selector {selector!r}")
    seen = 0
    for i, placement in enumerate(spec.placements):
        if type(placement.params) is kind_spec.params_cls:
            seen += 1
            if seen == ordinal:
                return i
    raise KeyError(
        f"no component matches selector {selector!r} "
        f"(found {seen} of kind {kind_spec.name})"
    )


def set_param(spec: ExperimentSpec, selector: str, param: str, value) -> ExperimentSpec:
    """Copy of the spec with one component parameter replaced.

    ``param`` is a DSL key of the component's kind, or one of x, y,
    orientation.  String values go through the same validation as the
    parser; typed values are taken as they are.
    """

    import dataclasses

    index = resolve_component(spec, selector)
    placement = spec.placements[index]
    kind_spec = _SPEC_BY_CLS[type(placement.params)]
    key = param.strip().lower()

    if key in ("x", "y"):
        value = _nonneg_int(str(value))
        placement = dataclasses.replace(placement, **{key: value})
    elif key == "orientation":
        value = _nonneg_int(str(value))
        if value not in _ORIENTATIONS:
            raise ValueError(f"orientation must be one of 0, 90, 180, 270, got {value}")
        placement = dataclasses.replace(placement, orientation=value)
    else:
        for fld in kind_spec.fields:
            if fld.key == key:
                parsed = fld.parse(str(value)) if isinstance(value, str) else value
                params = dataclasses.replace(placement.params, **{fld.attr: parsed})
                placement = dataclasses.replace(placement, params=params)
                break
        else:
            raise KeyError(f"{kind_spec.name} has no parameter {param!r}")

    placements = list(spec.placements)
    placements[index] = placement
    placements.sort(key=lambda p: (p.y, p.x))
    return dataclasses.replace(spec, placements=placements)


def with_overrides(spec: ExperimentSpec, assignments: dict) -> ExperimentSpec:
    """Apply ``{"selector.param": value}`` assignments to a copy of the spec."""

    out = spec
    for target, value in assignments.items():
        selector, _, param = target.rpartition(".")
        if not selector:
            raise KeyError(f"override {target!r} must look like component.param")
        out = set_param(out, selector, param, value)
    return out
