"""Declarative experiment files.

An experiment is a JSON object::

    {
      "scenario": {"nbox": {"n": 2}},
      "measurement": {"open_box": {"i": 1}},
      "semantics": "pure",
      "queries": ["conditional", {"guessing_game": {"opened": 1, "guess": 2}}],
      "montecarlo": {"trials": 100000, "seed": 1729},
      "format": "text"
    }

Scenarios are ``{"nbox": {"n": N}}`` or ``{"custom": {"initial": amps,
"final": amps, "dim": d}}`` with amplitudes as ``[re, im]`` pairs (``dim``
optional). Measurements are ``{"open_box": {"i": i, "force": false}}``,
``"all_boxes"`` (or ``{"all_boxes": {}}``), ``{"indistinguishable": {"i": i}}``
or ``{"custom": {"projectors": [{"label": "a", "span": [vector, ...]}, ...]}}``.
Mixture semantics always use the standard basis as pointer basis.

Unknown keys, duplicate keys and non-finite numbers are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NBoxError, ParseError, PointerBasisError, ValidationError
from ..hilbert import ACCUM_TOL, projector_from_span
from ..measurement import Mode, ProjectiveMeasurement, UpdateSemantics, branch_weights
from ..nbox import (
    NBoxScenario,
    all_boxes_measurement,
    indistinguishable_measurement,
    open_box_measurement,
)
from ..pps import PrePostEnsemble

__all__ = [
    "QUERY_NAMES",
    "FORMATS",
    "MAX_SEED",
    "MAX_HARNESS_DIM",
    "CustomScenario",
    "MeasurementSpec",
    "Query",
    "MonteCarloSpec",
    "ExperimentSpec",
    "parse_experiment",
    "experiment_from_dict",
    "build_ensemble",
]

QUERY_NAMES = (
    "conditional",
    "unconditional",
    "joint",
    "residual_state",
    "refinement_report",
    "guessing_game",
    "raw_eq9",
)
FORMATS = ("text", "csv", "json")
MAX_SEED = 2**64 - 1
MAX_TRIALS = 10**9
# full measurement families are dense, memory grows as dim**3
MAX_HARNESS_DIM = 129


@dataclass(frozen=True, eq=False)
class CustomScenario:
    initial: np.ndarray
    final: np.ndarray

    @property
    def dim(self) -> int:
        return self.initial.shape[0]


@dataclass(frozen=True)
class MeasurementSpec:
    kind: str
    box: int | None = None
    force: bool = False
    spans: tuple = ()  # custom only: ((label, ((re, im), ...) rows), ...)


@dataclass(frozen=True)
class Query:
    name: str
    params: tuple = ()  # (key, value) pairs in schema order

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class MonteCarloSpec:
    trials: int
    seed: int


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    scenario: NBoxScenario | CustomScenario
    measurement: MeasurementSpec
    semantics: Mode
    queries: tuple[Query, ...]
    montecarlo: MonteCarloSpec | None = None
    format: str = "text"
    source: dict = field(default_factory=dict, repr=False)

    @property
    def is_nbox(self) -> bool:
        return isinstance(self.scenario, NBoxScenario)

    def to_dict(self) -> dict:
        """Canonical echo of the experiment, stable across runs."""
        return _canonical(self)


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def parse_experiment(text) -> ExperimentSpec:
    """Parse and validate experiment text.

    Raises
    ------
    ParseError
        Malformed JSON, with line and column.
    ValidationError
        Well-formed but invalid; ``err.path`` names the offending field.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"experiment is not UTF-8: {exc.reason}") from None
    if not isinstance(text, str):
        raise ParseError(f"expected text, got {type(text).__name__}")
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    except RecursionError:
        raise ParseError("experiment nested too deeply") from None
    return experiment_from_dict(doc)


# -- field helpers -----------------------------------------------------------


def _obj(value, path, allowed, required=()):
    if not isinstance(value, dict):
        raise ValidationError(path, f"expected an object, got {_kind(value)}")
    for key in value:
        if key not in allowed:
            raise ValidationError(_join(path, key), f"unknown key; allowed: {', '.join(allowed)}")
    for key in required:
        if key not in value:
            raise ValidationError(_join(path, key), "required key missing")
    return value


def _join(path, key):
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _kind(value):
    return "null" if value is None else type(value).__name__


def _int(value, path, lo, hi):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(path, f"expected an integer, got {_kind(value)}")
    if not lo <= value <= hi:
        raise ValidationError(path, f"{value} outside {lo}..{hi}")
    return value


def _bool(value, path):
    if not isinstance(value, bool):
        raise ValidationError(path, f"expected true or false, got {_kind(value)}")
    return value


def _choice(value, path, choices):
    if not isinstance(value, str) or value not in choices:
        raise ValidationError(path, f"expected one of {', '.join(choices)}, got {value!r}")
    return value


def _single_key(value, path, choices):
    """Accept ``"name"`` or ``{"name": {...}}``; return (name, body)."""
    if isinstance(value, str):
        return _choice(value, path, choices), {}
    if not isinstance(value, dict) or len(value) != 1:
        raise ValidationError(path, f"expected a string or an object with one key of {', '.join(choices)}")
    (name, body), = value.items()
    _choice(name, path, choices)
    if body is None:
        body = {}
    return name, body


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {_kind(value)}")
    try:
        x = float(value)
    except OverflowError:
        raise ValidationError(path, "number out of floating-point range") from None
    if not math.isfinite(x):
        raise ValidationError(path, "number must be finite")
    return x


def _amplitudes(value, path):
    if not isinstance(value, list) or not value:
        raise ValidationError(path, "expected a non-empty list of [re, im] pairs")
    if len(value) > MAX_HARNESS_DIM:
        raise ValidationError(path, f"dimension exceeds {MAX_HARNESS_DIM}")
    out = []
    for k, pair in enumerate(value):
        p = _join(path, k)
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValidationError(p, "expected an [re, im] pair")
        out.append((_number(pair[0], _join(p, 0)), _number(pair[1], _join(p, 1))))
    return tuple(out)


def _to_array(pairs):
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


# -- sections ----------------------------------------------------------------


def _scenario(value):
    name, body = _single_key(value, "scenario", ("nbox", "custom"))
    path = f"scenario.{name}"
    if name == "nbox":
        _obj(body, path, ("n",), ("n",))
        return NBoxScenario(_int(body["n"], f"{path}.n", 2, MAX_HARNESS_DIM - 1))
    _obj(body, path, ("dim", "initial", "final"), ("initial", "final"))
    initial = _amplitudes(body["initial"], f"{path}.initial")
    final = _amplitudes(body["final"], f"{path}.final")
    dim = _int(body["dim"], f"{path}.dim", 1, MAX_HARNESS_DIM) if "dim" in body else len(initial)
    for key, amps in (("initial", initial), ("final", final)):
        if len(amps) != dim:
            raise ValidationError(f"{path}.{key}", f"length {len(amps)} does not match dimension {dim}")
        norm = float(np.linalg.norm(_to_array(amps)))
        if abs(norm - 1.0) > ACCUM_TOL:
            raise ValidationError(f"{path}.{key}", f"state has norm {norm:.12g}, expected 1")
    return CustomScenario(_to_array(initial), _to_array(final))


def _measurement(value, scenario):
    name, body = _single_key(value, "measurement", ("open_box", "all_boxes", "indistinguishable", "custom"))
    path = f"measurement.{name}"
    if name != "custom" and not isinstance(scenario, NBoxScenario):
        raise ValidationError(path, "box measurements need an nbox scenario")
    if name == "all_boxes":
        _obj(body, path, ())
        return MeasurementSpec("all_boxes")
    if name in ("open_box", "indistinguishable"):
        allowed = ("i", "force") if name == "open_box" else ("i",)
        _obj(body, path, allowed, ("i",))
        force = _bool(body.get("force", False), f"{path}.force")
        top = scenario.dim if force else scenario.n
        return MeasurementSpec(name, _int(body["i"], f"{path}.i", 1, top), force)
    _obj(body, path, ("projectors",), ("projectors",))
    items = body["projectors"]
    if not isinstance(items, list) or not items:
        raise ValidationError(f"{path}.projectors", "expected a non-empty list")
    spans = []
    for k, item in enumerate(items):
        p = f"{path}.projectors[{k}]"
        _obj(item, p, ("label", "span"), ("span",))
        label = item.get("label", f"outcome-{k + 1}")
        if not isinstance(label, str) or not label:
            raise ValidationError(f"{p}.label", "expected a non-empty string")
        vectors = item["span"]
        if not isinstance(vectors, list) or not vectors:
            raise ValidationError(f"{p}.span", "expected a non-empty list of vectors")
        rows = []
        for v_index, v in enumerate(vectors):
            amps = _amplitudes(v, f"{p}.span[{v_index}]")
            if len(amps) != scenario.dim:
                raise ValidationError(
                    f"{p}.span[{v_index}]", f"length {len(amps)} does not match dimension {scenario.dim}"
                )
            rows.append(amps)
        spans.append((label, tuple(rows)))
    spec = MeasurementSpec("custom", spans=tuple(spans))
    try:
        _custom_measurement(spec)
    except (NBoxError, ValueError, ArithmeticError) as exc:
        raise ValidationError(f"{path}.projectors", str(exc)) from None
    return spec


def _queries(value, scenario, measurement):
    if not isinstance(value, list) or not value:
        raise ValidationError("queries", "expected a non-empty list")
    out = []
    for k, item in enumerate(value):
        path = f"queries[{k}]"
        name, body = _single_key(item, path, QUERY_NAMES)
        qpath = f"{path}.{name}"
        needs_nbox = name in ("refinement_report", "guessing_game")
        if needs_nbox and not isinstance(scenario, NBoxScenario):
            raise ValidationError(path, f"{name} needs an nbox scenario")
        if name == "guessing_game":
            _obj(body, qpath, ("opened", "guess"), ("opened", "guess"))
            params = (
                ("opened", _int(body["opened"], f"{qpath}.opened", 1, scenario.n)),
                ("guess", _int(body["guess"], f"{qpath}.guess", 1, scenario.n)),
            )
        elif name == "raw_eq9":
            _obj(body, qpath, ("i",), ("i",))
            params = (("i", _int(body["i"], f"{qpath}.i", 1, scenario.dim)),)
        elif name == "refinement_report":
            _obj(body, qpath, ("i",))
            if "i" in body:
                box = _int(body["i"], f"{qpath}.i", 1, scenario.n)
            elif measurement.kind in ("open_box", "indistinguishable") and measurement.box <= scenario.n:
                box = measurement.box
            else:
                raise ValidationError(f"{qpath}.i", "box index required for this measurement")
            params = (("i", box),)
        else:
            _obj(body, qpath, ())
            params = ()
        out.append(Query(name, params))
    return tuple(out)


def _montecarlo(value):
    _obj(value, "montecarlo", ("trials", "seed"), ("trials", "seed"))
    return MonteCarloSpec(
        _int(value["trials"], "montecarlo.trials", 1, MAX_TRIALS),
        _int(value["seed"], "montecarlo.seed", 0, MAX_SEED),
    )


def experiment_from_dict(doc) -> ExperimentSpec:
    """Validate an already-decoded experiment object."""
    _obj(
        doc,
        "",
        ("scenario", "measurement", "semantics", "queries", "montecarlo", "format"),
        ("scenario", "measurement", "semantics", "queries"),
    )
    scenario = _scenario(doc["scenario"])
    measurement = _measurement(doc["measurement"], scenario)
    semantics = Mode(_choice(doc["semantics"], "semantics", tuple(m.value for m in Mode)))
    queries = _queries(doc["queries"], scenario, measurement)
    montecarlo = _montecarlo(doc["montecarlo"]) if doc.get("montecarlo") is not None else None
    fmt = _choice(doc.get("format", "text"), "format", FORMATS)
    spec = ExperimentSpec(scenario, measurement, semantics, queries, montecarlo, fmt, doc)
    if semantics is Mode.MIXTURE:
        _check_mixture(spec)
    return spec


def _check_mixture(spec):
    e = build_ensemble(spec)
    for label, p in zip(e.measurement.labels, e.measurement.projectors):
        try:
            branch_weights(e.initial, p, e.semantics.pointer_basis)
        except PointerBasisError as exc:
            raise ValidationError("semantics", f"mixture needs box-aligned outcomes; {label!r}: {exc}") from None


# -- construction ------------------------------------------------------------


def _custom_measurement(m: MeasurementSpec) -> ProjectiveMeasurement:
    projectors = [projector_from_span([_to_array(row) for row in rows]) for _, rows in m.spans]
    return ProjectiveMeasurement(projectors, [label for label, _ in m.spans])


def build_measurement(spec: ExperimentSpec) -> ProjectiveMeasurement:
    m, s = spec.measurement, spec.scenario
    if m.kind == "open_box":
        return open_box_measurement(s, m.box, force=m.force)
    if m.kind == "all_boxes":
        return all_boxes_measurement(s)
    if m.kind == "indistinguishable":
        return indistinguishable_measurement(s, m.box)
    return _custom_measurement(m)


def build_ensemble(spec: ExperimentSpec) -> PrePostEnsemble:
    s = spec.scenario
    return PrePostEnsemble(
        s.initial, s.final, build_measurement(spec), UpdateSemantics.computational(spec.semantics, s.dim)
    )


def _pairs(vec):
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in vec]


def _canonical(spec: ExperimentSpec) -> dict:
    s = spec.scenario
    if isinstance(s, NBoxScenario):
        scenario = {"nbox": {"n": s.n}}
    else:
        scenario = {"custom": {"dim": s.dim, "initial": _pairs(s.initial), "final": _pairs(s.final)}}
    m = spec.measurement
    if m.kind == "all_boxes":
        measurement = {"all_boxes": {}}
    elif m.kind == "open_box":
        body = {"i": m.box}
        if m.force:
            body["force"] = True
        measurement = {"open_box": body}
    elif m.kind == "indistinguishable":
        measurement = {"indistinguishable": {"i": m.box}}
    else:
        measurement = {
            "custom": {
                "projectors": [
                    {"label": label, "span": [[list(z) for z in row] for row in rows]} for label, rows in m.spans
                ]
            }
        }
    out = {
        "scenario": scenario,
        "measurement": measurement,
        "semantics": spec.semantics.value,
        "queries": [q.name if not q.params else {q.name: dict(q.params)} for q in spec.queries],
    }
    if spec.montecarlo is not None:
        out["montecarlo"] = {"trials": spec.montecarlo.trials, "seed": spec.montecarlo.seed}
    out["format"] = spec.format
    return out
