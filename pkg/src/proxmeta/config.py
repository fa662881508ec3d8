"""Scenario JSON configs: schema validation, parsing and re-serialization."""
from __future__ import annotations

import json
from dataclasses import replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .engine import Scenario
from .geometry import SpaceInstance
from .objective import Objective, evaluate
from .rates import RateFn, as_fraction, fraction_str
from .schedule import WeightSchedule, certify

_RATIONAL = {
    "oneOf": [
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
        {"type": "integer"},
    ]
}
_NUMBER = {"oneOf": [{"type": "number"}, _RATIONAL]}
_VECTOR = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_AST = {"type": "object", "required": ["op"]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["space", "objective", "schedule", "start", "b", "seed"],
    "properties": {
        "name": {"type": "string"},
        "space": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "dimension"],
            "properties": {
                "kind": {"enum": ["euclidean"]},
                "dimension": {"type": "integer", "minimum": 1},
            },
        },
        "objective": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "parameters", "known_min_value"],
            "properties": {
                "kind": {"enum": ["quadratic", "l1_norm", "ball_indicator", "box_indicator", "smooth_custom"]},
                "parameters": {"type": "object"},
                "known_min_value": {"type": "number"},
                "known_minimizer": _VECTOR,
            },
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "c"],
            "properties": {
                "kind": {"enum": ["constant", "linear", "harmonic"]},
                "c": _RATIONAL,
                "theta": _AST,
            },
        },
        "start": _VECTOR,
        "b": _RATIONAL,
        "seed": {"type": "integer"},
        "alpha": _AST,
    },
}

_PARAMS = {
    "quadratic": ({"anchor"}, {"weight"}),
    "l1_norm": (set(), {"scale", "dimension"}),
    "ball_indicator": ({"center", "radius"}, set()),
    "box_indicator": ({"lower", "upper"}, set()),
    "smooth_custom": ({"family", "anchor"}, {"scale"}),
}


class ConfigError(ValueError):
    """Invalid scenario config; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _num(x) -> float:
    return float(as_fraction(x)) if isinstance(x, str) else float(x)


def _objective(node: dict, dimension: int) -> Objective:
    kind, p = node["kind"], node["parameters"]
    required, optional = _PARAMS[kind]
    missing = required - set(p)
    if missing:
        raise ConfigError("objective.parameters", f"missing {sorted(missing)}")
    extra = set(p) - required - optional
    if extra:
        raise ConfigError("objective.parameters", f"unknown fields {sorted(extra)}")
    try:
        if kind == "quadratic":
            f = Objective.quadratic(p["anchor"], _num(p.get("weight", 1)))
        elif kind == "l1_norm":
            f = Objective.l1_norm(int(p.get("dimension", dimension)), _num(p.get("scale", 1)))
        elif kind == "ball_indicator":
            f = Objective.ball_indicator(p["center"], _num(p["radius"]))
        elif kind == "box_indicator":
            f = Objective.box_indicator(p["lower"], p["upper"])
        else:
            if p["family"] != "logcosh":
                raise ConfigError("objective.parameters.family", f"unknown smooth family {p['family']!r}")
            f = Objective.logcosh(p["anchor"], _num(p.get("scale", 1)))
    except ConfigError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError("objective.parameters", str(exc)) from exc
    if f.dimension != dimension:
        raise ConfigError("objective.parameters", f"dimension {f.dimension} differs from space dimension {dimension}")
    if abs(node["known_min_value"] - f.known_min_value) > 1e-12:
        raise ConfigError("objective.known_min_value", f"{kind} has minimum value {f.known_min_value}")
    xm = node.get("known_minimizer")
    if xm is None:
        return replace(f, known_minimizer=None)
    if len(xm) != dimension:
        raise ConfigError("objective.known_minimizer", "wrong dimension")
    if abs(evaluate(f, xm) - f.known_min_value) > 1e-10:
        raise ConfigError("objective.known_minimizer", "does not attain known_min_value")
    xm = np.array(xm, dtype=np.float64)
    xm.setflags(write=False)
    return replace(f, known_minimizer=xm)


def parse_config(doc: dict) -> Scenario:
    """Validate a config document and build the :class:`Scenario`."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(where, exc.message) from None
    space = SpaceInstance(doc["space"]["dimension"], doc["space"]["kind"])
    objective = _objective(doc["objective"], space.dimension)

    sched = doc["schedule"]
    try:
        c = as_fraction(sched["c"])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("schedule.c", str(exc)) from None
    if c <= 0:
        raise ConfigError("schedule.c", "must be positive")
    try:
        theta = RateFn.from_json(sched["theta"]) if "theta" in sched else None
        ws = certify(WeightSchedule(sched["kind"], c, theta=theta))
    except ValueError as exc:
        raise ConfigError("schedule.theta", str(exc)) from None

    try:
        b = as_fraction(doc["b"])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("b", f"not a rational: {exc}") from None
    if b <= 0:
        raise ConfigError("b", "must be positive")
    if len(doc["start"]) != space.dimension:
        raise ConfigError("start", "wrong dimension")
    alpha = None
    if "alpha" in doc:
        try:
            alpha = RateFn.from_json(doc["alpha"])
        except ValueError as exc:
            raise ConfigError("alpha", str(exc)) from None
    return Scenario(
        space=space, objective=objective, schedule=ws, start=doc["start"], b=b,
        seed=doc["seed"], name=doc.get("name", "scenario"), alpha_override=alpha,
    )


def scenario_to_config(sc: Scenario) -> dict:
    obj = sc.objective.to_json()
    if sc.minimizer is None:
        obj.pop("known_minimizer", None)
    else:
        obj["known_minimizer"] = sc.minimizer.tolist()
    doc = {
        "name": sc.name,
        "space": sc.space.to_json(),
        "objective": obj,
        "schedule": sc.schedule.to_json(),
        "start": sc.start.tolist(),
        "b": fraction_str(sc.b),
        "seed": sc.seed,
    }
    if sc.alpha_override is not None:
        doc["alpha"] = sc.alpha_override.to_json()
    return doc


def load_config(path) -> Scenario:
    path = Path(path)
    with path.open() as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    doc.setdefault("name", path.stem)
    return parse_config(doc)


def load_scenarios(path) -> list[Scenario]:
    """A single config file, or every ``*.json`` in a directory (sorted)."""
    path = Path(path)
    if path.is_dir():
        return [load_config(p) for p in sorted(path.glob("*.json"))]
    return [load_config(path)]


def builtin_scenario_dir() -> Path:
    return Path(str(resources.files("proxmeta") / "scenarios"))


def builtin_scenarios() -> list[Scenario]:
    return load_scenarios(builtin_scenario_dir())
