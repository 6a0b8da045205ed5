"""Scenario files: JSON documents validated against a bundled schema."""

from __future__ import annotations

from dataclasses import asdict, replace
from functools import lru_cache
from importlib import resources
import json

import jsonschema

from .geometry import from_semi_axes
from .kinematics import Family, RobotModel
from .ocp import CostSpec, default_cost
from .settings import SolverSettings
from .simulation import Scenario

BUNDLED = ("omni_three_obstacles", "diff_drive_two_obstacles", "obstacle_free")


class ScenarioError(ValueError):
    """Raised for unreadable or invalid scenario documents."""


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files(__package__).joinpath(
        "scenario.schema.json").read_text()
    return json.loads(text)


def _cost(family: Family, overrides: dict | None) -> CostSpec:
    base = default_cost(family)
    if not overrides:
        return base
    fields = asdict(base)
    fields.update({k: tuple(v) for k, v in overrides.items()})
    return CostSpec(**fields)


def from_dict(doc: dict) -> Scenario:
    """Build a ``Scenario`` from an already parsed document."""
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from None
    try:
        m = doc["model"]
        family = Family(m["family"])
        bounds = m.get("input_bounds", {})
        model = RobotModel(family, tuple(m["semi_axes"]),
                           bounds.get("lower"), bounds.get("upper"),
                           m.get("dt", 0.2))
        obstacles = [from_semi_axes(o["semi_axes"][0], o["semi_axes"][1],
                                    o.get("rotation", 0.0), o["center"])
                     for o in doc.get("obstacles", [])]
        mpc = doc.get("mpc", {})
        settings = replace(SolverSettings(), **doc.get("solver", {}))
        return Scenario(
            model=model, x0=tuple(doc["x0"]), obstacles=obstacles,
            cost=_cost(family, doc.get("cost")),
            horizon=mpc.get("horizon", 10),
            inflation_margin=mpc.get("inflation_margin", 0.0),
            constraint_margin=mpc.get("constraint_margin", 0.0),
            settings=settings, duration=doc["duration"],
            name=doc.get("name", "scenario"))
    except (ValueError, TypeError) as exc:
        raise ScenarioError(str(exc)) from None


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)


def load(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def bundled_path(name: str):
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled scenario {name!r}")
    return resources.files(__package__).joinpath("scenarios", name + ".json")


def bundled(name: str) -> Scenario:
    return loads(bundled_path(name).read_text())
