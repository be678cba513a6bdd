"""Scenario files: JSON description of the initial patches, model parameters,
time stepping and outputs.

Example::

    {
      "alpha": 0.25,
      "gamma": null,
      "rho": 1.0,
      "eta": 0.5,
      "seed": 0,
      "shapes": [
        {"type": "disc", "center": [-1.15, 0.0], "radius": 1.0, "coupling": 1.0, "n": 256},
        {"type": "ellipse", "center": [1.6, 0.0], "a": 0.6, "b": 0.4, "angle": 0.3, "n": 128},
        {"type": "fourier", "center": [0.0, 3.0], "coefficients": [[0.5, 0.0], [0.0, 0.05]], "n": 128},
        {"type": "fourier", "center": [3.0, 3.0], "radius": 0.5, "random_modes": 6,
         "amplitude": 0.02, "n": 128}
      ],
      "evolution": {"dt_max": 0.01, "cfl": 0.5, "t_end": 0.5, "reparam_every": 5,
                    "stop_distance": null, "filter_order": 36},
      "outputs": {"directory": "out", "record_every": 5, "checkpoint_every": 0,
                  "emit_plot_data": false}
    }

Fourier coefficients ``[[a_0, b_0], [a_1, b_1], ...]`` define the polar radius
``r(t) = sum_m a_m cos(m t) + b_m sin(m t)``; see :func:`alphapatch.curves.fourier`.
A fourier shape may instead give ``radius``, ``random_modes`` and ``amplitude``,
in which case coefficients are drawn from the scenario seed (one generator per
shape index).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .curves import GeometryError, PatchBoundary, PatchSystem, disc, ellipse, fourier
from .evolution import EvolutionConfig

log = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the offending field."""


_NUM = {"type": "number"}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_COMMON = {"center": _POINT, "coupling": _NUM, "n": {"type": "integer", "minimum": 16}}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["alpha", "shapes"],
    "additionalProperties": False,
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "gamma": {"type": ["number", "null"]},
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "shapes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "object", "additionalProperties": False,
                     "required": ["type", "center", "radius"],
                     "properties": {"type": {"const": "disc"}, "radius": {"type": "number", "exclusiveMinimum": 0},
                                    **_COMMON}},
                    {"type": "object", "additionalProperties": False,
                     "required": ["type", "center", "a", "b"],
                     "properties": {"type": {"const": "ellipse"},
                                    "a": {"type": "number", "exclusiveMinimum": 0},
                                    "b": {"type": "number", "exclusiveMinimum": 0},
                                    "angle": _NUM, **_COMMON}},
                    {"type": "object", "additionalProperties": False,
                     "required": ["type", "center", "coefficients"],
                     "properties": {"type": {"const": "fourier"},
                                    "coefficients": {"type": "array", "minItems": 1, "items": _POINT},
                                    **_COMMON}},
                    {"type": "object", "additionalProperties": False,
                     "required": ["type", "center", "radius", "random_modes", "amplitude"],
                     "properties": {"type": {"const": "fourier"},
                                    "radius": {"type": "number", "exclusiveMinimum": 0},
                                    "random_modes": {"type": "integer", "minimum": 1},
                                    "amplitude": {"type": "number", "minimum": 0},
                                    **_COMMON}},
                ]
            },
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt_max": {"type": "number", "exclusiveMinimum": 0},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "reparam_every": {"type": "integer", "minimum": 1},
                "stop_distance": {"type": ["number", "null"], "minimum": 0},
                "filter_order": {"type": "integer", "minimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "record_every": {"type": "integer", "minimum": 1},
                "checkpoint_every": {"type": "integer", "minimum": 0},
                "emit_plot_data": {"type": "boolean"},
            },
        },
    },
}


@dataclass(frozen=True)
class ShapeSpec:
    type: str
    center: tuple[float, float]
    coupling: float = 1.0
    n: int = 256
    radius: float | None = None
    a: float | None = None
    b: float | None = None
    angle: float | None = None
    coefficients: tuple[tuple[float, float], ...] | None = None
    random_modes: int | None = None
    amplitude: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "center":
                value = list(value)
            elif f.name == "coefficients":
                value = [list(c) for c in value]
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ShapeSpec":
        data = dict(data)
        data["center"] = tuple(float(x) for x in data["center"])
        if "coefficients" in data:
            data["coefficients"] = tuple(tuple(float(x) for x in c) for c in data["coefficients"])
        return cls(**data)

    def build(self, label: int, seed: int) -> PatchBoundary:
        if self.type == "disc":
            return disc(self.center, self.radius, self.n, self.coupling, label)
        if self.type == "ellipse":
            return ellipse(self.center, self.a, self.b, self.angle or 0.0, self.n, self.coupling, label)
        coeffs = self.coefficients
        if coeffs is None:
            rng = np.random.default_rng([seed, label])
            raw = rng.normal(size=(self.random_modes, 2)) * self.amplitude
            coeffs = ((self.radius, 0.0),) + tuple((float(x), float(y)) for x, y in raw)
        return fourier(self.center, coeffs, self.n, self.coupling, label)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    record_every: int = 1
    checkpoint_every: int = 0
    emit_plot_data: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    alpha: float
    shapes: tuple[ShapeSpec, ...]
    gamma: float | None = None    # override of the minimal admissible exponent
    rho: float = 1.0
    eta: float = 0.5
    seed: int = 0
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "rho": self.rho,
            "eta": self.eta,
            "seed": self.seed,
            "shapes": [s.to_dict() for s in self.shapes],
            "evolution": self.evolution.to_dict(),
            "outputs": {f.name: getattr(self.outputs, f.name) for f in fields(self.outputs)},
        }

    def build(self) -> PatchSystem:
        patches = []
        for i, spec in enumerate(self.shapes):
            try:
                patches.append(spec.build(i, self.seed))
            except GeometryError as exc:
                raise ScenarioError(f"shapes[{i}]: {exc}") from exc
        try:
            return PatchSystem(tuple(patches), self.alpha, self.gamma, self.rho, self.eta)
        except GeometryError as exc:
            raise ScenarioError(f"scenario: {exc}") from exc


def _field_path(error: jsonschema.ValidationError) -> str:
    path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in error.absolute_path)
    return path.lstrip(".") or "<root>"


def _specific(error: jsonschema.ValidationError) -> jsonschema.ValidationError:
    """For a failed shape ``oneOf``, the error from the branch whose ``type`` matched."""
    if error.validator != "oneOf" or not error.context:
        return error
    branches: dict[int, list] = {}
    for sub in error.context:
        branches.setdefault(sub.relative_schema_path[0], []).append(sub)
    matching = [errs for errs in branches.values()
                if not any(list(e.relative_path) == ["type"] for e in errs)]
    if not matching:
        kind = error.instance.get("type") if isinstance(error.instance, dict) else None
        error.message = f"unknown shape type {kind!r}; expected disc, ellipse or fourier"
        return error
    return _specific(min(matching, key=len)[0])


def parse_scenario(data: Any) -> ScenarioConfig:
    """Validate a decoded JSON document and build the config (no geometry checks yet)."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = _specific(errors[0])
        raise ScenarioError(f"{_field_path(err)}: {err.message}")
    evo = data.get("evolution", {})
    try:
        evolution = EvolutionConfig(**evo)
    except ValueError as exc:
        raise ScenarioError(f"evolution: {exc}") from exc
    return ScenarioConfig(
        alpha=float(data["alpha"]),
        shapes=tuple(ShapeSpec.from_dict(s) for s in data["shapes"]),
        gamma=data.get("gamma"),
        rho=float(data.get("rho", 1.0)),
        eta=float(data.get("eta", 0.5)),
        seed=int(data.get("seed", 0)),
        evolution=evolution,
        outputs=OutputConfig(**data.get("outputs", {})),
    )


def read_config(path: str | Path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_scenario(data)


def serialize(config: ScenarioConfig) -> str:
    """JSON text of a config; floats use the shortest round-trip decimal form."""
    return json.dumps(config.to_dict(), indent=2)


def load_scenario(path: str | Path) -> tuple[PatchSystem, EvolutionConfig]:
    """Read, validate and build a scenario; logs the derived (k, gamma, exponent)."""
    config = read_config(path)
    system = config.build()
    log.info("alpha=%s k=%d gamma=%s bound_exponent=%s", system.alpha, system.k, system.gamma,
             system.exponent)
    return system, config.evolution
