"""Scenario configuration: JSON schema, defaults, and parsing.

Defaults mirror the reference case study: n=11, d=1.01, c=1.21, tau=0.01,
beta=1/3, g=1, epsilon=0.1 on the complete graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import jsonschema

from .errors import ConfigError, GraphError
from .graphs import WeightedGraph, graph_from_spec
from .sim import SimConfig
from .variance import PlatoonParams

_WEIGHTS_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"uniform": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["uniform"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "range": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "seed": {"type": "integer"},
            },
            "required": ["range", "seed"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "graph": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["complete", "pcycle", "path", "explicit"]},
                "n": {"type": "integer", "minimum": 2},
                "p": {"type": "integer", "minimum": 2},
                "weights": _WEIGHTS_SCHEMA,
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [
                            {"type": "integer", "minimum": 1},
                            {"type": "integer", "minimum": 1},
                            {"type": "number", "exclusiveMinimum": 0},
                        ],
                        "minItems": 3,
                        "maxItems": 3,
                    },
                },
            },
            "required": ["kind", "n"],
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "properties": {
                "d": {"type": "number", "exclusiveMinimum": 0},
                "c": {"type": "number", "minimum": 1},
                "tau": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "g": {"type": "number", "minimum": 0},
                "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "epsilon_sweep": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "minItems": 1,
        },
        "sim": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_burn": {"type": "number", "minimum": 0},
                "t_sample": {"type": "number", "exclusiveMinimum": 0},
                "sample_stride": {"type": "integer", "minimum": 1},
                "n_traj": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "block_size": {"type": "integer", "minimum": 1},
                "chunk_steps": {"type": "integer", "minimum": 1},
                "n_threads": {"type": "integer", "minimum": 1},
                "perturb": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULT_GRAPH = {"kind": "complete", "n": 11, "weights": {"uniform": 1.0}}
DEFAULT_SIM = {"dt": 0.001, "t_sample": 200.0, "n_traj": 32, "seed": 0}


@dataclass(frozen=True)
class ScenarioConfig:
    graph: WeightedGraph
    params: PlatoonParams
    epsilon_sweep: tuple[float, ...] | None
    sim: SimConfig | None
    output_format: str
    output_path: str | None


def parse_scenario(doc: dict) -> ScenarioConfig:
    """Validate a config document against the schema and build the scenario."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config schema violation at {path}: {exc.message}") from exc
    gdoc = doc.get("graph", DEFAULT_GRAPH)
    if gdoc.get("kind") == "explicit" and "edges" not in gdoc:
        raise ConfigError("explicit graph requires an edge list")
    try:
        graph = graph_from_spec(gdoc)
    except (GraphError, KeyError) as exc:
        raise ConfigError(f"invalid graph specification: {exc}") from exc
    pdoc = dict(doc.get("params", {}))
    params = PlatoonParams(n=graph.n, **pdoc)
    sweep = tuple(doc["epsilon_sweep"]) if "epsilon_sweep" in doc else None
    sim = SimConfig(**{**DEFAULT_SIM, **doc["sim"]}) if "sim" in doc else None
    out = doc.get("output", {})
    return ScenarioConfig(graph=graph, params=params, epsilon_sweep=sweep, sim=sim,
                          output_format=out.get("format", "csv"),
                          output_path=out.get("path"))


def load_scenario(path: str) -> ScenarioConfig:
    """Load and parse a JSON scenario file.

    JSON syntax errors are reported with line/column; schema and semantic
    errors raise ConfigError as well.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return parse_scenario(doc)
