"""Scenario configuration: TOML files validated against a JSON schema."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

TASKS = ["evolve", "exact", "compare_exact", "compare_fock", "wigner",
         "purity", "heller_check"]
FORMATS = ["csv", "json", "bin", "png"]

_vec2 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_mat2 = {"type": "array", "items": _vec2, "minItems": 2, "maxItems": 2}
_squeezed = {
    "type": "object",
    "additionalProperties": False,
    "required": ["center"],
    "properties": {"center": _vec2, "omega": {"type": "number", "exclusiveMinimum": 0}},
}


def _params_rule(field, value, params_schema):
    return {"if": {"properties": {field: {"const": value}}},
            "then": {"properties": {"params": params_schema}}}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gausschord scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["hamiltonian", "initial", "time"],
    "properties": {
        "hbar": {"type": "number", "exclusiveMinimum": 0},
        "hamiltonian": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["quadratic", "quartic", "pendulum"]},
                "params": {"type": "object"},
            },
            "allOf": [
                _params_rule("name", "quadratic", {
                    "additionalProperties": False,
                    "properties": {"Hmat": _mat2}}),
                _params_rule("name", "quartic", {
                    "additionalProperties": False,
                    "properties": {"eps": {"type": "number"},
                                   "m": {"type": "number", "exclusiveMinimum": 0}}}),
                _params_rule("name", "pendulum", {
                    "additionalProperties": False,
                    "properties": {"k": {"type": "number"},
                                   "m": {"type": "number", "exclusiveMinimum": 0}}}),
            ],
        },
        "coupling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"l_re": _vec2, "l_im": _vec2},
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "params"],
            "properties": {
                "kind": {"enum": ["coherent", "squeezed", "cat", "ensemble-file"]},
                "params": {"type": "object"},
                "normalize": {"type": "boolean"},
            },
            "allOf": [
                _params_rule("kind", "coherent", _squeezed),
                _params_rule("kind", "squeezed", _squeezed),
                _params_rule("kind", "cat", {
                    "additionalProperties": False,
                    "required": ["a", "b"],
                    "properties": {"a": _squeezed, "b": _squeezed}}),
                _params_rule("kind", "ensemble-file", {
                    "additionalProperties": False,
                    "required": ["path"],
                    "properties": {"path": {"type": "string"}}}),
            ],
        },
        "time": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t1"],
            "properties": {
                "t1": {"type": "number", "minimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "record_every": {"type": "integer", "minimum": 1},
                "error_monitor": {"type": "boolean"},
            },
        },
        "tasks": {"type": "array", "items": {"enum": TASKS}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "points": {"type": "integer", "minimum": 8},
                "half_width": {"oneOf": [{"type": "number", "exclusiveMinimum": 0},
                                         {"const": "auto"}]},
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 8},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "probe_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": FORMATS}},
            },
        },
    },
}

DEFAULTS = {
    "hbar": 1.0,
    "coupling": {"l_re": [0.0, 0.0], "l_im": [0.0, 0.0]},
    "time": {"dt": 1e-3, "record_every": 100, "error_monitor": False},
    "tasks": ["evolve"],
    "grid": {"points": 256, "half_width": "auto"},
    "oracle": {"dim": 60, "dt": 1e-3},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}


class ConfigError(ValueError):
    """Invalid scenario configuration."""


def schema_text() -> str:
    return json.dumps(SCHEMA, indent=2)


def validate(cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise ConfigError("; ".join(msgs))


def with_defaults(cfg: dict) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULTS.items()}
    for key, value in cfg.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def load(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    validate(cfg)
    cfg = with_defaults(cfg)
    cfg["_base_dir"] = str(path.resolve().parent)
    return cfg
