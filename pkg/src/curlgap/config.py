"""Run configuration: JSON document, schema validation and ``--set`` overrides."""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Iterable

import jsonschema

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_FIELD_SPEC = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "power", "table", "designed", "separable"]},
        "value": _NUM,
        "coefficient": _NUM,
        "exponent": _NUM,
        "r": {"type": "array", "items": _NUM, "minItems": 2},
        "x3": {"type": "array", "items": _NUM, "minItems": 2},
        "values": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "radial": {"$ref": "#/$defs/radial"},
    },
    "additionalProperties": False,
}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "$defs": {
        "radial": {
            "type": "object",
            "required": ["w0", "winf", "delta"],
            "properties": {"w0": _NUM, "winf": _NUM, "delta": _POS},
            "additionalProperties": False,
        },
    },
    "properties": {
        "periodic": {
            "type": "object",
            "required": ["breakpoints", "values"],
            "properties": {
                "breakpoints": {"type": "array", "items": _NUM, "minItems": 1},
                "values": {"type": "array", "items": _NUM, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "bands": {
            "type": "object",
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "require_gap": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "radial_design": {
            "type": "object",
            "required": ["eta", "mu0_fraction"],
            "properties": {
                "winf": _NUM,
                "winf_offset": _POS,
                "eta": _NUM,
                "mu0_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "oneOf": [{"required": ["winf"]}, {"required": ["winf_offset"]}],
            "additionalProperties": False,
        },
        "radial": {"$ref": "#/$defs/radial"},
        "curves": {
            "type": "object",
            "properties": {"samples": {"type": "integer", "minimum": 2}},
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "required": ["r_max", "z_half", "nr", "nz"],
            "properties": {
                "r_max": _POS, "z_half": _POS,
                "nr": {"type": "integer", "minimum": 2},
                "nz": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "problem": {
            "type": "object",
            "required": ["p", "mode", "gamma", "potential"],
            "properties": {
                "p": {"type": "number", "exclusiveMinimum": 1},
                "mode": {"enum": ["focusing", "defocusing"]},
                "gamma": _FIELD_SPEC,
                "potential": _FIELD_SPEC,
            },
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "tol": _POS,
                "max_iter": {"type": "integer", "minimum": 1},
                "starts": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "k_neg_max": {"type": "integer", "minimum": 0},
                "sensitivity": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
    },
    "additionalProperties": False,
}

DEFAULT_CONFIG: dict = {
    "periodic": {"breakpoints": [0.0, 0.5], "values": [0.0, 10.0]},
    "bands": {"count": 8, "require_gap": False},
    "radial_design": {"winf_offset": 1.0, "eta": 3.5, "mu0_fraction": 0.5},
    "radial": {"w0": 0.0, "winf": 20.0, "delta": 1.0},
    "curves": {"samples": 2000},
    "grid": {"r_max": 12.0, "z_half": 12.0, "nr": 64, "nz": 64},
    "problem": {
        "p": 3.0,
        "mode": "focusing",
        "gamma": {"kind": "constant", "value": 1.0},
        "potential": {"kind": "constant", "value": 1.0},
    },
    "solver": {"tol": 1e-8, "max_iter": 2000, "starts": 8, "seed": 0, "k_neg_max": 16,
               "sensitivity": False},
    "output_dir": "curlgap-out",
}

# sections each command reads
REQUIRED_SECTIONS = {
    "bands": ("periodic", "bands"),
    "design": ("periodic", "radial_design"),
    "curves": ("radial", "curves"),
    "spectrum": ("periodic", "radial_design"),
    "groundstate": ("grid", "problem", "solver"),
}


# mutually exclusive keys: supplying one drops the other from the defaults
_ALTERNATIVES = {"radial_design": ("winf", "winf_offset")}


class ConfigError(ValueError):
    pass


def _drop_alternatives(section: str, node: dict, supplied) -> None:
    alts = _ALTERNATIVES.get(section, ())
    if any(k in supplied for k in alts):
        for k in alts:
            if k not in supplied:
                node.pop(k, None)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and "kind" not in v:
            out[k] = _merge(out[k], v)
            _drop_alternatives(k, out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(item: str) -> tuple[list[str], Any]:
    """``a.b.c=value``; ``value`` is parsed as JSON, falling back to a string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(cfg: dict, items: Iterable[str]) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in items:
        path, value = parse_override(item)
        node = cfg
        for p in path[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {item!r}: {p!r} is not a section")
            node = nxt
        node[path[-1]] = value
        if len(path) == 2:
            _drop_alternatives(path[0], node, (path[1],))
    return cfg


def validate(cfg: dict, command: str | None = None) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    if command is not None:
        missing = [s for s in REQUIRED_SECTIONS.get(command, ()) if s not in cfg]
        if missing:
            raise ConfigError(f"command {command!r} needs config sections: {', '.join(missing)}")
    return cfg


def load_config(path: str | Path | None, overrides: Iterable[str] = (),
                command: str | None = None) -> dict:
    """Defaults, then the file (merged section-wise), then ``--set`` overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = _merge(cfg, user)
    cfg = apply_overrides(cfg, overrides)
    return validate(cfg, command)
