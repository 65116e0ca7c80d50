"""
JSON run configuration: schema, dotted-path overrides and conversion to
experiment objects.

Frequencies are dimensionless multiples of ``unit`` ("Gamma" for the ideal
model, "omega0" for hardware models); temperatures are in Kelvin.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import jsonschema

from . import implementations as impl
from .chain import DisorderSpec, LinearChainParams, SqueezedBathSpec
from .errors import ChainsqError, ConfigInvalid
from .experiments import KINDS, SWEEP_PARAMETERS, Scenario, SweepSpec, make_grid

_number = {"type": "number"}
_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_nonneg = {"type": "number", "minimum": 0}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "chainsq run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "unit", "chain"],
    "properties": {
        "model": {"enum": list(KINDS)},
        "unit": {"enum": ["Gamma", "omega0"]},
        "variant": {"enum": ["full", "effective"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["N", "eta", "Delta", "delta"],
            "properties": {
                "N": {"type": "integer", "minimum": 0},
                "eta": {"type": "number", "exclusiveMinimum": 0},
                "Delta": _number,
                "delta": _number,
                "origin": {"type": "integer"},
                "gamma": _nonneg,
                "nT": _nonneg,
                "temperature": {"type": ["number", "null"], "minimum": 0},
            },
        },
        "bath": {
            "type": "object",
            "additionalProperties": False,
            "required": ["Gamma", "n_bar"],
            "properties": {
                "Gamma": _nonneg,
                "n_bar": _nonneg,
                "m_bar": _complex,
                "phase": _number,
            },
        },
        "hardware": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "g": {"type": "number", "exclusiveMinimum": 0},
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "E_plus": _complex,
                "E_minus": _complex,
                "epsilon": _number,
                "omega0": {"type": "number", "exclusiveMinimum": 0},
                "omega0_si": {"type": "number", "exclusiveMinimum": 0},
                "wavelength": {"type": "number", "exclusiveMinimum": 0},
                "n_ancilla": _nonneg,
                "n_a": _nonneg,
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter"],
            "properties": {
                "parameter": {"enum": list(SWEEP_PARAMETERS)},
                "values": {"type": "array", "items": _number, "minItems": 1},
                "range": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "stop", "num"],
                    "properties": {
                        "start": _number,
                        "stop": _number,
                        "num": {"type": "integer", "minimum": 1},
                        "scale": {"enum": ["linear", "log"]},
                    },
                },
                "optimize_xi": {"type": "boolean"},
                "optimize_delta": {"type": "boolean"},
            },
        },
        "disorder": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "range_eta": _nonneg,
                "range_delta": _nonneg,
                "realizations": {"type": "integer", "minimum": 0},
            },
        },
        "size_scan": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sizes"],
            "properties": {"sizes": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}},
        },
        "optimize": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "search": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "coarse_points": {"type": "integer", "minimum": 3},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
            },
        },
    },
}

_HARDWARE_CLASSES = {
    "optomechanical": impl.OptomechanicalSpec,
    "circuit-qed": impl.CircuitQedSpec,
    "cavity-array": impl.CavityArraySpec,
}


def _as_complex(value) -> complex:
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def _as_number(value):
    c = _as_complex(value)
    return c.real if c.imag == 0 else c


def load_document(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{path}: top level must be an object")
    return doc


def apply_override(doc: dict[str, Any], assignment: str) -> None:
    """Apply ``a.b.c=value``; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigInvalid(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    node = doc
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigInvalid(f"override {key!r}: {part!r} is not an object")
        node = child
    node[parts[-1]] = value


def validate(doc: dict[str, Any]) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = ".".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{where}: {err.message}")
        raise ConfigInvalid("invalid configuration:\n  " + "\n  ".join(lines))
    kind = doc["model"]
    expected_unit = "Gamma" if kind == "ideal" else "omega0"
    if doc["unit"] != expected_unit:
        raise ConfigInvalid(f"unit: model {kind!r} is expressed in units of {expected_unit!r}")
    if kind == "ideal" and "bath" not in doc:
        raise ConfigInvalid("bath: required for the ideal model")
    if kind != "ideal":
        if "hardware" not in doc:
            raise ConfigInvalid(f"hardware: required for model {kind!r}")
        allowed = {f.name for f in fields(_HARDWARE_CLASSES[kind])} - {"chain", "temperature"}
        extra = set(doc["hardware"]) - allowed
        if extra:
            raise ConfigInvalid(f"hardware: keys {sorted(extra)} not used by model {kind!r}")
    sweep = doc.get("sweep")
    if sweep is not None and ("values" in sweep) == ("range" in sweep):
        raise ConfigInvalid("sweep: give exactly one of 'values' or 'range'")


@dataclass(frozen=True)
class RunConfig:
    """A schema-checked configuration document and the objects built from it."""

    document: dict[str, Any]

    @classmethod
    def from_document(cls, doc: dict[str, Any], overrides: list[str] | None = None) -> RunConfig:
        doc = copy.deepcopy(doc)
        for item in overrides or []:
            apply_override(doc, item)
        validate(doc)
        cfg = cls(doc)
        # build once so type/physics errors surface before any computation
        try:
            cfg.scenario()
            if "sweep" in doc:
                cfg.sweep_spec()
            if "disorder" in doc:
                cfg.disorder_spec()
        except ConfigInvalid:
            raise
        except (ChainsqError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigInvalid(f"configuration rejected: {exc}") from exc
        return cfg

    @classmethod
    def load(cls, path: str | Path, overrides: list[str] | None = None) -> RunConfig:
        return cls.from_document(load_document(path), overrides)

    @property
    def kind(self) -> str:
        return self.document["model"]

    @property
    def seed(self) -> int:
        return int(self.document.get("seed", 0))

    @property
    def variant(self) -> str:
        return self.document.get("variant", "full")

    @property
    def output_format(self) -> str:
        return self.document.get("output", {}).get("format", "csv")

    @property
    def output_dir(self) -> str:
        return self.document.get("output", {}).get("dir", "out")

    def bath(self) -> SqueezedBathSpec | None:
        b = self.document.get("bath")
        if b is None:
            return None
        if "m_bar" in b:
            return SqueezedBathSpec(b["Gamma"], b["n_bar"], _as_complex(b["m_bar"]))
        return SqueezedBathSpec.pure(b["Gamma"], b["n_bar"], b.get("phase", 0.0))

    def scenario(self) -> Scenario:
        c = self.document["chain"]
        params = LinearChainParams(c["eta"], c["Delta"], c["delta"], c.get("origin", 1))
        hardware = {k: _as_number(v) if k in ("E_plus", "E_minus") else v for k, v in self.document.get("hardware", {}).items()}
        return Scenario(
            kind=self.kind,
            chain=params,
            N=c["N"],
            gamma=c.get("gamma", 0.0),
            nT=c.get("nT", 0.0),
            temperature=c.get("temperature"),
            bath=self.bath() if self.kind == "ideal" else None,
            hardware=hardware,
        )

    def sweep_spec(self) -> SweepSpec:
        s = self.document.get("sweep")
        if s is None:
            raise ConfigInvalid("sweep: section required for this command")
        if "values" in s:
            grid = tuple(s["values"])
        else:
            r = s["range"]
            grid = make_grid(r["start"], r["stop"], r["num"], r.get("scale", "linear"))
        return SweepSpec(
            self.scenario(),
            s["parameter"],
            grid,
            model=self.variant,
            optimize_xi=s.get("optimize_xi", False),
            optimize_delta=s.get("optimize_delta", False),
        )

    def disorder_spec(self, seed: int | None = None) -> DisorderSpec:
        d = self.document.get("disorder", {})
        return DisorderSpec(
            d.get("range_eta", 0.0),
            d.get("range_delta", 0.0),
            d.get("realizations", 200),
            self.seed if seed is None else seed,
        )

    def sizes(self) -> list[int]:
        s = self.document.get("size_scan")
        if s is None:
            return list(range(1, 10))
        return list(s["sizes"])

    def search(self) -> tuple[tuple[float, float] | None, int]:
        o = self.document.get("optimize", {})
        search = tuple(o["search"]) if "search" in o else None
        return search, o.get("coarse_points", 401)
