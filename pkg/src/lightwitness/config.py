"""Experiment configuration: YAML/JSON documents validated against a schema.

Complex numbers are written as ``[re, im]`` pairs everywhere.  Transition
keys are ``"alpha-beta"`` strings, e.g. ``"1-2"``.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .geometry import (
    PRESETS,
    DetectionChannel,
    EmitterArray,
    TransitionTable,
    all_pairs,
    direction_from_angles,
)
from .hilbert import ket
from .scan import AngularGrid
from .states import LABELS, NamedState, make_state

CONFIG_SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_CVEC3 = {"type": "array", "items": _COMPLEX, "minItems": 3, "maxItems": 3}
_RVEC3 = {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3}
_PAIR_KEY = r"^[1-9][0-9]*-[1-9][0-9]*$"
_POLARIZATION = {"oneOf": [{"enum": list(PRESETS)}, _CVEC3]}
_RANGE = {
    "type": "object",
    "required": ["start", "stop", "num"],
    "additionalProperties": False,
    "properties": {"start": _NUMBER, "stop": _NUMBER, "num": {"type": "integer", "minimum": 1}},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["state", "geometry", "detection"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": CONFIG_SCHEMA_VERSION},
        "description": {"type": "string"},
        "state": {
            "type": "object",
            "required": ["label"],
            "additionalProperties": False,
            "properties": {
                "label": {"enum": list(LABELS)},
                "n": {"type": "integer", "minimum": 2},
                "d": {"type": "integer", "minimum": 2},
                "noise": {"type": "number", "minimum": 0, "maximum": 1},
                "amplitudes": {"type": "array", "items": _COMPLEX, "minItems": 1},
                "levels": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            },
        },
        "geometry": {
            "type": "object",
            "required": ["dipoles"],
            "additionalProperties": False,
            "properties": {
                "positions": {"type": "array", "items": _RVEC3, "minItems": 1},
                "chain": {
                    "type": "object",
                    "required": ["spacing"],
                    "additionalProperties": False,
                    "properties": {"spacing": _NUMBER, "axis": _RVEC3},
                },
                "dipoles": {
                    "type": "object",
                    "minProperties": 1,
                    "propertyNames": {"anyOf": [{"pattern": _PAIR_KEY}, {"const": "all"}]},
                    "additionalProperties": _CVEC3,
                },
            },
            "oneOf": [{"required": ["positions"]}, {"required": ["chain"]}],
        },
        "detection": {
            "type": "object",
            "required": ["channel"],
            "additionalProperties": False,
            "properties": {
                "channel": {
                    "oneOf": [
                        {"enum": list(PRESETS)},
                        {"type": "object", "minProperties": 1,
                         "propertyNames": {"pattern": _PAIR_KEY},
                         "additionalProperties": _POLARIZATION},
                    ]
                },
                "direction": {
                    "oneOf": [
                        {"type": "object", "required": ["theta", "phi"], "additionalProperties": False,
                         "properties": {"theta": _NUMBER, "phi": _NUMBER}},
                        {"type": "object", "required": ["vector"], "additionalProperties": False,
                         "properties": {"vector": _RVEC3}},
                    ]
                },
                "grid": {
                    "type": "object",
                    "required": ["theta", "phi"],
                    "additionalProperties": False,
                    "properties": {"theta": _RANGE, "phi": _RANGE},
                },
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "format": {"enum": ["csv", "json"]},
                "out": {"type": "string"},
                "p_resolution": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

RUN_DEFAULTS = {"seed": 0, "tolerance": 1e-9, "format": "csv", "out": "results", "p_resolution": 1e-9}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending path."""


def _path(parts) -> str:
    return ".".join(str(p) for p in parts) or "<root>"


def _pair(key: str) -> tuple[int, int]:
    a, b = key.split("-")
    return int(a), int(b)


def _cvec(v) -> np.ndarray:
    return np.array([complex(re, im) for re, im in v])


def _validate(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{_path(err.absolute_path)}: {err.message}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized configuration document."""

    document: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("<root>: configuration must be a mapping")
        _validate(doc)
        doc = copy.deepcopy(doc)
        doc.setdefault("schema_version", CONFIG_SCHEMA_VERSION)
        doc["run"] = {**RUN_DEFAULTS, **doc.get("run", {})}
        doc["state"].setdefault("noise", 0.0)
        cfg = cls(doc)
        cfg._cross_check()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"<root>: not valid YAML/JSON ({exc})") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def dumps(self) -> str:
        return yaml.safe_dump(self.document, sort_keys=True)

    @property
    def digest(self) -> str:
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @property
    def run(self) -> dict:
        return self.document["run"]

    # ---- builders -------------------------------------------------------

    def _dims(self) -> tuple[int, int]:
        st = self.document["state"]
        label = st["label"]
        if label == "two_qutrit_example":
            return 2, 3
        if label in ("dicke_symmetric", "singlet"):
            n = st.get("n")
            if n is None:
                raise ConfigError(f"state.n: required for {label}")
            return n, n
        if label == "w_state":
            if "n" not in st or "d" not in st:
                raise ConfigError("state: w_state needs n and d")
            return st["n"], st["d"]
        if "levels" in st:
            return len(st["levels"]), st.get("d") or max(2, max(st["levels"]))
        if "n" not in st or "d" not in st:
            raise ConfigError("state: custom state needs n and d")
        return st["n"], st["d"]

    def state(self, noise: float | None = None) -> NamedState:
        st = self.document["state"]
        n, d = self._dims()
        p = st["noise"] if noise is None else noise
        if st["label"] != "custom":
            return make_state(st["label"], n=n, d=d, noise=p)
        if "levels" in st:
            amps = ket(st["levels"], d)
        elif "amplitudes" in st:
            amps = np.array([complex(re, im) for re, im in st["amplitudes"]])
        else:
            raise ConfigError("state: custom state needs amplitudes or levels")
        try:
            return make_state("custom", n=n, d=d, noise=p, amplitudes=amps)
        except ValueError as exc:
            raise ConfigError(f"state.amplitudes: {exc}") from exc

    def array(self) -> EmitterArray:
        geo = self.document["geometry"]
        n, d = self._dims()
        if "positions" in geo:
            if len(geo["positions"]) != n:
                raise ConfigError(f"geometry.positions: {len(geo['positions'])} positions for {n} sites")
            return EmitterArray(np.array(geo["positions"], dtype=float), d)
        ch = geo["chain"]
        return EmitterArray.linear_chain(n, ch["spacing"], d, ch.get("axis", (0.0, 0.0, 1.0)))

    def table(self) -> TransitionTable:
        _, d = self._dims()
        dip = self.document["geometry"]["dipoles"]
        if "all" in dip:
            if len(dip) != 1:
                raise ConfigError("geometry.dipoles: 'all' cannot be combined with per-transition entries")
            return TransitionTable.all_allowed(d, _cvec(dip["all"]))
        entries = {}
        for key, vec in dip.items():
            a, b = _pair(key)
            if not 1 <= a < b <= d:
                raise ConfigError(f"geometry.dipoles.{key}: transition must satisfy 1 <= alpha < beta <= {d}")
            entries[(a, b)] = _cvec(vec)
        try:
            return TransitionTable(d, entries)
        except ValueError as exc:
            raise ConfigError(f"geometry.dipoles: {exc}") from exc

    def channel_spec(self):
        ch = self.document["detection"]["channel"]
        if isinstance(ch, str):
            return ch
        return {_pair(k): (v if isinstance(v, str) else _cvec(v)) for k, v in ch.items()}

    def direction(self) -> np.ndarray:
        dr = self.document["detection"].get("direction")
        if dr is None:
            raise ConfigError("detection.direction: required for this command")
        if "vector" in dr:
            v = np.array(dr["vector"], dtype=float)
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ConfigError("detection.direction.vector: zero vector")
            return v / norm
        return direction_from_angles(dr["theta"], dr["phi"])

    def channel(self, direction=None) -> DetectionChannel:
        direction = self.direction() if direction is None else direction
        try:
            return DetectionChannel.from_spec(direction, self.channel_spec(), self.table())
        except ValueError as exc:
            raise ConfigError(f"detection.channel: {exc}") from exc

    def grid(self) -> AngularGrid:
        g = self.document["detection"].get("grid")
        if g is None:
            raise ConfigError("detection.grid: required for scan")
        t, p = g["theta"], g["phi"]
        theta = np.linspace(t["start"], t["stop"], t["num"]) if t["num"] > 1 else np.array([t["start"]])
        phi = p["start"] + (p["stop"] - p["start"]) * np.arange(p["num"]) / p["num"]
        try:
            return AngularGrid(theta, phi)
        except ValueError as exc:
            raise ConfigError(f"detection.grid: {exc}") from exc

    def _cross_check(self) -> None:
        n, d = self._dims()
        st = self.document["state"]
        for key in ("n", "d"):
            if key in st and st[key] != {"n": n, "d": d}[key]:
                raise ConfigError(f"state.{key}: {st[key]} inconsistent with label {st['label']!r}")
        if "levels" in st and any(lv > d for lv in st["levels"]):
            raise ConfigError(f"state.levels: level above d={d}")
        if "amplitudes" in st and len(st["amplitudes"]) != d**n:
            raise ConfigError(f"state.amplitudes: expected {d**n} entries, got {len(st['amplitudes'])}")
        self.state()
        self.array()
        table = self.table()
        spec = self.channel_spec()
        if isinstance(spec, dict):
            for a, b in spec:
                if (a, b) not in all_pairs(d):
                    raise ConfigError(f"detection.channel.{a}-{b}: not a transition of a d={d} emitter")
                if not table.allowed(a, b):
                    raise ConfigError(f"detection.channel.{a}-{b}: polarization given for a forbidden transition")
        det = self.document["detection"]
        if "direction" in det:
            self.channel()
        if "grid" in det:
            self.grid()
            self.channel(direction_from_angles(0.3, 0.7))


def direction_angles(direction) -> tuple[float, float]:
    """``(theta, phi)`` of a unit vector, ``phi`` in ``[0, 2 pi)``."""
    x, y, z = direction
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x) % (2 * math.pi)
    return theta, phi
