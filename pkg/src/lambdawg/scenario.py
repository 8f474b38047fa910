"""Flat-key scenario files: schema validation and conversion to model configs.

A scenario is a YAML mapping of scalar keys. Unknown keys are rejected,
every mode has a fixed set of required keys, and optional keys carry the
defaults listed in ``OPTIONAL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping

import yaml

from .model import (
    ChannelParams,
    FrequencyShift,
    InvalidParameterError,
    SingleAtomConfig,
    TwoAtomConfig,
)

MODES = ("single", "two-atom", "oracle-single", "oracle-two", "bound-state", "output-field", "figure")

_CHANNEL_KEYS = ("gamma_g", "gamma_xi", "phi_k", "phi_q", "tau_k", "tau_q")
_GEOMETRY_KEYS = ("gamma_g", "gamma_xi", "x1", "x2", "v_k", "v_q", "k0", "q0")

REQUIRED: Dict[str, tuple] = {
    "single": _CHANNEL_KEYS + ("t_max", "dt"),
    "output-field": _CHANNEL_KEYS + ("t_max", "dt"),
    "oracle-single": _CHANNEL_KEYS + ("t_max",),
    "bound-state": _CHANNEL_KEYS,
    "two-atom": _GEOMETRY_KEYS + ("t_max", "dt"),
    "oracle-two": _GEOMETRY_KEYS + ("t_max",),
    "figure": ("figure",),
}

OPTIONAL: Dict[str, Any] = {
    "reflectivity": 1.0,
    "shift_kind": "none",
    "shift_amp": 0.0,
    "shift_t0": 0.0,
    "shift_w": 1.0,
    "shift_omega": 0.0,
    "shift_times": None,
    "shift_values": None,
    "v_k": 1.0,
    "v_q": 1.0,
    "k0": None,
    "q0": None,
    "x1": None,
    "x2": None,
    "dt": None,
    "t_max": None,
    "n_modes": 4001,
    "window": 40.0,
    "record_every": 1,
    "ce0": 1.0,
    "ce1_0": 1.0,
    "ce2_0": 0.0,
    "omega0": 0.0,
    "detector_offset": 0.0,
    "normalize": False,
    "output": None,
    "figure": None,
}

KNOWN_KEYS = frozenset(("mode",) + _CHANNEL_KEYS + _GEOMETRY_KEYS) | frozenset(OPTIONAL)


class SchemaError(InvalidParameterError):
    """The scenario mapping has missing, unknown or ill-typed keys."""


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"key '{key}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(f"key '{key}' must be finite")
    return float(value)


def _amplitude(key: str, value) -> complex:
    """Complex amplitudes are written as a number or a ``[re, im]`` pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SchemaError(f"key '{key}' must be a number or a [re, im] pair")
        return complex(_number(key, value[0]), _number(key, value[1]))
    return complex(_number(key, value))


@dataclass(frozen=True)
class Scenario:
    """A validated scenario: ``mode`` plus every key resolved to a value."""

    mode: str
    values: Mapping[str, Any]

    def __getitem__(self, key):
        return self.values[key]

    def as_dict(self) -> dict:
        """Fully explicit mapping (defaults filled in), suitable for re-serialization."""
        out = {"mode": self.mode}
        for k in sorted(self.values):
            v = self.values[k]
            if v is None:
                continue
            if isinstance(v, complex):
                v = v.real if v.imag == 0 else [v.real, v.imag]
            out[k] = v
        return out

    # -- model builders ------------------------------------------------------

    def shift(self) -> FrequencyShift:
        v = self.values
        kind = v["shift_kind"]
        if kind == "sampled":
            if v["shift_times"] is None or v["shift_values"] is None:
                raise SchemaError("shift_kind 'sampled' needs keys 'shift_times' and 'shift_values'")
            return FrequencyShift(kind="sampled", times=tuple(v["shift_times"]), values=tuple(v["shift_values"]))
        return FrequencyShift(
            kind=kind,
            amplitude=v["shift_amp"],
            t0=v["shift_t0"],
            width=v["shift_w"],
            omega=v["shift_omega"],
        )

    def single_config(self) -> SingleAtomConfig:
        v = self.values
        ck = ChannelParams(v["gamma_g"], v["phi_k"], v["tau_k"], v["v_k"], v["k0"])
        cq = ChannelParams(v["gamma_xi"], v["phi_q"], v["tau_q"], v["v_q"], v["q0"])
        return SingleAtomConfig(ck, cq, reflectivity=v["reflectivity"], shift=self.shift(), ce0=v["ce0"])

    def two_atom_config(self) -> TwoAtomConfig:
        v = self.values
        return TwoAtomConfig(
            x1=v["x1"],
            x2=v["x2"],
            gamma_g=v["gamma_g"],
            gamma_xi=v["gamma_xi"],
            v_k=v["v_k"],
            v_q=v["v_q"],
            k0=v["k0"],
            q0=v["q0"],
            reflectivity=v["reflectivity"],
            ce1_0=v["ce1_0"],
            ce2_0=v["ce2_0"],
        )


def parse_scenario(data: Mapping[str, Any] | None) -> Scenario:
    """Validate a raw mapping against the strict schema."""
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise SchemaError("scenario must be a mapping of keys to values")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise SchemaError(f"unknown key(s): {', '.join(map(str, unknown))}")
    mode = data.get("mode")
    if mode is None:
        lines = [f"  {m}: {', '.join(REQUIRED[m])}" for m in MODES]
        raise SchemaError("missing required key 'mode'; required keys by mode:\n" + "\n".join(lines))
    if mode not in MODES:
        raise SchemaError(f"key 'mode' must be one of {', '.join(MODES)}, got {mode!r}")
    missing = [k for k in REQUIRED[mode] if data.get(k) is None]
    if missing:
        raise SchemaError(f"mode '{mode}' is missing required key(s): {', '.join(missing)}")

    values: Dict[str, Any] = dict(OPTIONAL)
    for key in _CHANNEL_KEYS + _GEOMETRY_KEYS:
        values.setdefault(key, None)
    for key, raw in data.items():
        if key == "mode":
            continue
        values[key] = _coerce(key, raw)
    return Scenario(mode=mode, values=values)


def _coerce(key: str, raw):
    if raw is None:
        return OPTIONAL.get(key)
    if key in ("ce0", "ce1_0", "ce2_0"):
        return _amplitude(key, raw)
    if key in ("shift_kind", "output", "figure"):
        if not isinstance(raw, str):
            raise SchemaError(f"key '{key}' must be a string")
        return raw
    if key == "normalize":
        if not isinstance(raw, bool):
            raise SchemaError("key 'normalize' must be true or false")
        return raw
    if key in ("n_modes", "record_every"):
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise SchemaError(f"key '{key}' must be an integer")
        return raw
    if key in ("shift_times", "shift_values"):
        if not isinstance(raw, (list, tuple)):
            raise SchemaError(f"key '{key}' must be a list of numbers")
        return tuple(_number(key, x) for x in raw)
    return _number(key, raw)


def load_scenario(path) -> Scenario:
    """Read and validate a YAML scenario file."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"cannot parse {path}: {exc}") from None
    return parse_scenario(data)
