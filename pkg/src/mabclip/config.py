"""YAML configuration mirroring SimConfig.

Top-level keys are SimConfig fields; ``mod`` and ``env`` are nested
sections for ModConfig and EnvConfig. ``sweep`` maps one parameter name to
a list of values. Unknown keys are rejected.

Example::

    seed: 7
    frames: 20000
    mitigation: mab
    env:
      sir_db: -20
      n_interferers: 8
    sweep:
      mitigation: [none, bln, clp, mab]
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

import yaml

from . import channel, phy
from .errors import ConfigError, InvalidInput
from .harness import SimConfig

# fields that stay fixed in code
_HIDDEN = {"mod": {"pilot_value"}, "env": set(), "sim": {"mod", "env", "sweep"}}
_OPTIONAL_INT = {"n_interferers"}
_OPTIONAL_FLOAT = {"step_size", "tx_power"}


def _coerce(name: str, value, default):
    # PyYAML reads 1e-3 as a string, so numbers are converted by the default's type
    try:
        if name in _OPTIONAL_INT:
            return None if value is None else _as_int(value)
        if name in _OPTIONAL_FLOAT:
            return None if value is None else float(value)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ValueError("expected true or false")
            return value
        if isinstance(default, int):
            return _as_int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
        if isinstance(default, str):
            return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name!r}: {value!r} ({exc})") from None
    return value


def _as_int(value) -> int:
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError("expected an integer")
    return int(value)


def _section(cls, data, section: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)} if dataclasses.is_dataclass(cls) else {}
    allowed = set(known) - _HIDDEN[section]
    unknown = set(data) - allowed
    if unknown:
        where = "top level" if section == "sim" else repr(section)
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}; allowed: {sorted(allowed)}")
    defaults = cls()
    return {k: _coerce(k, v, getattr(defaults, k)) for k, v in data.items()}


def _sweep(data) -> tuple:
    if data is None:
        return ()
    if not isinstance(data, dict):
        raise ConfigError("sweep must map a parameter name to a list of values")
    out = []
    for param, values in data.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep {param!r} needs a non-empty list of values")
        out.append((str(param), tuple(values)))
    return tuple(out)


def from_dict(data: dict) -> SimConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    data = dict(data)
    try:
        mod = phy.ModConfig(**_section(phy.ModConfig, data.pop("mod", None), "mod"))
        env = channel.EnvConfig(**_section(channel.EnvConfig, data.pop("env", None), "env"))
        sweep = _sweep(data.pop("sweep", None))
        top = _section(SimConfig, data, "sim")
        return SimConfig(mod=mod, env=env, sweep=sweep, **top)
    except InvalidInput as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return from_dict(data)


def to_dict(cfg: SimConfig) -> dict:
    """Inverse of ``from_dict`` for the configurable fields."""
    def fields_of(obj, section):
        return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)
                if f.name not in _HIDDEN[section]}
    out = fields_of(cfg, "sim")
    out["mod"] = fields_of(cfg.mod, "mod")
    out["env"] = fields_of(cfg.env, "env")
    if cfg.sweep:
        out["sweep"] = {p: list(v) for p, v in cfg.sweep}
    return out
