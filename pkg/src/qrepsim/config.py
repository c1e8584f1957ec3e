"""Run configuration: defaults, config files and command-line overrides.

A config file is either a JSON object or plain ``key = value`` lines
(``#`` starts a comment).  Keys are flat:

    p_depo, lambda_gate, p_meas, tau, loss_db_per_km,
    total_km, c_fiber, memory_qubits, data_qubits, ancilla_qubits,
    n_meas, trajectories, seed

``tau`` accepts a number of seconds or the keyword ``disabled`` (also
``inf``/``none``) for infinite memory lifetime.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .pauli_frame import MEMORY_DISABLED, ChannelParams
from .strategies import ConfigError, Topology

CHANNEL_KEYS = tuple(f.name for f in fields(ChannelParams))
TOPOLOGY_KEYS = tuple(f.name for f in fields(Topology))
RUN_KEYS = ("n_meas", "trajectories", "seed")

_INT_KEYS = {"memory_qubits", "data_qubits", "ancilla_qubits", "n_meas", "trajectories", "seed"}
_DISABLED_WORDS = {"disabled", "off", "inf", "infinite", "none"}

# noise sources that --disable can switch off, and the field each one zeroes
ABLATIONS = {
    "loss": ("loss_db_per_km", 0.0),
    "dep": ("p_depo", 0.0),
    "gate": ("lambda_gate", 0.0),
    "mem": ("tau", MEMORY_DISABLED),
    "meas": ("p_meas", 0.0),
}

SEED_ENV = "QREPSIM_SEED"


@dataclass(frozen=True)
class RunSettings:
    channel: ChannelParams = field(default_factory=ChannelParams)
    topology: Topology = field(default_factory=Topology)
    n_meas: int = 9000
    trajectories: int = 1
    seed: int = 0

    def to_flat(self) -> dict[str, Any]:
        flat = {**asdict(self.channel), **asdict(self.topology)}
        flat.update(n_meas=self.n_meas, trajectories=self.trajectories, seed=self.seed)
        if not math.isfinite(flat["tau"]):
            flat["tau"] = "disabled"
        return flat


def _coerce(key: str, value: Any) -> Any:
    if key not in CHANNEL_KEYS + TOPOLOGY_KEYS + RUN_KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "tau" and isinstance(value, str) and value.strip().lower() in _DISABLED_WORDS:
        return MEMORY_DISABLED
    if value is None and key == "tau":
        return MEMORY_DISABLED
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def parse_config_text(text: str) -> dict[str, Any]:
    stripped = text.strip()
    if not stripped:
        return {}
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return dict(data)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split(sep, 1))
        out[key] = value
    return out


def build_settings(values: Mapping[str, Any], base: RunSettings | None = None) -> RunSettings:
    """Apply flat ``values`` on top of ``base`` (defaults when omitted)."""
    base = base or RunSettings()
    coerced = {k: _coerce(k, v) for k, v in values.items() if v is not None or k == "tau"}
    chan = {k: v for k, v in coerced.items() if k in CHANNEL_KEYS}
    topo = {k: v for k, v in coerced.items() if k in TOPOLOGY_KEYS}
    run = {k: v for k, v in coerced.items() if k in RUN_KEYS}
    try:
        channel = replace(base.channel, **chan)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    topology = replace(base.topology, **topo)
    settings = replace(base, channel=channel, topology=topology, **run)
    if settings.n_meas < 3:
        raise ConfigError(f"n_meas must be at least 3, got {settings.n_meas}")
    if settings.trajectories < 1:
        raise ConfigError(f"trajectories must be at least 1, got {settings.trajectories}")
    return settings


def load_config(path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None,
                disable: tuple[str, ...] = ()) -> RunSettings:
    """Defaults, then the file at ``path``, then ``overrides``, then ablations."""
    values: dict[str, Any] = {}
    if SEED_ENV in os.environ:
        values["seed"] = os.environ[SEED_ENV]
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_config_text(text))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for name in disable:
        if name not in ABLATIONS:
            raise ConfigError(f"unknown noise source {name!r}; choose from {', '.join(ABLATIONS)}")
        key, off = ABLATIONS[name]
        values[key] = off
    return build_settings(values)
