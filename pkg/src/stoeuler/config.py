"""Run configuration, experiment presets and the TOML file format.

A configuration file is TOML. Keys live in a handful of sections and may
be written dotted (``scheme.epsilon = 1e-3``) or as tables (``[scheme]``);
both parse to the same thing::

    preset = "test3"
    seed = 0
    realizations = 16
    horizon = 1.0
    output_stride = 10
    output_dir = "out"
    emit_snapshots = false
    grid.cells = 128
    law.mode = "shallow_water"      # or "normalized"
    law.gravity = 2.0               # shallow_water only
    law.gamma = 1.4                 # normalized only
    scheme.epsilon = 1e-3
    scheme.tau = 1e-3
    scheme.cfl = 0.5
    scheme.rho_floor = 0.0
    scheme.kappa_bound = 8.0
    scheme.sto_substeps = 4
    scheme.speed_ceiling = 1e4
    noise.kind = "shallow_water_height"   # shallow_water_topography | zero
    noise.sigma = [1.0, 1.0, 1.0, 1.0, 1.0]
    noise.localize_kappa = 4.0
    noise.localize_margin = 0.5
    initial.rho_left = 1.0          # density on (0, 1/2)
    initial.rho_right = 1.0         # density on (1/2, 1)
    initial.u_left = 0.0
    initial.u_right = 0.0

Every key is optional. Values given explicitly win over the preset, and the
preset wins over the built-in defaults.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .core import SHALLOW_WATER, GasLaw, Grid
from .dynamics import SchemeConfig
from .ensemble import EnsembleConfig
from .noise import SW_HEIGHT, SW_TOPOGRAPHY, ZERO, localize, sw_height_modes, sw_topography_modes, zero_noise

PRESETS = ("test1", "test2", "test3", "test4")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


# key in the file -> attribute of RunConfig
_KEYS = {
    "preset": "preset",
    "seed": "seed",
    "realizations": "realizations",
    "horizon": "horizon",
    "output_stride": "output_stride",
    "output_dir": "output_dir",
    "emit_snapshots": "emit_snapshots",
    "batch_size": "batch_size",
    "workers": "workers",
    "grid.cells": "cells",
    "law.mode": "law_mode",
    "law.gravity": "gravity",
    "law.gamma": "gamma",
    "scheme.epsilon": "epsilon",
    "scheme.tau": "tau",
    "scheme.cfl": "cfl",
    "scheme.rho_floor": "rho_floor",
    "scheme.kappa_bound": "kappa_bound",
    "scheme.sto_substeps": "sto_substeps",
    "scheme.speed_ceiling": "speed_ceiling",
    "noise.kind": "noise_kind",
    "noise.sigma": "sigma",
    "noise.localize_kappa": "localize_kappa",
    "noise.localize_margin": "localize_margin",
    "initial.rho_left": "rho_left",
    "initial.rho_right": "rho_right",
    "initial.u_left": "u_left",
    "initial.u_right": "u_right",
}

_TYPES = {
    "preset": str, "seed": int, "realizations": int, "horizon": float, "output_stride": int,
    "output_dir": str, "emit_snapshots": bool, "batch_size": int, "workers": int, "cells": int,
    "law_mode": str, "gravity": float, "gamma": float, "epsilon": float, "tau": float, "cfl": float,
    "rho_floor": float, "kappa_bound": float, "sto_substeps": int, "speed_ceiling": float,
    "noise_kind": str, "sigma": tuple, "localize_kappa": float, "localize_margin": float,
    "rho_left": float, "rho_right": float, "u_left": float, "u_right": float,
}

DEFAULTS: Dict[str, Any] = {
    "preset": "custom",
    "seed": 0,
    "realizations": 256,
    "horizon": 10.0,
    "output_stride": 100,
    "output_dir": "out",
    "emit_snapshots": False,
    "batch_size": 64,
    "workers": 1,
    "cells": 256,
    "law_mode": SHALLOW_WATER,
    "gravity": 2.0,
    "gamma": 2.0,
    "epsilon": 1e-3,
    "tau": 1e-3,
    "cfl": 0.5,
    "rho_floor": 0.0,
    "kappa_bound": None,
    "sto_substeps": 4,
    "speed_ceiling": 1e4,
    "noise_kind": SW_HEIGHT,
    "sigma": (1.0, 1.0, 1.0, 1.0, 1.0),
    "localize_kappa": None,
    "localize_margin": 0.5,
    "rho_left": 1.0,
    "rho_right": 1.0,
    "u_left": 0.0,
    "u_right": 0.0,
}

_PRESET_VELOCITY = {
    "test1": (1.0, 0.0),
    "test2": (0.5, 0.5),
    "test3": (0.0, 0.0),
    "test4": (-0.5, 0.5),
}


@dataclass
class RunConfig:
    """Every field is optional; ``None`` means "not set here"."""

    preset: Optional[str] = None
    seed: Optional[int] = None
    realizations: Optional[int] = None
    horizon: Optional[float] = None
    output_stride: Optional[int] = None
    output_dir: Optional[str] = None
    emit_snapshots: Optional[bool] = None
    batch_size: Optional[int] = None
    workers: Optional[int] = None
    cells: Optional[int] = None
    law_mode: Optional[str] = None
    gravity: Optional[float] = None
    gamma: Optional[float] = None
    epsilon: Optional[float] = None
    tau: Optional[float] = None
    cfl: Optional[float] = None
    rho_floor: Optional[float] = None
    kappa_bound: Optional[float] = None
    sto_substeps: Optional[int] = None
    speed_ceiling: Optional[float] = None
    noise_kind: Optional[str] = None
    sigma: Optional[Tuple[float, ...]] = None
    localize_kappa: Optional[float] = None
    localize_margin: Optional[float] = None
    rho_left: Optional[float] = None
    rho_right: Optional[float] = None
    u_left: Optional[float] = None
    u_right: Optional[float] = None

    def explicit(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def merged(self, other: "RunConfig") -> "RunConfig":
        """``other``'s set fields on top of this one's."""
        return RunConfig(**{**self.explicit(), **other.explicit()})

    def resolve(self) -> "RunConfig":
        """Fill unset fields from the preset, then from the defaults."""
        preset = self.preset if self.preset is not None else DEFAULTS["preset"]
        base = dict(DEFAULTS)
        if preset != "custom":
            base.update(load_preset(preset).explicit())
        base.update(self.explicit())
        base["preset"] = preset
        cfg = RunConfig(**base)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.preset not in PRESETS + ("custom",):
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.law_mode not in (SHALLOW_WATER, "normalized"):
            raise ConfigError(f"law.mode must be 'shallow_water' or 'normalized', got {self.law_mode!r}")
        if self.noise_kind not in (SW_HEIGHT, SW_TOPOGRAPHY, ZERO):
            raise ConfigError(f"unknown noise.kind {self.noise_kind!r}")
        if self.noise_kind != ZERO and self.law_mode != SHALLOW_WATER:
            raise ConfigError("the shallow-water noise kinds need law.mode = 'shallow_water'")
        for name in ("realizations", "output_stride", "cells", "sto_substeps", "batch_size", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for name in ("rho_left", "rho_right"):
            if getattr(self, name) < 0:
                raise ConfigError("initial density must be non-negative")
        try:
            self.ensemble_config()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    # -- construction of the numerical objects --------------------------------

    def law(self) -> GasLaw:
        if self.law_mode == SHALLOW_WATER:
            return GasLaw.shallow_water(self.gravity)
        return GasLaw.normalized(self.gamma)

    def scheme(self) -> SchemeConfig:
        return SchemeConfig(
            epsilon=self.epsilon,
            tau=self.tau,
            cfl=self.cfl,
            rho_floor=self.rho_floor,
            kappa_bound=self.kappa_bound,
            sto_substeps=self.sto_substeps,
            speed_ceiling=self.speed_ceiling,
        )

    def noise(self):
        if self.noise_kind == ZERO:
            model = zero_noise()
        else:
            K = len(self.sigma)
            build = sw_height_modes if self.noise_kind == SW_HEIGHT else sw_topography_modes
            model = build(self.gravity, self.sigma, K)
        if self.localize_kappa is not None:
            model = localize(model, self.localize_kappa, self.localize_margin, law=self.law())
        return model

    def initial_state(self):
        x = Grid(self.cells).centers
        left = x < 0.5
        rho = np.where(left, self.rho_left, self.rho_right)
        u = np.where(left, self.u_left, self.u_right)
        return rho, rho * u

    def ensemble_config(self) -> EnsembleConfig:
        rho0, q0 = self.initial_state()
        return EnsembleConfig(
            law=self.law(),
            noise=self.noise(),
            scheme=self.scheme(),
            rho0=rho0,
            q0=q0,
            n_realizations=self.realizations,
            master_seed=self.seed,
            horizon=self.horizon,
            output_stride=self.output_stride,
            batch_size=self.batch_size,
            workers=self.workers,
            record_snapshots=self.emit_snapshots,
        )

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        """Nested mapping of the set fields, ready for TOML."""
        out: Dict[str, Any] = {}
        for key, attr in _KEYS.items():
            value = getattr(self, attr)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = [float(v) for v in value]
            section, _, name = key.rpartition(".")
            (out.setdefault(section, {}) if section else out)[name] = value
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        flat: Dict[str, Any] = {}

        def walk(prefix, node):
            for k, v in node.items():
                key = f"{prefix}.{k}" if prefix else k
                if isinstance(v, dict):
                    walk(key, v)
                else:
                    flat[key] = v

        walk("", data)
        values = {}
        for key, v in flat.items():
            if key not in _KEYS:
                raise ConfigError(f"unknown key {key!r}")
            attr = _KEYS[key]
            values[attr] = _coerce(key, v, _TYPES[attr])
        return cls(**values)

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_toml(text)


def _coerce(key, value, typ):
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    if typ is tuple:
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{key} must be a list of numbers")
        return tuple(float(v) for v in value)
    raise ConfigError(f"unsupported type for {key}")  # pragma: no cover


def load_preset(preset_id: str) -> RunConfig:
    """Shallow-water experiment presets: g = 2, sigma_k = 1 for k <= 5,
    h0 = 1, T = 10, and the initial velocity of the chosen test."""
    if preset_id not in _PRESET_VELOCITY:
        raise ConfigError(f"unknown preset {preset_id!r}; expected one of {', '.join(PRESETS)}")
    u_left, u_right = _PRESET_VELOCITY[preset_id]
    return RunConfig(
        preset=preset_id,
        law_mode=SHALLOW_WATER,
        gravity=2.0,
        noise_kind=SW_HEIGHT,
        sigma=(1.0,) * 5,
        horizon=10.0,
        rho_left=1.0,
        rho_right=1.0,
        u_left=u_left,
        u_right=u_right,
    )
