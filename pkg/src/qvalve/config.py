"""Run configuration: presets, overrides and validation.

A config file is a flat JSON object whose keys are ``RunConfig`` fields.
Unknown keys and out-of-range values are rejected before anything runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

EXPERIMENTS = ("frequency_scan", "cw_point", "optimize", "efficiency_sweep", "fock_sweep")
PRESETS = ("fig2", "fig3", "fig4")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "frequency_scan"
    # physics, units of gamma
    u: float | None = None
    j: float | None = None
    f: float = 0.5
    delta_RL: float | None = None
    omega_g: float = 0.0
    # truncation; None means the experiment default
    n_max_left: int | None = None
    n_max_right: int | None = None
    # solver tolerances
    steady_tol: float = 1e-10
    rtol: float = 1e-8
    atol: float = 1e-10
    epsilon: float = 1e-6
    t_cap: float = 200.0
    # scans
    grid_start: float | None = None
    grid_stop: float | None = None
    grid_step: float | None = None
    j_values: list[float] | None = None
    j_min: float = 0.1
    j_max: float = 100.0
    j_points: int = 30
    u_values: list[float] | None = None
    panels: list[str] | None = None
    direction: str = "left"
    bounds_low: float | None = None
    bounds_high: float | None = None
    coarse_points: int = 16
    coarse_step: float = 0.5
    resolution: float = 1e-3
    n_init: int = 2
    # output
    out: str = "results"
    format: str = "csv"
    workers: int = 1
    truncation_check: bool = True

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    # --- derived quantities ---------------------------------------------
    def scan_grid(self) -> list[float]:
        n = int(round((self.grid_stop - self.grid_start) / self.grid_step))
        # round away accumulated binary error so grids print cleanly
        return [round(x, 12) for x in np.linspace(self.grid_start, self.grid_stop, n + 1).tolist()]

    def j_grid(self) -> list[float]:
        if self.j_values is not None:
            return sorted(self.j_values)
        return np.logspace(math.log10(self.j_min), math.log10(self.j_max), self.j_points).tolist()

    def parsed_panels(self) -> list[tuple[float, str]]:
        out = []
        for p in self.panels or []:
            d, direction = p.split(":")
            out.append((float(d), direction))
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


PRESET_DEFAULTS: dict[str, dict[str, Any]] = {
    "fig2": dict(
        experiment="frequency_scan", u=1.0, j=0.1, f=0.5, delta_RL=20.0,
        grid_start=-15.0, grid_stop=5.0, grid_step=0.1, n_max_left=6, n_max_right=6,
    ),
    "fig3": dict(
        experiment="efficiency_sweep", f=0.5, u_values=[0.5, 1.0, 2.0, 5.0, 10.0],
        j_min=0.1, j_max=100.0, j_points=30, panels=["20:left", "0:right"],
        n_max_left=6, n_max_right=6, coarse_step=0.5, resolution=1e-3,
    ),
    "fig4": dict(
        experiment="fock_sweep", u=10.0, j_values=[1.0, 3.0, 10.0, 30.0, 100.0], n_init=2,
        grid_start=-5.0, grid_stop=20.0, grid_step=0.25, omega_g=0.0,
    ),
}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if value is None:
        if "None" in kind:
            return None
        raise ConfigError(f"{name}: value required")
    try:
        if kind.startswith("list"):
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, (list, tuple)):
                raise TypeError
            if "float" in kind:
                return [float(v) for v in value]
            return [str(v) for v in value]
        if kind.startswith("bool"):
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes"):
                    return True
                if value.lower() in ("0", "false", "no"):
                    return False
                raise TypeError
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind.startswith("int"):
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if kind.startswith("float"):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot read {value!r} as {kind}") from None


def validate(cfg: RunConfig) -> RunConfig:
    def need(cond: bool, msg: str):
        if not cond:
            raise ConfigError(msg)

    need(cfg.experiment in EXPERIMENTS, f"experiment: must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    for name in ("n_max_left", "n_max_right"):
        v = getattr(cfg, name)
        need(v is None or v >= 1, f"{name}: truncation must keep at least one quantum (n_max >= 1), got {v}")
    for name in ("u", "j"):
        v = getattr(cfg, name)
        need(v is None or (math.isfinite(v) and v >= 0), f"{name}: must be finite and >= 0, got {v}")
    for name in ("f", "delta_RL", "omega_g", "grid_start", "grid_stop", "bounds_low", "bounds_high"):
        v = getattr(cfg, name)
        need(v is None or math.isfinite(v), f"{name}: must be finite, got {v}")
    for name in ("steady_tol", "rtol", "atol", "epsilon", "t_cap", "resolution", "coarse_step"):
        v = getattr(cfg, name)
        need(math.isfinite(v) and v > 0, f"{name}: must be > 0, got {v}")
    need(cfg.grid_step is None or (math.isfinite(cfg.grid_step) and cfg.grid_step > 0),
         f"grid_step: must be > 0, got {cfg.grid_step}")
    need(cfg.j_min > 0 and cfg.j_max > cfg.j_min, "j_min/j_max: need 0 < j_min < j_max")
    need(cfg.j_points >= 2, f"j_points: need >= 2, got {cfg.j_points}")
    if cfg.j_values is not None:
        need(len(cfg.j_values) >= 1 and all(v >= 0 and math.isfinite(v) for v in cfg.j_values),
             "j_values: need finite values >= 0")
    if cfg.u_values is not None:
        need(len(cfg.u_values) >= 1 and all(v >= 0 and math.isfinite(v) for v in cfg.u_values),
             "u_values: need finite values >= 0")
    need(cfg.direction in ("left", "right"), f"direction: must be 'left' or 'right', got {cfg.direction!r}")
    need(cfg.coarse_points >= 8, f"coarse_points: need >= 8, got {cfg.coarse_points}")
    need(cfg.n_init >= 1, f"n_init: need >= 1, got {cfg.n_init}")
    need(cfg.format in ("csv", "json"), f"format: must be 'csv' or 'json', got {cfg.format!r}")
    need(cfg.workers >= 1, f"workers: need >= 1, got {cfg.workers}")
    if cfg.panels is not None:
        for p in cfg.panels:
            parts = p.split(":")
            ok = len(parts) == 2 and parts[1] in ("left", "right")
            if ok:
                try:
                    ok = math.isfinite(float(parts[0]))
                except ValueError:
                    ok = False
            need(ok, f"panels: entries look like '20:left', got {p!r}")

    exp = cfg.experiment
    if exp in ("frequency_scan", "fock_sweep"):
        for name in ("grid_start", "grid_stop", "grid_step"):
            need(getattr(cfg, name) is not None, f"{name}: required for {exp}")
        need(cfg.grid_stop > cfg.grid_start, "grid_stop: must exceed grid_start")
        n = (cfg.grid_stop - cfg.grid_start) / cfg.grid_step
        need(abs(n - round(n)) < 1e-9 and round(n) >= 1,
             "grid_step: must divide grid_stop - grid_start into at least one step")
    if exp in ("frequency_scan", "cw_point", "optimize"):
        for name in ("u", "j", "delta_RL"):
            need(getattr(cfg, name) is not None, f"{name}: required for {exp}")
        need(cfg.f != 0, f"f: continuous-wave experiments need a nonzero drive")
    if exp == "fock_sweep":
        need(cfg.u is not None, "u: required for fock_sweep")
        need(cfg.j is not None or cfg.j_values is not None, "j: give j or j_values for fock_sweep")
    if exp == "optimize":
        need((cfg.bounds_low is None) == (cfg.bounds_high is None),
             "bounds_low/bounds_high: give both or neither")
        if cfg.bounds_low is not None:
            need(cfg.bounds_high > cfg.bounds_low, "bounds_high: must exceed bounds_low")
    if exp == "efficiency_sweep":
        need(cfg.f != 0, "f: continuous-wave experiments need a nonzero drive")
        need(cfg.u is not None or cfg.u_values is not None, "u: give u or u_values for efficiency_sweep")
        need(cfg.delta_RL is not None or cfg.panels, "panels: give panels or delta_RL for efficiency_sweep")
    return cfg


def build_config(values: dict[str, Any]) -> RunConfig:
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    return validate(RunConfig(**coerced))


def resolve_preset(name: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Preset defaults with ``overrides`` applied on top.

    A scalar ``j`` replaces the preset's j list and a scalar ``u`` its u list,
    so ``fig4 --j 100`` sweeps the single coupling J = 100.
    """
    if name not in PRESET_DEFAULTS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    overrides = dict(overrides or {})
    values = dict(PRESET_DEFAULTS[name])
    if "j" in overrides and "j_values" not in overrides and "j_values" in values:
        values["j_values"] = None
    if name == "fig3" and "j" in overrides and "j_values" not in overrides:
        values["j_values"] = [overrides["j"]]
    if "u" in overrides and "u_values" not in overrides and "u_values" in values:
        values["u_values"] = [overrides["u"]]
    if name == "fig3" and "delta_RL" in overrides and "panels" not in overrides:
        values["panels"] = None
    values.update(overrides)
    return build_config(values)


def load_config_file(path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object of key/value pairs")
    for k, v in data.items():
        if isinstance(v, dict):
            raise ConfigError(f"{k}: nested objects are not allowed in a flat config")
    data.update(overrides or {})
    return build_config(data)
