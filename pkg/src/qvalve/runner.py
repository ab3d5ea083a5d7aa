"""Execute a resolved ``RunConfig`` and write its data table and metadata."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import RunConfig
from .fock import FockSpace
from .model import JunctionParams, ScanOffset, eigen_truncation_shift
from .observables import K, cw_diode_figures
from .sweep import (
    ScanSpec, SolverOptions, cw_point, efficiency_sweep, fock_pair, fock_sweep,
    frequency_scan, frequency_window, optimize_frequency,
)

COLUMNS = {
    "frequency_scan": ["omega_g", "R", "g2_L", "g2_R", "NL_ground", "NL_excited", "status"],
    "cw_point": ["omega_g", "R", "T_L", "T_R", "g2_L", "g2_R", "NL_ground", "NL_excited", "status"],
    "optimize": ["j", "u", "delta_RL", "direction", "omega_star", "R", "T", "RT", "status"],
    "efficiency_sweep": ["j", "u", "direction", "omega_star", "R", "T", "RT", "status"],
    "fock_sweep": ["delta_RL", "j", "R", "T_R", "T_L", "status"],
}

NOTES = {
    "units": "all rates and detunings in units of gamma (gamma = 1); times in 1/gamma",
    "detuning_convention": "delta_L = delta_RL/2 + omega_g, delta_R = -delta_RL/2 + omega_g",
    "frequency_scan": "g2_L and g2_R are both taken under left pumping (k), labeled by the emitting site",
    "efficiency_sweep": (
        "J values are in units of gamma; objective is R*T_L (minimized) or R*T_R (maximized); "
        "the default u list is a configurable choice, not fitted to any published curve"
    ),
    "fock_sweep": "Fock state prepared instantaneously in the pumped resonator; drive off during relaxation",
}


def _space(cfg: RunConfig, default: int) -> FockSpace:
    return FockSpace(cfg.n_max_left or default, cfg.n_max_right or default)


def _options(cfg: RunConfig) -> SolverOptions:
    return SolverOptions(cfg.steady_tol, cfg.rtol, cfg.atol, cfg.epsilon, cfg.t_cap)


def _base(cfg: RunConfig, u: float | None = None, j: float | None = None, delta_RL: float | None = None):
    off = ScanOffset(cfg.omega_g, cfg.delta_RL if delta_RL is None else delta_RL)
    return JunctionParams.from_offset(
        off, u=cfg.u if u is None else u, j=cfg.j if j is None else j, f=cfg.f
    )


def _max_shift(a: dict, b: dict, keys) -> float:
    diffs = [abs(a[k] - b[k]) for k in keys if math.isfinite(a[k]) and math.isfinite(b[k])]
    return max(diffs, default=0.0)


def _cw_shift(params: JunctionParams, space: FockSpace, tol: float) -> dict[str, float]:
    small = cw_diode_figures(params, space, tol)
    big = cw_diode_figures(params, space.enlarged(2), tol)
    keys = ["R", "T_L", "T_R"]
    shift = {k: abs(getattr(small, k) - getattr(big, k)) for k in keys}
    shift["g2"] = max(
        (abs(small.g2_all[k] - big.g2_all[k]) for k in small.g2_all
         if math.isfinite(small.g2_all[k]) and math.isfinite(big.g2_all[k])),
        default=0.0,
    )
    return shift


def run_experiment(cfg: RunConfig) -> tuple[list[dict], dict[str, Any]]:
    """Rows of the data table plus experiment-specific metadata."""
    exp = cfg.experiment
    meta: dict[str, Any] = {}
    options = _options(cfg)

    if exp in ("frequency_scan", "cw_point"):
        space = _space(cfg, 6)
        base = _base(cfg)
        if exp == "cw_point":
            rows = [cw_point(base, space, cfg.steady_tol)]
            rows[0]["omega_g"] = cfg.omega_g
        else:
            spec = ScanSpec("omega_g", tuple(cfg.scan_grid()), base, space=space, options=options)
            rows = frequency_scan(spec, cfg.workers)
        if cfg.truncation_check:
            meta["truncation"] = _frequency_truncation_report(rows, base, space, cfg.steady_tol)

    elif exp == "optimize":
        space = _space(cfg, 6)
        base = _base(cfg)
        if cfg.bounds_low is None:
            bounds = frequency_window(base)
        else:
            bounds = (cfg.bounds_low, cfg.bounds_high)
        row = {"j": base.j, "u": base.u, "delta_RL": base.delta_RL, "direction": cfg.direction}
        try:
            res = optimize_frequency(base, cfg.direction, bounds, cfg.coarse_points, space=space,
                                     resolution=cfg.resolution, steady_tol=cfg.steady_tol)
            row.update(omega_star=res.omega_star, R=res.R_at_star, T=res.T_at_star, RT=res.objective,
                       evaluations=res.evaluations, status="ok")
        except Exception as exc:
            row.update(omega_star=math.nan, R=math.nan, T=math.nan, RT=math.nan,
                       status=f"error:{type(exc).__name__}")
        rows = [row]
        meta["bounds"] = list(bounds)

    elif exp == "efficiency_sweep":
        space = _space(cfg, 6)
        panels = cfg.parsed_panels() or [(cfg.delta_RL, cfg.direction)]
        u_values = cfg.u_values if cfg.u_values is not None else [cfg.u]
        rows = []
        for delta_RL, direction in panels:
            base = JunctionParams.from_offset(ScanOffset(0.0, delta_RL), u=0.0, j=0.0, f=cfg.f)
            rows += efficiency_sweep(
                base, direction, cfg.j_grid(), u_values, space=space, coarse_step=cfg.coarse_step,
                resolution=cfg.resolution, steady_tol=cfg.steady_tol, workers=cfg.workers,
            )
        meta["panels"] = [f"{d:g}:{s}" for d, s in panels]
        if cfg.truncation_check:
            meta["truncation"] = _efficiency_truncation_report(rows, cfg, space)

    elif exp == "fock_sweep":
        space = _space(cfg, cfg.n_init)
        j_values = cfg.j_values if cfg.j_values is not None else [cfg.j]
        rows = []
        for j in sorted(j_values):
            base = _base(cfg, j=j, delta_RL=0.0)
            spec = ScanSpec("delta_RL", tuple(cfg.scan_grid()), base, mode="fock",
                            n_init=cfg.n_init, space=space, options=options)
            rows += fock_sweep(spec, cfg.workers)
        if cfg.truncation_check:
            meta["truncation"] = _fock_truncation_report(rows, cfg, space, options)
    else:  # validated upstream
        raise AssertionError(exp)
    return rows, meta


def _frequency_truncation_report(rows, base, space, tol) -> dict[str, Any]:
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return {"checked": []}
    picks = sorted({0, len(ok) - 1, int(np.argmin([r["R"] for r in ok]))})
    checked = []
    for i in picks:
        params = base.with_offset(ok[i]["omega_g"])
        entry = {"omega_g": ok[i]["omega_g"], "n_max": [space.n_max_left, space.n_max_right]}
        try:
            entry["shift"] = _cw_shift(params, space, tol)
            entry["eigen_shift"] = eigen_truncation_shift(params, space)
        except Exception as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        checked.append(entry)
    return {"extra_levels": 2, "checked": checked}


def _efficiency_truncation_report(rows, cfg, space) -> dict[str, Any]:
    checked = []
    ok = [r for r in rows if r["status"] == "ok"]
    for direction in ("left", "right"):
        sel = [r for r in ok if r["direction"] == direction]
        if not sel:
            continue
        best = max(sel, key=lambda r: abs(r["RT"]))
        params = JunctionParams.from_offset(
            ScanOffset(best["omega_star"], best["delta_RL"]), u=best["u"], j=best["j"], f=cfg.f
        )
        entry = {"direction": direction, "j": best["j"], "u": best["u"], "omega_star": best["omega_star"]}
        try:
            entry["shift"] = _cw_shift(params, space, cfg.steady_tol)
        except Exception as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        checked.append(entry)
    return {"extra_levels": 2, "checked": checked}


def _fock_truncation_report(rows, cfg, space, options) -> dict[str, Any]:
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return {"checked": []}
    r = ok[len(ok) // 2]
    params = _base(cfg, j=r["j"], delta_RL=r["delta_RL"])
    entry = {"delta_RL": r["delta_RL"], "j": r["j"]}
    try:
        _, _, big = fock_pair(params, cfg.n_init, space.enlarged(2), options)
        entry["shift"] = {k: abs(r[k] - getattr(big, k)) for k in ("R", "T_R", "T_L")}
    except Exception as exc:
        entry["error"] = f"{type(exc).__name__}: {exc}"
    return {
        "note": "undriven transport conserves excitation number, so n_max = n_init is exact",
        "extra_levels": 2,
        "checked": [entry],
    }


# --- output -----------------------------------------------------------------

def format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip form
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c, math.nan)) for c in columns])
    return buf.getvalue()


def render_json(rows: list[dict], columns: list[str]) -> str:
    def clean(v):
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return v if math.isfinite(v) else None
        if isinstance(v, np.integer):
            return int(v)
        return v

    data = [{c: clean(row.get(c, math.nan)) for c in columns} for row in rows]
    return json.dumps({"columns": columns, "rows": data}, indent=1, allow_nan=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def execute(cfg: RunConfig, name: str) -> tuple[int, Path, Path]:
    """Run, write ``<name>.csv|json`` and ``<name>.meta.json`` under ``cfg.out``.

    Returns the exit status (0 clean, 1 flagged rows) and the two paths.
    """
    started = time.perf_counter()
    rows, extra = run_experiment(cfg)
    wall = time.perf_counter() - started
    columns = COLUMNS[cfg.experiment]
    flagged = sum(1 for r in rows if r.get("status") != "ok")

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"{name}.{cfg.format}"
    text = render_csv(rows, columns) if cfg.format == "csv" else render_json(rows, columns)
    data_path.write_text(text)

    meta = {
        "name": name,
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "columns": columns,
        "n_rows": len(rows),
        "n_flagged": flagged,
        "notes": {k: v for k, v in NOTES.items() if k in ("units", "detuning_convention", cfg.experiment)},
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(wall, 3),
        **extra,
    }
    meta_path = out / f"{name}.meta.json"
    meta_path.write_text(json.dumps(_jsonable(meta), indent=1, sort_keys=True) + "\n")
    return (1 if flagged else 0), data_path, meta_path
