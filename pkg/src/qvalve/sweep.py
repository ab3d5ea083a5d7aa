"""Parameter scans and frequency optimization behind the three experiments.

Every grid point is an independent work item. ``workers > 1`` farms points
out to a process pool; results come back in grid order either way, so the
tables do not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import fock_transport
from .fock import FockSpace
from .model import JunctionParams, PumpDirection, bare_eigenanalysis
from .observables import K, MINUS_K, cw_diode_figures, diode_figures_from_currents

log = logging.getLogger(__name__)

SCAN_VARIABLES = ("omega_g", "j", "delta_RL")
INV_PHI = (math.sqrt(5) - 1) / 2


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    steady_tol: float = 1e-10
    rtol: float = 1e-8
    atol: float = 1e-10
    epsilon: float = 1e-6
    t_cap: float = 200.0


@dataclass(frozen=True)
class ScanSpec:
    """One-dimensional scan. ``base`` fixes everything but ``variable``;
    for ``omega_g`` and ``delta_RL`` scans the other offset is taken from
    ``base`` (``delta_RL = delta_L - delta_R``, ``omega_g`` their mean)."""

    variable: str
    grid: tuple[float, ...]
    base: JunctionParams
    mode: str = "cw"
    n_init: int = 2
    space: FockSpace | None = None
    options: SolverOptions = SolverOptions()

    def __post_init__(self):
        if self.variable not in SCAN_VARIABLES:
            raise ValueError(f"variable must be one of {SCAN_VARIABLES}, got {self.variable!r}")
        grid = tuple(float(x) for x in self.grid)
        if len(grid) < 2:
            raise ValueError("scan grid needs at least two points")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("scan grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.mode not in ("cw", "fock"):
            raise ValueError(f"mode must be 'cw' or 'fock', got {self.mode!r}")

    def params_at(self, x: float) -> JunctionParams:
        if self.variable == "omega_g":
            return self.base.with_offset(x)
        if self.variable == "delta_RL":
            return self.base.with_delta_RL(x)
        return replace(self.base, j=x)


def pool_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _status(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


def cw_point(params: JunctionParams, space: FockSpace, steady_tol: float = 1e-10) -> dict:
    """One continuous-wave row: diode figures plus bare-level occupations."""
    row = {
        "omega_g": params.omega_g, "R": math.nan, "g2_L": math.nan, "g2_R": math.nan,
        "NL_ground": math.nan, "NL_excited": math.nan, "T_L": math.nan, "T_R": math.nan,
        "status": "ok",
    }
    try:
        levels = bare_eigenanalysis(params, space, 2)
        row["NL_ground"], row["NL_excited"] = levels[0].n_left, levels[1].n_left
        if levels[0].degenerate or levels[1].degenerate:
            row["status"] = "degenerate-levels"
        fig = cw_diode_figures(params, space, steady_tol)
    except Exception as exc:  # flagged row, scan continues
        log.warning("omega_g=%g failed: %s", params.omega_g, exc)
        row["status"] = _status(exc)
        return row
    # both sites under left pumping, labeled by the emitting site
    row.update(
        R=fig.R, T_L=fig.T_L, T_R=fig.T_R,
        g2_L=fig.g2_all[("L", K)], g2_R=fig.g2_all[("R", K)],
    )
    return row


def _frequency_point(x: float, spec: ScanSpec, space: FockSpace) -> dict:
    row = cw_point(spec.params_at(x), space, spec.options.steady_tol)
    row["omega_g"] = x
    return row


def frequency_scan(spec: ScanSpec, workers: int = 1) -> list[dict]:
    """Laser-frequency scan: rectification, emission statistics and the
    left occupation of the two lowest bare eigenstates at each offset."""
    if spec.mode != "cw" or spec.variable != "omega_g":
        raise ValueError("frequency_scan needs a continuous-wave omega_g scan")
    space = spec.space or FockSpace(6, 6)
    return pool_map(partial(_frequency_point, spec=spec, space=space), spec.grid, workers)


@dataclass(frozen=True)
class OptimizationResult:
    omega_star: float
    objective: float
    R_at_star: float
    T_at_star: float
    evaluations: int
    direction: str


def golden_section_search(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-3
) -> tuple[float, float, int]:
    """Minimize ``f`` on ``[a, b]`` until the bracket is narrower than ``tol``.

    Returns the best point seen, its value and the number of evaluations.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    best = min((fc, c), (fd, d))
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
        n += 1
    return best[1], best[0], n


def frequency_window(params: JunctionParams, margin: float = 3.0) -> tuple[float, float]:
    """Offsets bracketing the resonances of the left-like normal mode.

    The linear dimer has normal modes at ``omega_g = -/+ sqrt(delta_RL^2/4 + j^2)``;
    single- and two-photon features of the nonlinear site sit at and up to
    ``u`` below the one with the larger left weight.
    """
    omega = math.hypot(params.delta_RL / 2, params.j)
    centre = -omega if params.delta_RL >= 0 else omega
    return centre - params.u - margin, centre + margin


def optimize_frequency(
    base: JunctionParams,
    direction: str,
    bounds: tuple[float, float],
    coarse_points: int = 16,
    *,
    space: FockSpace | None = None,
    resolution: float = 1e-3,
    steady_tol: float = 1e-10,
) -> OptimizationResult:
    """Best laser offset for the diode efficiency R*T of one direction.

    ``direction="left"`` minimizes R*T_L, ``"right"`` maximizes R*T_R. A
    coarse grid picks the basin (ties go to the smaller offset); golden
    section then refines between its neighbours down to ``resolution``.
    """
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError(f"bounds must be a finite increasing interval, got {bounds!r}")
    if coarse_points < 8:
        raise ValueError("coarse_points must be >= 8")
    space = space or FockSpace(6, 6)
    cache: dict[float, tuple[float, float, float]] = {}

    def evaluate(w: float) -> tuple[float, float, float]:
        if w not in cache:
            try:
                fig = cw_diode_figures(base.with_offset(w), space, steady_tol)
                T = fig.T_L if direction == "left" else fig.T_R
                signed = fig.R * T if direction == "left" else -fig.R * T
                cache[w] = (signed, fig.R, T)
            except Exception as exc:
                log.debug("objective undefined at omega_g=%g: %s", w, exc)
                cache[w] = (math.inf, math.nan, math.nan)
        return cache[w]

    grid = np.linspace(lo, hi, coarse_points)
    values = np.array([evaluate(float(w))[0] for w in grid])
    if not np.any(np.isfinite(values)):
        raise OptimizationError("objective undefined on the whole coarse grid")
    i = int(np.argmin(values))
    a, b = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, coarse_points - 1)])
    w_ref, s_ref, _ = golden_section_search(lambda w: evaluate(w)[0], a, b, resolution)
    w_star = w_ref if s_ref < values[i] else float(grid[i])
    signed, R, T = evaluate(w_star)
    return OptimizationResult(
        omega_star=w_star,
        objective=R * T,
        R_at_star=R,
        T_at_star=T,
        evaluations=len(cache),
        direction=direction,
    )


def _optimize_point(
    job: tuple[float, float], base: JunctionParams, direction: str, space: FockSpace,
    coarse_step: float, resolution: float, steady_tol: float,
) -> dict:
    u, j = job
    params = replace(base, u=u, j=j)
    lo, hi = frequency_window(params)
    n = max(8, int(round((hi - lo) / coarse_step)) + 1)
    row = {"j": j, "u": u, "delta_RL": params.delta_RL, "direction": direction}
    try:
        res = optimize_frequency(
            params, direction, (lo, hi), n, space=space, resolution=resolution, steady_tol=steady_tol
        )
    except Exception as exc:
        row.update(omega_star=math.nan, R=math.nan, T=math.nan, RT=math.nan,
                   evaluations=0, status=_status(exc))
        return row
    row.update(omega_star=res.omega_star, R=res.R_at_star, T=res.T_at_star, RT=res.objective,
               evaluations=res.evaluations, status="ok")
    return row


def efficiency_sweep(
    base: JunctionParams,
    direction: str,
    j_values: Sequence[float],
    u_values: Sequence[float],
    *,
    space: FockSpace | None = None,
    coarse_step: float = 0.5,
    resolution: float = 1e-3,
    steady_tol: float = 1e-10,
    workers: int = 1,
) -> list[dict]:
    """Frequency-optimized diode efficiency over a (u, j) grid at fixed
    ``base.delta_RL``; rows ordered by u, then j."""
    space = space or FockSpace(6, 6)
    jobs = [(float(u), float(j)) for u in sorted(u_values) for j in sorted(j_values)]
    fn = partial(
        _optimize_point, base=base, direction=direction, space=space,
        coarse_step=coarse_step, resolution=resolution, steady_tol=steady_tol,
    )
    return pool_map(fn, jobs, workers)


def fock_pair(
    params: JunctionParams, n_init: int, space: FockSpace | None = None,
    options: SolverOptions = SolverOptions(),
):
    """Transport of ``|n_init>`` launched from each side; returns the two
    results and the combined diode figures."""
    runs = {
        d: fock_transport(
            params, n_init, d, options.epsilon, space=space,
            t_cap=options.t_cap, tol=options.rtol, atol=options.atol,
        )
        for d in (K, MINUS_K)
    }
    Q = {(s, d): runs[d].Q(s) for d in runs for s in ("L", "R")}
    return runs[K], runs[MINUS_K], diode_figures_from_currents(Q)


def _fock_point(x: float, spec: ScanSpec) -> dict:
    params = spec.params_at(x)
    row = {"delta_RL": params.delta_RL, "j": params.j, "R": math.nan, "T_R": math.nan,
           "T_L": math.nan, "status": "ok"}
    try:
        fwd, bwd, fig = fock_pair(params, spec.n_init, spec.space, spec.options)
    except Exception as exc:
        log.warning("fock point %s=%g failed: %s", spec.variable, x, exc)
        row["status"] = _status(exc)
        return row
    row.update(
        R=fig.R, T_R=fig.T_R, T_L=fig.T_L,
        Q_sum_k=fwd.Q_L + fwd.Q_R, Q_sum_minus_k=bwd.Q_L + bwd.Q_R,
        min_eigenvalue=min(fwd.min_eigenvalue, bwd.min_eigenvalue),
        max_trace_drift=max(fwd.max_trace_drift, bwd.max_trace_drift),
    )
    return row


def fock_sweep(spec: ScanSpec, workers: int = 1) -> list[dict]:
    """Fock-state transport in both directions at every grid point."""
    if spec.mode != "fock":
        raise ValueError("fock_sweep needs mode='fock'")
    return pool_map(partial(_fock_point, spec=spec), spec.grid, workers)
