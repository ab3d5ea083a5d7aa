"""Time evolution of the master equation and time-integrated output currents."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .fock import FockSpace, ShapeError, Site
from .liouville import liouvillian, unvec, vec
from .model import JunctionParams, PumpDirection, build_hamiltonian, collapse_operators


class StiffnessError(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    pass


class IncompleteRelaxationError(RuntimeError):
    def __init__(self, residual: float, horizon: float):
        self.residual = residual
        self.horizon = horizon
        super().__init__(
            f"excitation {residual:.3e} left at t={horizon:g}/gamma; raise the cap or epsilon"
        )


class DataError(ValueError):
    pass


TRACE_DRIFT_LIMIT = 1e-6


@dataclass
class Trajectory:
    """Observables sampled on a uniform output grid.

    ``expectations`` maps observable names to real time series; the output
    currents read ``n_L`` and ``n_R``. ``sampler`` re-evaluates the dense
    interpolant of the integration so the grid can be refined without
    integrating again.
    """

    times: np.ndarray
    expectations: dict[str, np.ndarray]
    trace: np.ndarray
    min_eigenvalue: np.ndarray
    final_state: np.ndarray
    gamma: float = 1.0
    observables: Mapping[str, np.ndarray] = field(default_factory=dict, repr=False)
    sampler: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    nfev: int = 0

    def q(self, site: Site) -> np.ndarray:
        """Emission rate ``gamma <n_site>(t)`` of one resonator."""
        return self.gamma * self.expectations["n_" + site]

    @property
    def q_L(self) -> np.ndarray:
        return self.q("L")

    @property
    def q_R(self) -> np.ndarray:
        return self.q("R")

    def resample(self, n_points: int) -> "Trajectory":
        if self.sampler is None:
            raise DataError("trajectory has no interpolant to resample")
        times = np.linspace(self.times[0], self.times[-1], n_points)
        states = self.sampler(times)
        exps, trace, min_eig = _record(states, self.observables)
        return replace(self, times=times, expectations=exps, trace=trace, min_eigenvalue=min_eig)


def _record(states: np.ndarray, observables: Mapping[str, np.ndarray]):
    """States are vectorized columns; returns expectations, trace, min eigenvalue."""
    n_t = states.shape[1]
    d = int(round(math.sqrt(states.shape[0])))
    rhos = states.T.reshape(n_t, d, d).transpose(0, 2, 1)  # column stacking
    exps = {
        name: np.einsum("ij,tji->t", op, rhos).real for name, op in observables.items()
    }
    trace = np.einsum("tii->t", rhos).real
    herm = 0.5 * (rhos + rhos.conj().transpose(0, 2, 1))
    min_eig = np.linalg.eigvalsh(herm)[:, 0]
    return exps, trace, min_eig


def junction_observables(space: FockSpace, with_g2: bool = False) -> dict[str, np.ndarray]:
    obs = {"n_L": space.n("L"), "n_R": space.n("R")}
    if with_g2:
        for site in ("L", "R"):
            a = space.a(site)
            ad = a.conj().T
            obs["aadd_" + site] = ad @ ad @ a @ a
    return obs


def evolve(
    rho0: np.ndarray,
    H: np.ndarray,
    collapse: Sequence[np.ndarray],
    t_end: float,
    tol: float = 1e-8,
    atol: float = 1e-10,
    *,
    observables: Mapping[str, np.ndarray] | None = None,
    space: FockSpace | None = None,
    n_points: int = 2000,
    gamma: float = 1.0,
) -> Trajectory:
    """Integrate ``d rho/dt = L rho`` from 0 to ``t_end`` with an embedded
    8(5,3) Runge-Kutta pair (DOP853).

    ``tol``/``atol`` are the relative/absolute local error targets. Either
    pass ``observables`` explicitly or a ``space`` to record ``n_L``/``n_R``.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    if not (tol > 0 and atol > 0):
        raise ValueError("tolerances must be positive")
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    if rho0.shape != (d, d) or np.shape(H) != (d, d):
        raise ShapeError(f"state {rho0.shape} and Hamiltonian {np.shape(H)} do not match")
    if observables is None:
        if space is None:
            raise ValueError("give either observables or a FockSpace")
        observables = junction_observables(space)
    if space is not None and space.total_dim != d:
        raise ShapeError(f"space dimension {space.total_dim} != state dimension {d}")

    L = liouvillian(H, collapse, sparse=True)
    sol = solve_ivp(
        lambda t, y: L @ y,
        (0.0, float(t_end)),
        vec(rho0),
        method="DOP853",
        rtol=tol,
        atol=atol,
        dense_output=True,
    )
    if sol.status != 0:
        if "step size" in sol.message:
            raise StiffnessError(
                f"integrator step underflow ({sol.message}); reduce J or detuning, or tighten the truncation"
            )
        raise IntegrationError(sol.message)

    times = np.linspace(0.0, float(t_end), n_points)
    states = sol.sol(times)
    exps, trace, min_eig = _record(states, observables)
    drift = float(np.max(np.abs(trace - 1.0)))
    if drift > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"trace drifted by {drift:.2e}")
    return Trajectory(
        times=times,
        expectations=exps,
        trace=trace,
        min_eigenvalue=min_eig,
        final_state=unvec(sol.y[:, -1], d),
        gamma=gamma,
        observables=dict(observables),
        sampler=sol.sol,
        nfev=int(sol.nfev),
    )


def integrated_current(traj: Trajectory, site: Site) -> float:
    """Trapezoidal integral of the emission rate of ``site`` over the trajectory."""
    t = np.asarray(traj.times, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise DataError("trajectory times must be strictly increasing")
    return float(np.trapezoid(traj.q(site), t))


@dataclass(frozen=True)
class TransportResult:
    Q_L: float
    Q_R: float
    pump: PumpDirection
    horizon: float
    residual_excitation: float
    n_points: int = 0
    min_eigenvalue: float = 0.0
    max_trace_drift: float = 0.0

    def Q(self, site: Site) -> float:
        return self.Q_L if site == "L" else self.Q_R


def fock_transport(
    params: JunctionParams,
    n_init: int,
    pump: PumpDirection,
    epsilon: float = 1e-6,
    *,
    space: FockSpace | None = None,
    t_cap: float = 200.0,
    tol: float = 1e-8,
    atol: float = 1e-10,
    n_points: int = 2000,
    current_tol: float = 1e-6,
    max_points: int = 2000 * 2**8,
) -> TransportResult:
    """Relax an instantaneously prepared Fock state and integrate the currents.

    ``|n_init>`` is placed in the resonator named by ``pump`` with the other
    one empty; the drive is off. Integration runs until the total excitation
    falls below ``epsilon`` (hard cap ``t_cap``), then the output grid is
    doubled until both integrated currents move by less than ``current_tol``.
    """
    if int(n_init) != n_init or n_init < 1:
        raise ValueError(f"n_init must be an integer >= 1, got {n_init!r}")
    n_init = int(n_init)
    if space is None:
        space = FockSpace(n_init, n_init)
    params = replace(params, f=0.0, pump=pump)
    H = build_hamiltonian(params, space, include_drive=False)
    c_ops = collapse_operators(params, space)
    rho0 = space.fock_state(n_init, 0) if pump.pumped_site == "L" else space.fock_state(0, n_init)
    n_tot = space.total_number()

    # equal loss on both sites: <N>(t) = n e^{-gamma t}; start a little past that
    horizon = min(t_cap, math.ceil(math.log(n_init / epsilon) / params.gamma) + 2.0 / params.gamma)
    while True:
        traj = evolve(
            rho0, H, c_ops, horizon, tol, atol,
            observables=junction_observables(space), n_points=n_points, gamma=params.gamma,
        )
        residual = float(np.real(np.trace(n_tot @ traj.final_state)))
        if residual < epsilon:
            break
        if horizon >= t_cap:
            raise IncompleteRelaxationError(residual, horizon)
        horizon = min(t_cap, 2 * horizon)

    q = (integrated_current(traj, "L"), integrated_current(traj, "R"))
    while True:
        if 2 * traj.times.size > max_points:
            raise IntegrationError("output grid refinement did not settle the integrated currents")
        finer = traj.resample(2 * traj.times.size)
        q_fine = (integrated_current(finer, "L"), integrated_current(finer, "R"))
        change = max(abs(a - b) for a, b in zip(q, q_fine))
        traj, q = finer, q_fine
        if change < current_tol:
            break

    return TransportResult(
        Q_L=max(q[0], 0.0),
        Q_R=max(q[1], 0.0),
        pump=pump,
        horizon=float(horizon),
        residual_excitation=residual,
        n_points=int(traj.times.size),
        min_eigenvalue=float(np.min(traj.min_eigenvalue)),
        max_trace_drift=float(np.max(np.abs(traj.trace - 1.0))),
    )
