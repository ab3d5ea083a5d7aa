"""Rectification factor, transport efficiencies and zero-delay coherence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import FockSpace, Site, expectation
from .liouville import liouvillian, solve_steady_state
from .model import JunctionParams, PumpDirection, build_hamiltonian, collapse_operators

K = PumpDirection.LEFT_TO_RIGHT
MINUS_K = PumpDirection.RIGHT_TO_LEFT

DARK = 1e-14


class UndefinedRectificationError(ValueError):
    pass


class UndefinedEfficiencyError(ValueError):
    pass


class UndefinedG2Error(ValueError):
    pass


def rectification(Q_R_fwd: float, Q_L_bwd: float) -> float:
    """Normalized difference between the right output under left pumping and
    the left output under right pumping. +1 is perfect right rectification."""
    if Q_R_fwd < 0 or Q_L_bwd < 0:
        raise ValueError("currents must be non-negative")
    total = Q_R_fwd + Q_L_bwd
    if Q_R_fwd < DARK and Q_L_bwd < DARK:
        raise UndefinedRectificationError("no transport in either direction")
    return (Q_R_fwd - Q_L_bwd) / total


def transport_efficiency(Q_far: float, Q_near: float) -> float:
    """Fraction of the emission leaving through the site opposite the pump."""
    if Q_far < 0 or Q_near < 0:
        raise ValueError("currents must be non-negative")
    if Q_far < DARK and Q_near < DARK:
        raise UndefinedEfficiencyError("no emission from either site")
    return Q_far / (Q_far + Q_near)


def g2(rho: np.ndarray, site: Site, space: FockSpace) -> float:
    """Zero-delay second-order coherence of the emission from ``site``."""
    a = space.a(site)
    ad = a.conj().T
    n = expectation(ad @ a, rho).real
    if n <= 1e-12:
        raise UndefinedG2Error(f"site {site} is dark (<n> = {n:.2e})")
    return expectation(ad @ ad @ a @ a, rho).real / n**2


def _g2_or_nan(rho, site, space) -> float:
    try:
        return g2(rho, site, space)
    except UndefinedG2Error:
        return math.nan


@dataclass(frozen=True)
class DiodeFigures:
    """Both pump directions summarized.

    ``Q`` maps ``(site, direction)`` to the integrated current (or the
    steady-state rate in continuous-wave mode). ``g2_L`` is the left-site
    emission under right pumping, ``g2_R`` the right-site emission under
    left pumping; ``g2_all`` holds every site/direction pair.
    """

    R: float
    T_L: float
    T_R: float
    g2_L: float = math.nan
    g2_R: float = math.nan
    Q: dict = field(default_factory=dict)
    g2_all: dict = field(default_factory=dict)

    @property
    def RT_L(self) -> float:
        return self.R * self.T_L

    @property
    def RT_R(self) -> float:
        return self.R * self.T_R

    @property
    def Q_matrix(self) -> dict[str, float]:
        return {f"Q_{s}[{d.value}]": v for (s, d), v in self.Q.items()}


def diode_figures_from_currents(Q: dict, g2_all: dict | None = None) -> DiodeFigures:
    """Assemble R, T_L and T_R from the four currents keyed by ``(site, direction)``."""
    g2_all = g2_all or {}
    return DiodeFigures(
        R=rectification(Q[("R", K)], Q[("L", MINUS_K)]),
        T_L=transport_efficiency(Q[("L", MINUS_K)], Q[("R", MINUS_K)]),
        T_R=transport_efficiency(Q[("R", K)], Q[("L", K)]),
        g2_L=g2_all.get(("L", MINUS_K), math.nan),
        g2_R=g2_all.get(("R", K), math.nan),
        Q=dict(Q),
        g2_all=dict(g2_all),
    )


def cw_steady_states(
    params: JunctionParams, space: FockSpace, tol: float = 1e-10
) -> dict[PumpDirection, np.ndarray]:
    """Steady state for each pump direction at equal drive amplitude."""
    if params.f == 0:
        raise ValueError("continuous-wave figures need a nonzero drive amplitude")
    c_ops = collapse_operators(params, space)
    states = {}
    for direction in (K, MINUS_K):
        H = build_hamiltonian(params.with_pump(direction), space, include_drive=True)
        states[direction] = solve_steady_state(liouvillian(H, c_ops, sparse=True), tol=tol).rho
    return states


def cw_diode_figures(
    params: JunctionParams, space: FockSpace, tol: float = 1e-10
) -> DiodeFigures:
    """Continuous-wave diode figures from the two steady states.

    The photodetection window cancels in every ratio, so the emission rates
    ``gamma <n_i>`` stand in for the integrated currents.
    """
    states = cw_steady_states(params, space, tol)
    Q, g2_all = {}, {}
    for direction, rho in states.items():
        for site in ("L", "R"):
            Q[(site, direction)] = max(params.gamma * expectation(space.n(site), rho).real, 0.0)
            g2_all[(site, direction)] = _g2_or_nan(rho, site, space)
    return diode_figures_from_currents(Q, g2_all)
