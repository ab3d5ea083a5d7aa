"""Junction Hamiltonian, photon-loss channels and bare-spectrum analysis.

All rates are in units of the loss rate ``gamma`` (which is 1 everywhere
except in scaling checks). Detunings are resonator minus laser frequency,
so the drive frame is the one rotating with the laser.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .fock import FockSpace, Site


class PumpDirection(enum.Enum):
    """Which resonator is driven: ``k`` pumps the left site, ``-k`` the right."""

    LEFT_TO_RIGHT = "k"
    RIGHT_TO_LEFT = "-k"

    @property
    def pumped_site(self) -> Site:
        return "L" if self is PumpDirection.LEFT_TO_RIGHT else "R"

    @property
    def far_site(self) -> Site:
        return "R" if self is PumpDirection.LEFT_TO_RIGHT else "L"

    @property
    def reverse(self) -> "PumpDirection":
        if self is PumpDirection.LEFT_TO_RIGHT:
            return PumpDirection.RIGHT_TO_LEFT
        return PumpDirection.LEFT_TO_RIGHT


@dataclass(frozen=True)
class ScanOffset:
    """Laser-frequency offset applied equally to both detunings."""

    omega_g: float
    delta_RL: float

    @property
    def delta_L(self) -> float:
        return self.delta_RL / 2 + self.omega_g

    @property
    def delta_R(self) -> float:
        return -self.delta_RL / 2 + self.omega_g


@dataclass(frozen=True)
class JunctionParams:
    """Physical parameters of the junction in units of ``gamma``.

    ``kerr_site`` mirrors the device when set to ``"R"``; every preset keeps
    the canonical orientation with the nonlinearity on the left.
    """

    delta_L: float
    delta_R: float
    u: float
    j: float
    f: complex = 0.5
    gamma: float = 1.0
    pump: PumpDirection = PumpDirection.LEFT_TO_RIGHT
    kerr_site: Site = "L"

    def __post_init__(self):
        if not (self.u >= 0):
            raise ValueError(f"Kerr strength u must be >= 0, got {self.u!r}")
        if not (self.j >= 0):
            raise ValueError(f"tunnel coupling j must be >= 0, got {self.j!r}")
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        for name in ("delta_L", "delta_R"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not np.isfinite(self.f):
            raise ValueError("drive amplitude f must be finite")
        if self.kerr_site not in ("L", "R"):
            raise ValueError(f"kerr_site must be 'L' or 'R', got {self.kerr_site!r}")
        if not isinstance(self.pump, PumpDirection):
            object.__setattr__(self, "pump", PumpDirection(self.pump))

    @classmethod
    def from_offset(cls, offset: ScanOffset, **kwargs) -> "JunctionParams":
        return cls(delta_L=offset.delta_L, delta_R=offset.delta_R, **kwargs)

    @property
    def delta_RL(self) -> float:
        return self.delta_L - self.delta_R

    @property
    def omega_g(self) -> float:
        """Common laser offset, ``(delta_L + delta_R) / 2``."""
        return 0.5 * (self.delta_L + self.delta_R)

    def with_delta_RL(self, delta_RL: float) -> "JunctionParams":
        off = ScanOffset(self.omega_g, delta_RL)
        return replace(self, delta_L=off.delta_L, delta_R=off.delta_R)

    def with_pump(self, pump: PumpDirection) -> "JunctionParams":
        return replace(self, pump=pump)

    def with_offset(self, omega_g: float) -> "JunctionParams":
        """Same inter-resonator detuning, laser shifted so that
        ``delta_L = delta_RL/2 + omega_g``."""
        off = ScanOffset(omega_g, self.delta_RL)
        return replace(self, delta_L=off.delta_L, delta_R=off.delta_R)

    def mirrored(self) -> "JunctionParams":
        """Swap the site labels: detunings, Kerr site and pump side."""
        return replace(
            self,
            delta_L=self.delta_R,
            delta_R=self.delta_L,
            kerr_site="R" if self.kerr_site == "L" else "L",
            pump=self.pump.reverse,
        )

    def scaled(self, factor: float) -> "JunctionParams":
        """Multiply every rate (detunings, u, j, f, gamma) by ``factor``."""
        return replace(
            self,
            delta_L=self.delta_L * factor,
            delta_R=self.delta_R * factor,
            u=self.u * factor,
            j=self.j * factor,
            f=self.f * factor,
            gamma=self.gamma * factor,
        )


def build_hamiltonian(
    params: JunctionParams, space: FockSpace, include_drive: bool = True
) -> np.ndarray:
    """Bose-Hubbard dimer Hamiltonian, optionally with the coherent drive term."""
    a_l, a_r = space.a("L"), space.a("R")
    n_l, n_r = space.n("L"), space.n("R")
    a_k = a_l if params.kerr_site == "L" else a_r
    ad_k = a_k.conj().T
    H = (
        params.delta_L * n_l
        + params.delta_R * n_r
        + 0.5 * params.u * (ad_k @ ad_k @ a_k @ a_k)
        + params.j * (a_l.conj().T @ a_r + a_l @ a_r.conj().T)
    )
    if include_drive and params.f != 0:
        a_p = a_l if params.pump.pumped_site == "L" else a_r
        f = complex(params.f)
        H = H + f * a_p.conj().T + f.conjugate() * a_p
    return H


def collapse_operators(params: JunctionParams, space: FockSpace) -> list[np.ndarray]:
    """Photon loss from each resonator, ``[sqrt(gamma) a_L, sqrt(gamma) a_R]``."""
    rate = math.sqrt(params.gamma)
    return [rate * space.a("L"), rate * space.a("R")]


@dataclass(frozen=True)
class EigenLevel:
    energy: float
    n_left: float
    degenerate: bool = False


def bare_eigenanalysis(
    params: JunctionParams, space: FockSpace, n_levels: int = 2
) -> list[EigenLevel]:
    """Lowest ``n_levels`` eigenpairs of the undriven Hamiltonian.

    Each level carries the left-site occupation of its eigenvector. Levels
    closer than 1e-10 to a neighbour are flagged ``degenerate``; their
    occupations then depend on the (deterministic) LAPACK basis choice.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if n_levels > space.total_dim:
        raise ValueError(f"n_levels={n_levels} exceeds the space dimension {space.total_dim}")
    H = build_hamiltonian(params, space, include_drive=False)
    energies, vectors = np.linalg.eigh(H)
    n_l = np.real(np.diag(space.n("L")))
    occupations = np.einsum("ik,i->k", np.abs(vectors) ** 2, n_l)
    gaps = np.diff(energies)
    levels = []
    for k in range(n_levels):
        near = (k > 0 and gaps[k - 1] < 1e-10) or (k < len(gaps) and gaps[k] < 1e-10)
        levels.append(EigenLevel(float(energies[k]), float(occupations[k]), bool(near)))
    return levels


def eigen_truncation_shift(
    params: JunctionParams, space: FockSpace, n_levels: int = 2, extra: int = 2
) -> dict[str, float]:
    """Change of the low-level occupations and excitation gaps when both
    cutoffs grow by ``extra``.

    Absolute energies are not compared: with a red-detuned linear site the
    truncated spectrum is unbounded below in the cutoff.
    """
    small = bare_eigenanalysis(params, space, n_levels)
    big = bare_eigenanalysis(params, space.enlarged(extra), n_levels)
    d_occ = max(abs(a.n_left - b.n_left) for a, b in zip(small, big))
    gaps_small = [lv.energy - small[0].energy for lv in small]
    gaps_big = [lv.energy - big[0].energy for lv in big]
    d_gap = max(abs(a - b) for a, b in zip(gaps_small, gaps_big))
    return {"n_left": float(d_occ), "gap": float(d_gap)}
