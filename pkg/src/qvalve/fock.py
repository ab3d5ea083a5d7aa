"""Truncated two-site Fock space and the ladder-operator algebra on it.

Basis ordering is occupation-number lexicographic with the left site as the
slow index: ``|n_L, n_R>`` sits at position ``n_L * dim_right + n_R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

Site = Literal["L", "R"]
SITES: tuple[Site, Site] = ("L", "R")


class TruncationError(ValueError):
    """Raised for a Fock cutoff below one quantum."""


class ShapeError(ValueError):
    """Raised when operator and state dimensions do not line up."""


def _check_site(site: str) -> Site:
    if site not in SITES:
        raise ValueError(f"site must be 'L' or 'R', got {site!r}")
    return site  # type: ignore[return-value]


def annihilation(n_max: int) -> np.ndarray:
    """Annihilation operator on a single mode truncated at ``n_max`` quanta."""
    if int(n_max) != n_max or n_max < 1:
        raise TruncationError(f"n_max must be an integer >= 1, got {n_max!r}")
    n_max = int(n_max)
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def creation(n_max: int) -> np.ndarray:
    return annihilation(n_max).conj().T


def number(n_max: int) -> np.ndarray:
    if int(n_max) != n_max or n_max < 1:
        raise TruncationError(f"n_max must be an integer >= 1, got {n_max!r}")
    return np.diag(np.arange(int(n_max) + 1, dtype=float)).astype(complex)


@dataclass(frozen=True)
class FockSpace:
    """Product space of two truncated bosonic modes, left factor first."""

    n_max_left: int
    n_max_right: int

    def __post_init__(self):
        for name in ("n_max_left", "n_max_right"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise TruncationError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))

    @classmethod
    def uniform(cls, n_max: int) -> "FockSpace":
        return cls(n_max, n_max)

    @property
    def dim_left(self) -> int:
        return self.n_max_left + 1

    @property
    def dim_right(self) -> int:
        return self.n_max_right + 1

    @property
    def total_dim(self) -> int:
        return self.dim_left * self.dim_right

    def site_dim(self, site: Site) -> int:
        return self.dim_left if _check_site(site) == "L" else self.dim_right

    def site_cutoff(self, site: Site) -> int:
        return self.site_dim(site) - 1

    def enlarged(self, extra: int) -> "FockSpace":
        return FockSpace(self.n_max_left + extra, self.n_max_right + extra)

    # cached_property needs a writable __dict__, which frozen dataclasses keep
    @cached_property
    def _ops(self) -> dict:
        ops = {}
        for site in SITES:
            cutoff = self.site_cutoff(site)
            ops[site] = embed(annihilation(cutoff), site, self)
            # exact integers on the diagonal, unlike a^dag a
            ops[site + "n"] = embed(number(cutoff), site, self)
        return ops

    def a(self, site: Site) -> np.ndarray:
        """Embedded annihilation operator of ``site`` (a fresh copy)."""
        return self._ops[_check_site(site)].copy()

    def n(self, site: Site) -> np.ndarray:
        return self._ops[_check_site(site) + "n"].copy()

    def total_number(self) -> np.ndarray:
        return self._ops["Ln"] + self._ops["Rn"]

    def identity(self) -> np.ndarray:
        return np.eye(self.total_dim, dtype=complex)

    def index(self, n_left: int, n_right: int) -> int:
        if not (0 <= n_left <= self.n_max_left and 0 <= n_right <= self.n_max_right):
            raise TruncationError(
                f"|{n_left},{n_right}> outside truncation ({self.n_max_left},{self.n_max_right})"
            )
        return n_left * self.dim_right + n_right

    def fock_state(self, n_left: int, n_right: int) -> np.ndarray:
        """Density matrix of the product Fock state ``|n_left, n_right>``."""
        rho = np.zeros((self.total_dim, self.total_dim), dtype=complex)
        k = self.index(n_left, n_right)
        rho[k, k] = 1.0
        return rho

    def vacuum(self) -> np.ndarray:
        return self.fock_state(0, 0)


def embed(op: np.ndarray, site: Site, space: FockSpace) -> np.ndarray:
    """Lift a single-site operator to the two-site space (``op x I`` or ``I x op``)."""
    site = _check_site(site)
    op = np.asarray(op)
    d = space.site_dim(site)
    if op.shape != (d, d):
        raise ShapeError(f"operator of shape {op.shape} does not act on site {site} (dim {d})")
    if site == "L":
        return np.kron(op, np.eye(space.dim_right))
    return np.kron(np.eye(space.dim_left), op)


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """``Tr(op @ rho)``; callers drop the imaginary part for Hermitian ``op``."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape != rho.shape:
        raise ShapeError(f"cannot take <{op.shape}> in a state of shape {rho.shape}")
    # Tr(AB) = sum_ij A_ij B_ji without forming the product
    return complex(np.einsum("ij,ji->", op, rho))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= atol)
