"""Vectorized Lindblad generator and its steady state.

Density matrices are vectorized by stacking columns (Fortran order), so
``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import ShapeError

log = logging.getLogger(__name__)

# dense null-space diagnosis beyond this superoperator size is too costly
_MAX_DENSE_DIAGNOSIS = 4096
# beyond n_max = 6 per site sparse LU fill-in grows close to dense; "auto"
# switches to ILU-preconditioned GMRES there
_MAX_DIRECT = 2401


class DegenerateSteadyStateError(RuntimeError):
    def __init__(self, null_dim: int | None, message: str = ""):
        self.null_dim = null_dim
        super().__init__(message or f"steady state is not unique (null-space dimension {null_dim})")


class SteadyStateConvergenceError(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[0])))
    if dim * dim != v.shape[0]:
        raise ShapeError(f"vector of length {v.shape[0]} is not a vectorized {dim}x{dim} matrix")
    return v.reshape(dim, dim, order="F")


def liouvillian(
    H: np.ndarray, collapse: Sequence[np.ndarray], sparse: bool = False
) -> np.ndarray | sp.csr_matrix:
    """Superoperator of ``rho -> -i[H, rho] + sum_c (c rho c^+ - {c^+ c, rho}/2)``.

    Returns a dense array, or a CSR matrix with ``sparse=True``.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError(f"Hamiltonian must be square, got {H.shape}")
    d = H.shape[0]
    for c in collapse:
        if np.shape(c) != (d, d):
            raise ShapeError(f"collapse operator of shape {np.shape(c)} does not match dim {d}")

    kron = sp.kron if sparse else np.kron
    eye = sp.identity(d, dtype=complex, format="csr") if sparse else np.eye(d, dtype=complex)
    conv = sp.csr_matrix if sparse else np.asarray

    Hm = conv(H)
    L = -1j * (kron(eye, Hm) - kron(Hm.T, eye))
    for c in collapse:
        c = np.asarray(c)
        cdc = c.conj().T @ c
        L = L + kron(conv(c.conj()), conv(c)) - 0.5 * kron(eye, conv(cdc)) - 0.5 * kron(conv(cdc.T), eye)
    if sparse:
        L = sp.csr_matrix(L)
        L.eliminate_zeros()
    return L


def apply(L, rho: np.ndarray) -> np.ndarray:
    """Act with a superoperator on a density matrix."""
    rho = np.asarray(rho)
    return unvec(L @ vec(rho), rho.shape[0])


def constraint_row(L) -> int:
    """Row replaced by the trace condition: smallest diagonal magnitude,
    lowest index on ties."""
    diag = np.abs(L.diagonal()) if sp.issparse(L) else np.abs(np.diag(L))
    return int(np.argmin(diag))


@dataclass
class SteadyState:
    rho: np.ndarray
    residual: float
    min_eigenvalue: float
    constraint_row: int
    raw: np.ndarray


def null_space_dimension(L, rtol: float = 1e-10) -> int | None:
    """Numerical nullity of ``L``; ``None`` when too large to diagnose densely."""
    n = L.shape[0]
    if n > _MAX_DENSE_DIAGNOSIS:
        return None
    dense = L.toarray() if sp.issparse(L) else np.asarray(L)
    s = scipy.linalg.svdvals(dense)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    return int(np.sum(s <= rtol * scale))


def _trace_constrained(L, row: int):
    n = L.shape[0]
    d = int(round(np.sqrt(n)))
    # weight the trace row like the rest of L so conditioning does not
    # depend on the overall rate scale; a power of two keeps it exact
    diag = np.abs(L.diagonal())
    scale = 2.0 ** np.round(np.log2(diag.max())) if diag.max() > 0 else 1.0
    trace_row = scale * vec(np.eye(d, dtype=complex))
    b = np.zeros(n, dtype=complex)
    b[row] = scale
    if sp.issparse(L):
        keep = np.ones(n)
        keep[row] = 0.0
        cols = np.arange(0, n, d + 1)
        patch = sp.csr_matrix((trace_row[cols], (np.full(d, row), cols)), shape=(n, n))
        M = sp.diags(keep) @ sp.csr_matrix(L) + patch
        return sp.csc_matrix(M), b
    M = np.array(L, dtype=complex)
    M[row, :] = trace_row
    return M, b


def _direct_solver(M):
    if sp.issparse(M):
        return spla.splu(M).solve
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        lu = scipy.linalg.lu_factor(M, check_finite=False)
    return lambda rhs: scipy.linalg.lu_solve(lu, rhs)


def _iterative_solver(M, tol: float):
    ilu = spla.spilu(sp.csc_matrix(M), drop_tol=1e-3, fill_factor=20)
    P = spla.LinearOperator(M.shape, ilu.solve, dtype=complex)

    def solve(rhs):
        x, info = spla.gmres(M, rhs, M=P, rtol=1e-14, atol=0.0, restart=200, maxiter=50)
        if info != 0:
            raise RuntimeError(f"GMRES stopped with info={info}")
        return x

    return solve


def solve_steady_state(
    L, tol: float = 1e-10, positivity_tol: float = 1e-8, method: str = "auto"
) -> SteadyState:
    """Unique steady state of a trace-preserving Liouvillian.

    Solves ``L vec(rho) = 0`` with one row swapped for ``Tr rho = 1``.
    ``method="direct"`` factorizes (SuperLU for sparse input, LAPACK for
    dense); ``"iterative"`` runs ILU-preconditioned GMRES on sparse input;
    ``"auto"`` picks direct up to dimension 2401 (six quanta per site) and
    falls back to it if the iteration stalls.
    """
    if method not in ("auto", "direct", "iterative"):
        raise ValueError(f"method must be 'auto', 'direct' or 'iterative', got {method!r}")
    n = L.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or L.shape[1] != n:
        raise ShapeError(f"superoperator shape {L.shape} is not d^2 x d^2")
    row = constraint_row(L)
    M, b = _trace_constrained(L, row)
    iterative = sp.issparse(M) and (method == "iterative" or (method == "auto" and n > _MAX_DIRECT))
    x = None
    if iterative:
        try:
            solve = _iterative_solver(M, tol)
            x = solve(b)
        except RuntimeError as exc:
            if method == "iterative":
                raise SteadyStateConvergenceError(str(exc)) from exc
            log.info("iterative steady state failed (%s); factorizing", exc)
    if x is None:
        try:
            solve = _direct_solver(M)
            x = solve(b)
        except (RuntimeError, np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            null_dim = null_space_dimension(L)
            raise DegenerateSteadyStateError(null_dim, f"constrained system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError(null_space_dimension(L))
    # one refinement sweep: GMRES stops at a relative residual and sparse LU
    # loses digits to fill-in, while g2 of a nearly dark site needs the
    # absolute error at round-off
    try:
        x = x + solve(b - M @ x)
    except RuntimeError as exc:
        log.info("refinement sweep skipped: %s", exc)

    residual = float(np.max(np.abs(L @ x)))
    if residual > tol:
        # one step of iterative refinement before giving up
        try:
            x = x + solve(b - M @ x)
        except RuntimeError:
            pass
        residual = float(np.max(np.abs(L @ x)))
    if residual > tol:
        null_dim = null_space_dimension(L)
        if null_dim is not None and null_dim > 1:
            raise DegenerateSteadyStateError(null_dim)
        raise SteadyStateConvergenceError(f"steady-state residual {residual:.3e} exceeds {tol:.1e}")

    raw = unvec(x, d)
    rho = 0.5 * (raw + raw.conj().T)
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -positivity_tol:
        raise SteadyStateConvergenceError(
            f"steady state has eigenvalue {min_eig:.3e} below -{positivity_tol:.0e}"
        )
    log.debug("steady state: residual %.2e, min eigenvalue %.2e, row %d", residual, min_eig, row)
    return SteadyState(rho=rho, residual=residual, min_eigenvalue=min_eig, constraint_row=row, raw=raw)


def steady_state(L, tol: float = 1e-10, method: str = "auto") -> np.ndarray:
    """Hermitized steady-state density matrix of ``L``."""
    return solve_steady_state(L, tol=tol, method=method).rho
