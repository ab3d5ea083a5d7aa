import numpy as np
import pytest

from qvalve.fock import FockSpace

# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def ladder_by_elements(n_max: int) -> np.ndarray:
    """a|n> = sqrt(n)|n-1>, filled one element at a time."""
    a = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        a[n - 1, n] = np.sqrt(n)
    return a


def two_site_ladders(nl: int, nr: int) -> tuple[np.ndarray, np.ndarray]:
    """Embedded ladder operators built from basis-state action, not kron."""
    dl, dr = nl + 1, nr + 1
    a_l = np.zeros((dl * dr, dl * dr), dtype=complex)
    a_r = np.zeros_like(a_l)
    for i in range(dl):
        for k in range(dr):
            col = i * dr + k
            if i > 0:
                a_l[(i - 1) * dr + k, col] = np.sqrt(i)
            if k > 0:
                a_r[i * dr + k - 1, col] = np.sqrt(k)
    return a_l, a_r


def lindblad_rhs(H, c_ops, rho):
    """Master-equation right-hand side written out term by term."""
    out = -1j * (H @ rho - rho @ H)
    for c in c_ops:
        cd = c.conj().T
        out += c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def space22():
    return FockSpace(2, 2)
