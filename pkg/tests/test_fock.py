import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qvalve.fock import (
    FockSpace, ShapeError, TruncationError, annihilation, commutator, creation, embed,
    expectation, is_hermitian, number,
)

from conftest import ladder_by_elements, random_density_matrix, two_site_ladders

cutoffs = st.integers(min_value=1, max_value=7)


@given(cutoffs)
def test_single_mode_operators_match_matrix_elements(n_max):
    a = annihilation(n_max)
    np.testing.assert_allclose(a, ladder_by_elements(n_max), atol=0)
    np.testing.assert_allclose(creation(n_max), a.conj().T, atol=0)
    np.testing.assert_allclose(number(n_max), creation(n_max) @ a, atol=1e-14)


@given(cutoffs)
def test_commutator_is_identity_except_last_level(n_max):
    a = annihilation(n_max)
    c = commutator(a, a.conj().T)
    expected = np.eye(n_max + 1)
    expected[-1, -1] = -n_max  # truncation artefact
    np.testing.assert_allclose(c, expected, atol=1e-12)


@given(cutoffs, cutoffs)
@settings(max_examples=30)
def test_embedded_ladders_match_basis_action(nl, nr):
    space = FockSpace(nl, nr)
    a_l, a_r = two_site_ladders(nl, nr)
    np.testing.assert_allclose(space.a("L"), a_l, atol=1e-14)
    np.testing.assert_allclose(space.a("R"), a_r, atol=1e-14)
    # modes on different sites commute exactly
    np.testing.assert_allclose(commutator(space.a("L"), space.a("R")), 0, atol=1e-14)
    np.testing.assert_allclose(
        commutator(space.a("L"), space.a("R").conj().T), 0, atol=1e-14
    )


def test_index_and_fock_state(space22):
    assert space22.total_dim == 9
    assert space22.index(2, 1) == 7
    rho = space22.fock_state(2, 1)
    assert expectation(space22.n("L"), rho).real == 2
    assert expectation(space22.n("R"), rho).real == 1
    assert expectation(space22.total_number(), space22.vacuum()) == 0


def test_asymmetric_space_dimensions():
    space = FockSpace(3, 1)
    assert (space.dim_left, space.dim_right, space.total_dim) == (4, 2, 8)
    assert space.enlarged(2) == FockSpace(5, 3)
    assert space.index(3, 1) == 7


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_cutoff_below_one_is_rejected(bad):
    with pytest.raises(TruncationError):
        FockSpace(bad, 2)
    with pytest.raises(TruncationError):
        annihilation(bad)


def test_out_of_range_fock_state(space22):
    with pytest.raises(TruncationError):
        space22.fock_state(3, 0)


def test_embed_shape_mismatch(space22):
    with pytest.raises(ShapeError):
        embed(annihilation(3), "L", space22)
    with pytest.raises(ValueError):
        embed(annihilation(2), "X", space22)


def test_expectation_shape_mismatch(space22):
    with pytest.raises(ShapeError):
        expectation(space22.n("L"), np.eye(4))


def test_operator_accessors_return_copies(space22):
    a = space22.a("L")
    a[:] = 0
    assert np.abs(space22.a("L")).max() > 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_expectation_is_trace_of_product(seed):
    rng = np.random.default_rng(seed)
    space = FockSpace(2, 3)
    rho = random_density_matrix(space.total_dim, rng)
    op = space.a("L") @ space.a("R").conj().T
    assert abs(expectation(op, rho) - np.trace(op @ rho)) < 1e-12
    assert is_hermitian(space.n("R"))
