from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from twistchar.characters import potential_character
from twistchar.koszul import (
    SparseMatrixQ,
    Superpotential,
    apply_differential,
    chain_add,
    chain_mul,
    chain_parity,
    cohomology_table,
    derivative_to_taylor,
    exact_rank,
    extended_observable,
    interaction_differential,
    sector_basis,
    sector_cohomology,
    taylor_to_derivative,
)
from twistchar.operators import OperatorMonomial, beta, gamma
from twistchar.series import FugacitySpec

CUBIC = Superpotential.parse("x^3/3")
CUBIC2 = Superpotential.parse("x1^3/3 + x1*x2^2")


def single(m):
    return {m: 1}


# ---------------------------------------------------------------- parsing


def test_parse_cubic():
    assert CUBIC.terms == {(3,): Fraction(1, 3)}
    assert CUBIC.degree == 3 and CUBIC.n_vars == 1
    assert CUBIC.partial(1) == {(2,): 1}


def test_parse_indexed():
    w = Superpotential.parse("x1*x2")
    assert w.n_vars == 2 and w.degree == 2
    assert w.partial(2) == {(1, 0): 1}


def test_parse_weighted():
    w = Superpotential.parse("x1^2 + x2^3", weights=[3, 2])
    assert w.degree == 6


@pytest.mark.parametrize("text", ["x", "y^3", "0", "x1^3 + x2^2", "x^3 +"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        Superpotential.parse(text)


# ---------------------------------------------------------------- observables


def test_extended_observable_square():
    obs = extended_observable({(2,): 1}, 1, 0)
    t00, t10 = gamma(0, 0), gamma(1, 0)
    assert obs == {OperatorMonomial([(t10, 1), (t00, 1)]): 2}


def test_extended_observable_ground_mode():
    obs = extended_observable({(2,): 1}, 0, 0)
    assert obs == {OperatorMonomial([(gamma(0, 0), 2)]): 1}


def test_taylor_round_trip():
    chain = {OperatorMonomial([(gamma(2, 1), 1), (gamma(0, 3), 2)]): Fraction(5, 3)}
    assert derivative_to_taylor(taylor_to_derivative(chain)) == chain
    assert taylor_to_derivative(chain)[next(iter(chain))] == Fraction(5, 3) / (2 * 36)


# ---------------------------------------------------------------- differential


def test_cubic_kills_gammas_and_maps_beta():
    assert interaction_differential(CUBIC, OperatorMonomial([(gamma(1, 1), 1)])) == {}
    image = interaction_differential(CUBIC, OperatorMonomial([(beta(0, 0), 1)]))
    assert image == {OperatorMonomial([(gamma(0, 0), 2)]): 1}


def test_cubic_first_cohomology_hand_check():
    # d(b00 t10) = t10 t00^2 and d(b10 t00) = 2 t10 t00^2 share one image
    res = sector_cohomology(CUBIC, (1, 0, 3))
    assert res[1][1] == 1


def test_quadratic_has_only_the_vacuum():
    w = Superpotential.parse("x^2/2")
    table = cohomology_table(w, max_weight=3, z_max=5)
    nonzero = {k: v for k, v in table.cohomology.items() if v}
    assert nonzero == {(0, 0, 0, 0): 1}


sector_st = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 6))


@given(sector_st, st.data())
def test_differential_squares_to_zero(sector, data):
    for w in (CUBIC, CUBIC2):
        for k in (1, 2):
            basis = sector_basis(w, sector, k)
            if not basis:
                continue
            coeffs = data.draw(st.lists(st.integers(-3, 3), min_size=len(basis), max_size=len(basis)))
            chain = {m: c for m, c in zip(basis, coeffs) if c}
            assert apply_differential(w, apply_differential(w, chain)) == {}


monos = st.builds(
    lambda g, b: OperatorMonomial.from_product(g + b)[1],
    st.lists(st.builds(gamma, st.integers(0, 1), st.integers(0, 1), st.integers(1, 2)), max_size=2),
    st.lists(st.builds(beta, st.integers(0, 1), st.integers(0, 1), st.integers(1, 2)), max_size=2, unique=True),
)


@given(monos, monos)
def test_leibniz(x, y):
    a, b = single(x), single(y)
    lhs = apply_differential(CUBIC2, chain_mul(a, b))
    rhs = chain_add(chain_mul(apply_differential(CUBIC2, a), b),
                    chain_mul(a, apply_differential(CUBIC2, b)), (-1) ** chain_parity(a))
    assert lhs == rhs


def test_mixed_parity_chain_rejected():
    with pytest.raises(ValueError):
        chain_parity({OperatorMonomial([(beta(0, 0), 1)]): 1, OperatorMonomial(): 1})


# ---------------------------------------------------------------- linear algebra


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5))
def test_exact_rank_matches_sympy(rows):
    assert exact_rank(SparseMatrixQ.from_dense(rows)) == sympy.Matrix(rows).rank()


def test_exact_rank_fractions():
    m = SparseMatrixQ.from_dense([[Fraction(1, 2), Fraction(1, 3)], [3, 2]])
    assert exact_rank(m) == 1


def test_sparse_bounds():
    with pytest.raises(IndexError):
        SparseMatrixQ(1, 1, {(1, 0): 1})


# ---------------------------------------------------------------- tables


def test_euler_equals_chain_euler():
    table = cohomology_table(CUBIC, max_weight=2, z_max=6)
    for s in table.sectors():
        assert table.euler(s) == table.chain_euler(s)


def test_threads_do_not_change_table():
    a = cohomology_table(CUBIC, max_weight=2, z_max=5)
    b = cohomology_table(CUBIC, max_weight=2, z_max=5, threads=2)
    assert a.rows() == b.rows()


def test_parity_collapse_and_charges():
    table = cohomology_table(CUBIC, max_weight=1, z_max=3)
    assert table.parity_collapse()[(1, 0, 3)][1] == 1
    assert table.actual_charges((1, 0, 3, 1)) == (2, 1, 0)


def test_euler_series_matches_potential_character():
    spec = FugacitySpec.build({"p": (-2, 2), "q": (0, 2), "z": (0, 6)}, mode_vars=("q",), mode_bound=2)
    table = cohomology_table(CUBIC, max_weight=2, z_max=6)
    assert table.euler_series(spec) == potential_character(2, spec)


def test_negative_bounds():
    with pytest.raises(ValueError):
        cohomology_table(CUBIC, max_weight=-1)
