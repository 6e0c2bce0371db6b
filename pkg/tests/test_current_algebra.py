from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistchar.current_algebra import (
    AElement,
    CubicInvariant,
    WeylElement,
    a2_cohomology,
    a2_differential,
    a2_monomials,
    current,
    current_bracket_report,
    diagonal_residue,
    ell3,
    gl_basis,
    lie_derivative,
    residue,
    sample_mode_pairs,
    symmetric_residue,
    weyl_commutator,
)

A = AElement
ONE = A.const(1)


# ---------------------------------------------------------------- the algebra


def test_defining_relation():
    assert A.z(1) * A.w(1) + A.z(2) * A.w(2) == ONE


def test_normal_form_has_no_z1w1():
    x = A.monomial(2, 1, 3, 0) * A.monomial(0, 0, 0, 2)
    assert all(not (m[0] and m[2]) for m in x.even)


def test_omega_squares_to_zero():
    assert (A.omega() * A.omega()).is_zero()


def test_dbar_of_generators():
    assert a2_differential(A.w(1)) == A.monomial(0, 1, omega=True)
    assert a2_differential(A.w(2)) == A.monomial(1, 0, omega=True, coeff=-1)
    assert a2_differential(A.z(1)).is_zero()
    assert a2_differential(A.z(1) * A.w(1) + A.z(2) * A.w(2)).is_zero()


small = st.builds(lambda a, b, c, d: A.monomial(a, b, c, d),
                  st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


@given(small, small)
def test_dbar_leibniz(x, y):
    assert a2_differential(x * y) == a2_differential(x) * y + x * a2_differential(y)


@given(small, st.sampled_from([1, 2]), st.booleans())
def test_lie_derivative_commutes_with_dbar(x, i, odd):
    if odd:
        x = x * A.omega()
    assert lie_derivative(a2_differential(x), i) == a2_differential(lie_derivative(x, i))


@given(small, small, st.sampled_from([1, 2]))
def test_lie_derivative_leibniz(x, y, i):
    assert lie_derivative(x * y, i) == lie_derivative(x, i) * y + x * lie_derivative(y, i)


def test_lie_derivative_of_relation_vanishes():
    for i in (1, 2):
        assert lie_derivative(A.z(1) * A.w(1) + A.z(2) * A.w(2), i).is_zero()


def test_lie_derivative_bad_index():
    with pytest.raises(ValueError):
        lie_derivative(ONE, 3)


# ---------------------------------------------------------------- residue


def test_residue_values():
    assert residue(A.omega()) == 1
    assert residue(A.monomial(1, 0, 1, 0, omega=True)) == Fraction(1, 2)
    assert residue(A.monomial(1, 0, 0, 0, omega=True)) == 0
    for b in range(5):
        assert diagonal_residue(b) == Fraction(1, b + 1)


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (2, 1), (3, 3), (1, 4)])
def test_symmetric_residue(a, b):
    x = A.monomial(a, b, a, b, omega=True)
    assert residue(x) == symmetric_residue(a, b)


def test_residue_rejects_degree_zero():
    with pytest.raises(ValueError):
        residue(ONE)


@pytest.mark.parametrize("x", a2_monomials(4, omega=False), ids=repr)
def test_residue_kills_dbar_exact(x):
    assert residue(a2_differential(x)) == 0


@pytest.mark.parametrize("x", a2_monomials(3, omega=True), ids=repr)
def test_residue_kills_holomorphic_derivatives(x):
    assert residue(lie_derivative(x, 1)) == 0
    assert residue(lie_derivative(x, 2)) == 0


def test_cohomology_pattern():
    table = a2_cohomology(2)
    for (p1, p2), (h0, h1) in table.items():
        assert h0 == (1 if p1 >= 0 and p2 >= 0 else 0)
        assert h1 == (1 if p1 <= -1 and p2 <= -1 else 0)


# ---------------------------------------------------------------- ternary bracket


def test_trace_form_symmetric():
    b = gl_basis(2)
    theta = CubicInvariant.trace_form()
    values = theta.on_basis(b)
    for (x, y, z), v in values.items():
        assert values[(y, x, z)] == v == values[(x, z, y)]


def test_ell3_examples():
    theta = CubicInvariant.trace_form()
    one = [[1]]
    assert ell3(A.omega(), A.z(1), A.z(2), one, one, one, theta) == 1
    assert ell3(A.omega(), A.z(2), A.z(1), one, one, one, theta) == -1
    assert ell3(A.omega(), A.z(1), A.z(2), one, one, one, CubicInvariant.zero()) == 0
    assert ell3(A.z(1), A.z(1), A.z(2), one, one, one, theta) == 0


# ---------------------------------------------------------------- Weyl algebra


def test_basic_commutators():
    b, g = WeylElement.generator("beta", (1, 0)), WeylElement.generator("gamma", (1, 0))
    g2 = WeylElement.generator("gamma", (0, 1))
    assert weyl_commutator(b, g) == WeylElement.scalar(1, 1)
    assert weyl_commutator(b, g2).is_zero()
    assert weyl_commutator(g, g2).is_zero()


def test_current_rejects_negative_mode():
    with pytest.raises(ValueError):
        current([[1]], (-1, 0))


@pytest.mark.parametrize("m,n", sample_mode_pairs(1))
def test_bracket_matches_single_contraction(m, n):
    b = gl_basis(2)
    for x, y in (("E", "F"), ("H", "E"), ("I", "H")):
        report = current_bracket_report(b[x], b[y], m, n)
        assert report["central"] == 0
        assert report["linear"] == report["predicted_linear"]


def test_ground_modes_close():
    b = gl_basis(2)
    for x, y in (("E", "F"), ("H", "E"), ("H", "F")):
        report = current_bracket_report(b[x], b[y], (0, 0), (0, 0))
        assert report["closes"] and report["closing_mode"] == (0, 0)


def test_abelian_currents_do_not_commute_off_diagonal():
    # J_1(m) and J_1(n) with m != n share contractions with opposite mode splits
    report = current_bracket_report([[1]], [[1]], (0, 0), (1, 0))
    assert not report["closes"]
    assert report["linear"] == {((0, 0), (1, 0)): [[-1]], ((1, 0), (0, 0)): [[1]]}
