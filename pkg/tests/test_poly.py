import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bidisc import (
    AntiDerivativeError,
    DominationError,
    EulerOp,
    GridPoint,
    SparsePoly,
    antiderivative_view,
    coeff_l1,
    euler_apply,
    eval_at_grid_point,
    linear_combine,
    reflect_shift,
    value_at_one,
)


def P(terms):
    return SparsePoly(terms)


# -- construction / invariants --------------------------------------------------

def test_zero_coefficients_are_pruned():
    p = P({(1, 0): 0.0, (2, 3): 1.0})
    assert p.term_count == 1
    assert (2, 3) in p


def test_analytic_flag_rejects_negative_exponents():
    with pytest.raises(ValueError):
        SparsePoly({(-1, 0): 1.0})
    q = SparsePoly({(-1, 0): 1.0}, analytic=False)
    assert q.term_count == 1


def test_canonical_order_is_lexicographic():
    p = P({(2, 1): 1.0, (1, 5): 2.0, (1, 2): 3.0})
    assert [e for e, _ in p.iter_terms()] == [(1, 2), (1, 5), (2, 1)]


# -- linear_combine --------------------------------------------------------------

def test_linear_combine_cancellation():
    assert linear_combine(1, P({(1, 0): 1}), 1, P({(1, 0): -1})) == SparsePoly.zero()


def test_linear_combine_scaling():
    assert linear_combine(2, P({(0, 0): 1}), 0, SparsePoly.zero()) == P({(0, 0): 2})


def test_linear_combine_disjoint_supports():
    out = linear_combine(1, P({(1, 0): 1}), 1, P({(4, 1): 1}))
    assert out == P({(1, 0): 1, (4, 1): 1})


# -- reflect_shift ----------------------------------------------------------------

def test_reflect_shift_basic():
    out = reflect_shift(P({(0, 0): 1, (1, 0): 1}), (3, 2))
    assert out == P({(3, 2): 1, (2, 2): 1})


def test_reflect_shift_self():
    out = reflect_shift(P({(2, 1): 1j}), (2, 1))
    assert out == P({(0, 0): 1j})


def test_reflect_shift_domination_error():
    with pytest.raises(DominationError):
        reflect_shift(P({(2, 1): 1}), (1, 0))


@given(
    st.dictionaries(
        st.tuples(st.integers(0, 50), st.integers(0, 50)),
        st.complex_numbers(min_magnitude=1e-3, max_magnitude=10, allow_nan=False,
                           allow_infinity=False),
        min_size=1, max_size=8,
    )
)
def test_reflect_shift_is_an_involution(terms):
    p = SparsePoly(terms)
    s = (max(e[0] for e in terms) + 3, max(e[1] for e in terms) + 7)
    assert reflect_shift(reflect_shift(p, s), s) == p


# -- Euler operators -----------------------------------------------------------------

def test_euler_apply_examples():
    assert euler_apply(P({(3, 2): 1}), EulerOp.D1SQ) == P({(3, 2): 9})
    assert euler_apply(P({(3, 2): 1}), EulerOp.D1D2) == P({(3, 2): 6})
    assert euler_apply(P({(0, 5): 2}), EulerOp.D1SQ) == SparsePoly.zero()
    assert euler_apply(P({(3, 2): 9}), EulerOp.ANTI_D1SQ) == P({(3, 2): 1})


def test_euler_anti_error_on_zero_exponent():
    with pytest.raises(AntiDerivativeError):
        euler_apply(P({(0, 5): 2}), EulerOp.ANTI_D1SQ)


@given(
    st.dictionaries(
        st.tuples(st.integers(0, 30), st.integers(0, 30)),
        st.floats(min_value=0.1, max_value=5), min_size=1, max_size=6,
    )
)
def test_euler_composition_d1_then_d2_is_d1d2(terms):
    p = SparsePoly(terms)
    left = euler_apply(euler_apply(p, EulerOp.D1), EulerOp.D2)
    right = euler_apply(p, EulerOp.D1D2)
    assert left.exponents() == right.exponents()
    for e, c in left.iter_terms():  # same value up to one rounding of the factor
        assert c == pytest.approx(right[e], rel=1e-15)


@given(
    st.dictionaries(
        st.tuples(st.integers(1, 30), st.integers(0, 30)),
        st.floats(min_value=0.1, max_value=5), min_size=1, max_size=6,
    )
)
def test_euler_anti_inverts_d1sq(terms):
    p = SparsePoly(terms)
    roundtrip = euler_apply(euler_apply(p, EulerOp.ANTI_D1SQ), EulerOp.D1SQ)
    assert roundtrip.exponents() == p.exponents()
    for e, c in roundtrip.iter_terms():
        assert c == pytest.approx(p[e], rel=1e-12)


def test_antiderivative_view_weights():
    src = P({(4, 1): 1.0})
    assert dict(antiderivative_view(src, EulerOp.D1D2).iter_terms()) == {(4, 1): 0.25}
    assert dict(antiderivative_view(src, EulerOp.D2SQ).iter_terms()) == {(4, 1): 1 / 16}
    assert antiderivative_view(src, EulerOp.D1SQ) is src
    with pytest.raises(AntiDerivativeError):
        list(antiderivative_view(P({(0, 1): 1.0}), EulerOp.D1D2).iter_terms())


def test_view_weights_survive_huge_exponents():
    m1 = 3 ** 600  # far beyond float range when squared
    src = P({(m1, m1 // 2): 1.0})
    (e, c), = antiderivative_view(src, EulerOp.D1D2).iter_terms()
    assert c == pytest.approx(0.5, rel=1e-15)


# -- evaluation ------------------------------------------------------------------------

def test_eval_huge_exponent_reduces_exactly():
    # modular-exponentiation oracle: 3**100 mod 8
    assert pow(3, 100, 8) == 1
    p = P({(3 ** 100, 0): 1.0})
    got = eval_at_grid_point(p, GridPoint(8, 1, 0))
    assert got == pytest.approx(cmath.exp(2j * math.pi / 8), abs=1e-15)


def test_eval_one_plus_z1_vanishes_at_minus_one():
    p = P({(0, 0): 1.0, (1, 0): 1.0})
    assert eval_at_grid_point(p, GridPoint(2, 1, 0)) == pytest.approx(0, abs=1e-15)


def test_eval_constant():
    c = 2.5 - 1.5j
    assert eval_at_grid_point(P({(0, 0): c}), GridPoint(64, 17, 3)) == c


def test_eval_is_insertion_order_independent():
    terms = [((k, 2 * k + 1), complex(math.sin(k + 1), math.cos(k))) for k in range(20)]
    a = SparsePoly(terms)
    b = SparsePoly(list(reversed(terms)))
    g = GridPoint(16, 5, 11)
    assert eval_at_grid_point(a, g) == eval_at_grid_point(b, g)


def test_eval_handles_4096_bit_exponents():
    m = (1 << 4096) + 12345
    p = P({(m, 0): 1.0})
    got = eval_at_grid_point(p, GridPoint(512, 1, 0))
    assert got == pytest.approx(cmath.exp(2j * math.pi * (m % 512) / 512), abs=1e-12)


@given(
    st.dictionaries(
        st.tuples(st.integers(0, 1000), st.integers(0, 1000)),
        st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
        max_size=10,
    ),
    st.integers(0, 63), st.integers(0, 63),
)
@settings(max_examples=50)
def test_eval_bounded_by_l1(terms, j1, j2):
    p = SparsePoly(terms)
    v = eval_at_grid_point(p, GridPoint(64, j1, j2))
    assert abs(v) <= coeff_l1(p) + 1e-9


# -- l1 sums ------------------------------------------------------------------------------

def test_coeff_l1_examples():
    assert coeff_l1(P({(1, 0): 3, (2, 1): -4j})) == pytest.approx(7.0)
    assert coeff_l1(SparsePoly.zero()) == 0.0


def test_coeff_l1_with_operator():
    p = P({(3, 2): 1.0, (0, 4): 1.0})
    assert coeff_l1(p, EulerOp.D1SQ) == pytest.approx(9.0)   # (0,4) contributes 0
    assert coeff_l1(p, EulerOp.D2) == pytest.approx(6.0)


def test_value_at_one_is_coefficient_sum():
    p = P({(5, 1): 1.5, (2, 9): -0.25j})
    assert value_at_one(p) == pytest.approx(1.5 - 0.25j)


# -- grid points ----------------------------------------------------------------------------

def test_grid_point_validation():
    with pytest.raises(ValueError):
        GridPoint(8, 8, 0)
    with pytest.raises(ValueError):
        GridPoint(0, 0, 0)


def test_grid_point_conj():
    assert GridPoint(8, 3, 0).conj() == GridPoint(8, 5, 0)
    assert GridPoint(8, 0, 0).conj() == GridPoint(8, 0, 0)
