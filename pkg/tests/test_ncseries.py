import functools
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ospyangian.gauss import ScalarField
from ospyangian.ncseries import (BivarSeries, Engine, Mutation, PivotError, TruncSeries, divided_difference,
                                 generator_matrix, series_invert, series_shift)
from ospyangian.superspace import make_space


@functools.lru_cache(maxsize=None)
def engine(N, m):
    return Engine(make_space(N, m))


def lin(e, terms, r=1):
    acc = e.zero()
    for (a, b), c in terms.items():
        acc = e.add(acc, e.scale(e.gen(a, b, r), c))
    return acc


F = ScalarField()


def scalar_series(cs):
    return TruncSeries(F, [Fraction(c) for c in cs])


# -- commutators -------------------------------------------------------------------


def test_t11_commutes_with_itself():
    e = engine(3, 1)
    for r, s in itertools.product(range(1, 4), repeat=2):
        assert e.is_zero(e.commutator((1, 1, r), (1, 1, s)))


def test_bracket_with_unit_vanishes():
    e = engine(3, 1)
    assert e.is_zero(e.bracket(e.one(), e.gen(1, 2, 2)))
    assert e.is_zero(e.bracket(e.gen(2, 3, 1), e.from_scalar(5)))


def test_t12_t21_level_one():
    e = engine(3, 1)
    got = e.commutator((1, 2, 1), (2, 1, 1))
    assert got == e.sub(e.gen(1, 1, 1), e.gen(2, 2, 1))


@pytest.mark.parametrize("N,m", [(3, 1), (4, 1), (3, 2)])
def test_all_level_one_brackets_match_hand_expansion(N, m):
    e = engine(N, m)
    n = N + 2 * m
    for i, j, k, l in itertools.product(range(1, n + 1), repeat=4):
        ref = lin(e, oracles.level_one_bracket(N, m, i, j, k, l))
        assert e.is_zero(e.sub(e.bracket(e.gen(i, j, 1), e.gen(k, l, 1)), ref)), (i, j, k, l)


def test_odd_squares():
    e = engine(3, 1)
    assert e.is_zero(e.normal_form([(1, 2, 1), (1, 2, 1)]))
    # [t31, t31] = t51 at level one, so the square is half of it
    assert e.normal_form([(3, 1, 1), (3, 1, 1)]) == e.scale(e.gen(5, 1, 1), Fraction(1, 2))


def test_ordered_word_is_fixed_and_swap_adds_commutator():
    e = engine(3, 1)
    xy = e.normal_form([(2, 2, 1), (2, 3, 1)])
    assert xy == {(e.code(2, 2, 1), e.code(2, 3, 1)): 1}
    yx = e.normal_form([(2, 3, 1), (2, 2, 1)])
    assert e.sub(yx, xy) == lin(e, {(2, 3): -1})


def test_eliminated_generator_uses_center():
    e = engine(3, 1)
    # t_{1'1'}^(1) = c_1 - t_11^(1)
    assert e.gen(5, 5, 1) == e.sub(e.c(1), e.gen(1, 1, 1))


def test_central_letter_value_is_consistent():
    e = engine(3, 1)
    assert e.raw_c_value(1) == e.c(1)
    assert e.raw_c_value(2) == e.c(2)


def test_tau_examples():
    e = engine(3, 1)
    assert e.apply_tau(e.gen(1, 1, 1)) == e.gen(1, 1, 1)
    assert e.apply_tau(e.gen(1, 2, 1)) == e.gen(2, 1, 1)
    assert e.apply_tau(e.c(2)) == e.c(2)


def test_mu_examples():
    e = engine(3, 1)
    g = e.gen(1, 1, 2)
    assert e.apply_mu(g, [1]) == g
    assert e.apply_mu(e.gen(1, 1, 1), [1, 1]) == e.add(e.gen(1, 1, 1), e.one())
    assert e.apply_mu(e.gen(1, 2, 1), [1, 1]) == e.gen(1, 2, 1)
    with pytest.raises(ValueError):
        e.apply_mu(g, [2, 1])


def test_theta_flip_breaks_level_one_bracket():
    bad = Engine(make_space(3, 1), Mutation(theta_flip=1))
    mism = 0
    for i, j, k, l in itertools.product(range(1, 6), repeat=4):
        ref = lin(bad, oracles.level_one_bracket(3, 1, i, j, k, l))
        mism += not bad.is_zero(bad.sub(bad.bracket(bad.gen(i, j, 1), bad.gen(k, l, 1)), ref))
    assert mism > 0


def test_table_dump_format():
    e = Engine(make_space(3, 1))
    e.populate_table(2, both_orders=True)
    lines = e.table_lines()
    assert "[t[1,1](1), t[1,1](2)] = 0" in lines
    assert e.stats()["table_size"] == len(lines)
    again = Engine(make_space(3, 1))
    again.populate_table(2, both_orders=True)
    assert again.table_lines() == lines


# -- properties of the engine --------------------------------------------------------

GEN31 = st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 2))


def _par(e, g):
    return e.poly_parity(e.gen(*g)) or 0


@settings(max_examples=60, deadline=None)
@given(GEN31, GEN31)
def test_super_antisymmetry(x, y):
    e = engine(3, 1)
    a, b = e.commutator(x, y), e.commutator(y, x)
    sign = -1 if _par(e, x) * _par(e, y) else 1
    assert e.is_zero(e.add(a, e.scale(b, sign)))


@settings(max_examples=40, deadline=None)
@given(GEN31, GEN31, GEN31)
def test_associativity(x, y, z):
    e = engine(3, 1)
    X, Y, Z = (e.gen(*g) for g in (x, y, z))
    assert e.mul(e.mul(X, Y), Z) == e.mul(X, e.mul(Y, Z))


@settings(max_examples=40, deadline=None)
@given(GEN31, GEN31)
def test_tau_reverses_products(x, y):
    e = engine(3, 1)
    X, Y = e.gen(*x), e.gen(*y)
    sign = -1 if _par(e, x) * _par(e, y) else 1
    lhs = e.apply_tau(e.mul(X, Y))
    rhs = e.scale(e.mul(e.apply_tau(Y), e.apply_tau(X)), sign)
    assert e.is_zero(e.sub(lhs, rhs))


def test_h1_times_inverse_is_one():
    e = engine(3, 1)
    h1 = generator_matrix(e, 3)[0][0]
    prod = h1 * series_invert(h1)
    assert prod == TruncSeries.constant(e, 3, 1)


# -- truncated series ---------------------------------------------------------------


def test_invert_examples():
    assert series_invert(scalar_series([1, 0, 0])) == scalar_series([1, 0, 0])
    a = Fraction(2, 3)
    assert series_invert(scalar_series([1, a, 0, 0])) == scalar_series([1, -a, a ** 2, -a ** 3])
    with pytest.raises(PivotError):
        series_invert(scalar_series([2, 1]))


def test_shift_examples():
    s = scalar_series([1, 5, 0, 0])
    assert series_shift(s, 0) == s
    a = Fraction(3, 2)
    assert series_shift(s, a) == scalar_series([1, 5, -5 * a, 5 * a ** 2])


rats = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=60, deadline=None)
@given(st.lists(rats, min_size=4, max_size=4), rats, rats)
def test_shift_composes(cs, a, b):
    s = scalar_series([1] + cs)
    assert series_shift(series_shift(s, a), b) == series_shift(s, a + b)
    assert series_shift(s, a).coeffs == oracles.shifted_coeffs(s.coeffs, a, 4)


@settings(max_examples=60, deadline=None)
@given(st.lists(rats, min_size=4, max_size=4))
def test_inverse_property(cs):
    s = scalar_series([1] + cs)
    assert s * series_invert(s) == scalar_series([1, 0, 0, 0, 0])


def test_divided_difference_examples():
    assert divided_difference(scalar_series([7, 0, 0])).is_zero()
    dd = divided_difference(scalar_series([0, 1, 0]))
    assert dd.c == {(1, 1): -1}
    dd = divided_difference(scalar_series([0, 0, 1]))
    assert dd.c == {(1, 2): -1, (2, 1): -1}


@settings(max_examples=40, deadline=None)
@given(st.lists(rats, min_size=3, max_size=3))
def test_divided_difference_clears(cs):
    # (u - v) * D(u, v) = s(u) - s(v), compared coefficientwise
    s = scalar_series([0] + cs)
    K = 3
    dd = divided_difference(s)
    lhs = {}
    for (a, b), x in dd.c.items():
        lhs[(a - 1, b)] = lhs.get((a - 1, b), 0) + x
        lhs[(a, b - 1)] = lhs.get((a, b - 1), 0) - x
    rhs = {}
    for r in range(1, K + 1):
        rhs[(r, 0)] = rhs.get((r, 0), 0) + s[r]
        rhs[(0, r)] = rhs.get((0, r), 0) - s[r]
    keys = [k for k in set(lhs) | set(rhs) if k[0] + k[1] <= K]
    assert all(lhs.get(k, 0) == rhs.get(k, 0) for k in keys)


def test_bivar_product_and_shift():
    u = BivarSeries.from_u(scalar_series([1, 2, 0]))
    v = BivarSeries.from_v(scalar_series([1, 0, 3]))
    p = u * v
    assert p[(1, 2)] == 6 and p[(0, 0)] == 1
    assert u.shift_u(1)[(2, 0)] == -2
