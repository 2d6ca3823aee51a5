import functools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ospyangian.gauss import (PivotFailure, ScalarField, build_currents, gauss_decompose, mat_inverse,
                              psi_embed, quasidet, quasidet_formulas)
from ospyangian.ncseries import Engine, TruncSeries, generator_matrix, series_invert, series_shift
from ospyangian.superspace import make_space

F = ScalarField()


@functools.lru_cache(maxsize=None)
def universal(N, m, K=3):
    e = Engine(make_space(N, m))
    T = generator_matrix(e, K)
    return e, T, build_currents(gauss_decompose(make_space(N, m), T, K))


def test_quasidet_small_examples():
    assert quasidet(F, [[Fraction(5)]], 1, 1) == 5
    A = [[Fraction(x) for x in r] for r in [[1, 2], [3, 4]]]
    assert quasidet(F, A, 2, 2) == -2
    assert quasidet(F, A, 1, 1) == oracles.quasidet_by_dets(A, 1, 1)


def test_singular_minor_raises():
    A = [[Fraction(x) for x in r] for r in [[0, 2], [3, 4]]]
    with pytest.raises(PivotFailure):
        quasidet(F, A, 2, 2)


def _random_invertible(rng, n):
    while True:
        A = [[Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)] for _ in range(n)]
        if oracles.det(A) and all(oracles.det(oracles.minor(A, range(k), range(k))) for k in range(1, n + 1)):
            return A


def _sub_quasidet(A, rows, cols, i, j):
    rows, cols = sorted(rows), sorted(cols)
    return quasidet(F, [[A[r][c] for c in cols] for r in rows], rows.index(i) + 1, cols.index(j) + 1)


def _inverse_by_dets(A):
    n = len(A)
    d = oracles.det(A)
    return [[(-1) ** (i + j) * oracles.det(oracles.minor(A, [r for r in range(n) if r != j],
                                                         [c for c in range(n) if c != i])) / d
             for j in range(n)] for i in range(n)]


def _jacobi_instance(rng):
    A = _random_invertible(rng, 4)
    B = _inverse_by_dets(A)
    idx = list(range(4))
    i, j = rng.choice(idx), rng.choice(idx)
    L = [rng.choice([x for x in idx if x != i])]
    M = [rng.choice([x for x in idx if x != j])]
    U = [x for x in idx if x != i and x not in L]
    V = [x for x in idx if x != j and x not in M]
    return A, B, i, j, L, M, U, V


def test_jacobi_ratio_identity():
    rng = random.Random(7)
    checked = 0
    while checked < 8:
        A, B, i, j, L, M, U, V = _jacobi_instance(rng)
        assert mat_inverse(F, A) == B
        try:
            lhs = 1 / _sub_quasidet(A, U + [i], V + [j], i, j)
            rhs = _sub_quasidet(B, M + [j], L + [i], j, i)
        except PivotFailure:
            continue
        assert lhs == rhs
        rows, cols = sorted(U + [i]), sorted(V + [j])
        assert 1 / lhs == oracles.quasidet_by_dets(oracles.minor(A, rows, cols), rows.index(i) + 1, cols.index(j) + 1)
        checked += 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_quasidet_matches_determinant_ratio(seed):
    rng = random.Random(seed)
    A = _random_invertible(rng, 3)
    for i in range(1, 4):
        for j in range(1, 4):
            rows = [r for r in range(3) if r != i - 1]
            cols = [c for c in range(3) if c != j - 1]
            Aij = oracles.minor(A, rows, cols)
            if oracles.det(Aij) == 0:
                continue
            if Aij[0][0] == 0:
                # diagonal pivoting only: an invertible minor with a zero leading entry is refused
                with pytest.raises(PivotFailure):
                    quasidet(F, A, i, j)
                continue
            assert quasidet(F, A, i, j) == oracles.quasidet_by_dets(A, i, j)


def test_identity_matrix_decomposes_trivially():
    sp = make_space(3, 1)
    n, K = sp.size, 3
    T = [[TruncSeries.constant(F, K, int(i == j)) for j in range(n)] for i in range(n)]
    g = gauss_decompose(sp, T, K)
    one, zero = TruncSeries.constant(F, K, 1), TruncSeries.constant(F, K, 0)
    assert all(h == one for h in g.h)
    assert all(x == zero for x in g.e.values()) and all(x == zero for x in g.f.values())


@pytest.mark.parametrize("N,m", [(3, 1), (4, 1), (3, 2)])
def test_reconstruction_and_quasideterminant_route(N, m):
    e, T, g = universal(N, m)
    FHE = g.reconstruct()
    assert all(FHE[i][j] == T[i][j] for i in range(len(T)) for j in range(len(T)))
    q = quasidet_formulas(make_space(N, m), T, 3)
    assert all(a == b for a, b in zip(q.h, g.h))
    assert all(q.e[k] == g.e[k] for k in g.e) and all(q.f[k] == g.f[k] for k in g.f)


def test_first_diagonal_entry_is_t11():
    e, T, g = universal(3, 1)
    assert g.h[0] == T[0][0]


def test_drinfeld_shift_small_case():
    e, T, g = universal(3, 1)
    assert g.kappa_cur[1] == g.k[1]
    assert g.xi_minus[1] == g.ecur[1].scaled(-1)
    assert g.xi_plus[1] == g.fcur[1]


def test_type_d_last_current_shift():
    e, T, g = universal(6, 1)
    h = g.h
    assert g.k[4] == series_invert(h[2]) * h[4]
    assert g.kappa_cur[4] == series_shift(g.k[4], -1)
    assert g.ecur[4] == g.e[(3, 5)]


def test_embedding_levels():
    sp = make_space(3, 2)
    e, T, g = universal(3, 2)
    psi0 = psi_embed(sp, 0, T, 3)
    assert all(psi0[(i, j)] == T[i - 1][j - 1] for (i, j) in psi0)
    psi1 = psi_embed(sp, 1, T, 3)
    h1inv = series_invert(T[0][0])
    for (i, j), x in psi1.items():
        assert x == T[i - 1][j - 1] - T[i - 1][0] * h1inv * T[0][j - 1]
    with pytest.raises(ValueError):
        psi_embed(sp, 4, T, 3)
