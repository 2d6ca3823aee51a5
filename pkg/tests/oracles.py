"""Independent reference computations used to freeze expected values.

Nothing here imports the package.  Operators are built from their action on
basis vectors, not from elementary-tensor expansions.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def conventions(N, m):
    size = N + 2 * m
    par = {i: int(i <= m or i > N + m) for i in range(1, size + 1)}
    theta = {i: (1 if i <= N + m else -1) for i in range(1, size + 1)}
    prime = {i: size + 1 - i for i in range(1, size + 1)}
    kappa = Fraction(N, 2) - m - 1
    return size, par, theta, prime, kappa


# -- dense-by-action operators on tensor powers --------------------------------
# an operator is {input basis tuple: {output basis tuple: coeff}}


def _compose(A, B):
    """A after B."""
    out = {}
    for x, ys in B.items():
        acc = {}
        for y, c in ys.items():
            for z, d in A.get(y, {}).items():
                acc[z] = acc.get(z, 0) + c * d
        out[x] = {z: c for z, c in acc.items() if c}
    return out


def _lin(*pairs):
    out = {}
    for coeff, op in pairs:
        for x, ys in op.items():
            row = out.setdefault(x, {})
            for y, c in ys.items():
                row[y] = row.get(y, 0) + coeff * c
    return {x: {y: c for y, c in r.items() if c} for x, r in out.items()}


def flip(N, m, k, a):
    """Graded swap of tensor slots a, a+1 on the k-fold power."""
    size, par, *_ = conventions(N, m)
    op = {}
    for v in product(range(1, size + 1), repeat=k):
        w = list(v)
        w[a], w[a + 1] = v[a + 1], v[a]
        op[v] = {tuple(w): Fraction((-1) ** (par[v[a]] * par[v[a + 1]]))}
    return op


def q_action(N, m, k):
    """Q on slots 1,2 of the k-fold power, from sum e_ij (x) e_i'j' (-1)^{ij} theta_i theta_j.

    (e_ij (x) e_kl)(e_a (x) e_b) = delta_ja delta_lb (-1)^{(k+l) a} e_i (x) e_k.
    """
    size, par, theta, prime, _ = conventions(N, m)
    op = {}
    for v in product(range(1, size + 1), repeat=k):
        a, b = v[0], v[1]
        if b != prime[a]:
            op[v] = {}
            continue
        row = {}
        j = a
        for i in range(1, size + 1):
            s = (-1) ** (par[i] * par[j]) * theta[i] * theta[j]
            s *= (-1) ** ((par[prime[i]] + par[prime[j]]) * par[a])
            row[(i, prime[i]) + v[2:]] = Fraction(s)
        op[v] = row
    return op


def identity(N, m, k):
    size = conventions(N, m)[0]
    return {v: {v: Fraction(1)} for v in product(range(1, size + 1), repeat=k)}


def r12(N, m, k, u):
    kappa = conventions(N, m)[4]
    u = Fraction(u)
    return _lin((1, identity(N, m, k)), (-1 / u, flip(N, m, k, 0)), (1 / (u - kappa), q_action(N, m, k)))


def r_all(N, m, u, v):
    """(R12(u-v), R13(u), R23(v)) on the triple power."""
    P23 = flip(N, m, 3, 1)
    P12 = flip(N, m, 3, 0)
    R12 = r12(N, m, 3, Fraction(u) - Fraction(v))
    R13 = _compose(P23, _compose(r12(N, m, 3, u), P23))
    R23 = _compose(P12, _compose(P23, _compose(r12(N, m, 3, v), _compose(P23, P12))))
    return R12, R13, R23


def ybe_residual(N, m, u, v):
    R12, R13, R23 = r_all(N, m, u, v)
    left = _compose(R12, _compose(R13, R23))
    right = _compose(R23, _compose(R13, R12))
    return _lin((1, left), (-1, right))


def is_zero(op):
    return not any(op.values())


def r_matrix_entry(N, m, u, row, col):
    """<row| R(u) |col> with row, col basis pairs."""
    return r12(N, m, 2, u).get(col, {}).get(row, Fraction(0))


# -- roots --------------------------------------------------------------------


def simple_roots(N, m):
    """Simple roots as dicts over labels ('d', i) and ('e', j)."""
    n = N // 2
    roots = [{("d", i): 1, ("d", i + 1): -1} for i in range(1, m)]
    roots.append({("d", m): 1, ("e", 1): -1})
    roots += [{("e", j): 1, ("e", j + 1): -1} for j in range(1, n)]
    if N % 2:
        roots.append({("e", n): 1})
    else:
        roots.append({("e", n - 1): 1, ("e", n): 1})
    return roots


def form(x, y):
    """(delta_i, delta_j) = -delta_ij, (eps_i, eps_j) = delta_ij."""
    return Fraction(sum(c * y.get(k, 0) * (-1 if k[0] == "d" else 1) for k, c in x.items()))


# -- small linear algebra -------------------------------------------------------


def det(A):
    A = [[Fraction(x) for x in r] for r in A]
    n, d = len(A), Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return d


def minor(A, rows, cols):
    return [[A[r][c] for c in cols] for r in rows]


def quasidet_by_dets(A, i, j):
    """Commutative entries: |A|_ij = (-1)^{i+j} det A / det A^{ij}."""
    n = len(A)
    rows = [r for r in range(n) if r != i - 1]
    cols = [c for c in range(n) if c != j - 1]
    return (-1) ** (i + j) * det(A) / det(minor(A, rows, cols))


# -- series ---------------------------------------------------------------------


def shifted_coeffs(coeffs, a, K):
    """Coefficients of sum c_r (u + a)^{-r} in u^{-1}, by the binomial series."""
    from math import comb
    out = [Fraction(0)] * (K + 1)
    for r, c in enumerate(coeffs):
        if r == 0:
            out[0] += c
            continue
        for q in range(r, K + 1):
            out[q] += c * comb(q - 1, r - 1) * Fraction(-a) ** (q - r)
    return out


# -- lowest-order brackets from the defining relation -----------------------------


def level_one_bracket(N, m, i, j, k, l):
    """[t_ij^(1), t_kl^(1)] as {(a, b): coeff} over raw generators t_ab^(1).

    Read off the u^0 v^-1 coefficient of (u - v) times the defining relation;
    only the leading 1 of (u - v)/(u - v - kappa) contributes there.
    """
    size, par, theta, prime, _ = conventions(N, m)
    p = par
    out = {}

    def add(key, c):
        out[key] = out.get(key, 0) + c
        if not out[key]:
            del out[key]

    s = (-1) ** (p[i] * p[j] + p[i] * p[k] + p[j] * p[k])
    if k == j:
        add((i, l), s)
    if i == l:
        add((k, j), -s)
    if k == prime[i]:
        add((prime[j], l), -(-1) ** (p[i] + p[i] * p[j] + p[j]) * theta[i] * theta[j])
    if l == prime[j]:
        add((k, prime[i]), (-1) ** (p[i] * p[k] + p[j] * p[k] + p[i]) * theta[prime[j]] * theta[prime[i]])
    return out
