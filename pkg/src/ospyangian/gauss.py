"""Quasideterminants, the Gauss decomposition T = F H E and the currents built from it."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .ncseries import TruncSeries, series_invert, series_shift
from .superspace import SuperSpace


class PivotFailure(ArithmeticError):
    def __init__(self, index: int, detail: str = ""):
        super().__init__(f"pivot {index} not invertible {detail}".strip())
        self.index = index


class ScalarField:
    """Exact rationals as a ring, for small quasideterminant examples."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_scalar(self, c):
        return Fraction(c)

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def scale(self, x, c):
        return x * Fraction(c)

    def is_zero(self, x):
        return x == 0

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("singular pivot")
        return 1 / x


class SeriesRing:
    """Truncated series over a coefficient ring, as a ring in its own right."""

    def __init__(self, base, K: int):
        self.base = base
        self.K = K

    def zero(self):
        return TruncSeries(self.base, [self.base.zero() for _ in range(self.K + 1)])

    def one(self):
        return TruncSeries.constant(self.base, self.K, 1)

    def from_scalar(self, c):
        return TruncSeries.constant(self.base, self.K, c)

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def scale(self, x, c):
        return x.scaled(c)

    def is_zero(self, x):
        return x.is_zero()

    def inv(self, x):
        return series_invert(x)


def mat_mul(ring, A, B):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = ring.zero()
            for p in range(k):
                if ring.is_zero(A[i][p]) or ring.is_zero(B[p][j]):
                    continue
                acc = ring.add(acc, ring.mul(A[i][p], B[p][j]))
            row.append(acc)
        out.append(row)
    return out


def mat_inverse(ring, A):
    """Inverse by Gaussian elimination pivoting on the diagonal (no row swaps)."""
    n = len(A)
    M = [list(r) + [ring.one() if i == j else ring.zero() for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        try:
            piv = ring.inv(M[c][c])
        except (ArithmeticError, ZeroDivisionError) as exc:
            raise PivotFailure(c + 1, str(exc)) from exc
        M[c] = [ring.mul(piv, x) for x in M[c]]
        for r in range(n):
            if r == c or ring.is_zero(M[r][c]):
                continue
            f = M[r][c]
            M[r] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def quasidet(ring, A, i: int, j: int):
    """|A|_{ij} = a_ij - r_i^j (A^{ij})^{-1} c_j^i, 1-based indices."""
    n = len(A)
    rows = [r for r in range(n) if r != i - 1]
    cols = [c for c in range(n) if c != j - 1]
    if not rows:
        return A[i - 1][j - 1]
    minor = [[A[r][c] for c in cols] for r in rows]
    inv = mat_inverse(ring, minor)
    rvec = [[A[i - 1][c] for c in cols]]
    cvec = [[A[r][j - 1]] for r in rows]
    corr = mat_mul(ring, mat_mul(ring, rvec, inv), cvec)[0][0]
    return ring.sub(A[i - 1][j - 1], corr)


def schur_step(ring, T):
    """One pivot step on the leading entry: returns (h, e_row, f_col, complement)."""
    h = T[0][0]
    try:
        hinv = ring.inv(h)
    except (ArithmeticError, ZeroDivisionError) as exc:
        raise PivotFailure(1, str(exc)) from exc
    e_row = [ring.mul(hinv, x) for x in T[0][1:]]
    f_col = [ring.mul(T[r][0], hinv) for r in range(1, len(T))]
    comp = []
    for r in range(1, len(T)):
        row = []
        for c in range(1, len(T)):
            x = T[r][c]
            if not (ring.is_zero(T[r][0]) or ring.is_zero(T[0][c])):
                x = ring.sub(x, ring.mul(ring.mul(T[r][0], hinv), T[0][c]))
            row.append(x)
        comp.append(row)
    return h, e_row, f_col, comp


@dataclass
class GaussData:
    space: SuperSpace
    K: int
    ring: object
    h: list = field(default_factory=list)           # h[i-1] = h_i(u)
    e: dict = field(default_factory=dict)           # e[(i, j)] for i < j
    f: dict = field(default_factory=dict)           # f[(j, i)] for j > i
    stages: list = field(default_factory=list)      # stages[l] = t^[l] block, indices l+1..size
    k: dict = field(default_factory=dict)           # k_i(u)
    ecur: dict = field(default_factory=dict)        # e_i(u)
    fcur: dict = field(default_factory=dict)        # f_i(u)
    kappa_cur: dict = field(default_factory=dict)   # Drinfeld kappa_i(u)
    xi_plus: dict = field(default_factory=dict)
    xi_minus: dict = field(default_factory=dict)

    def F(self):
        R, n = self.ring, self.space.size
        return [[R.one() if i == j else (self.f[(i + 1, j + 1)] if i > j else R.zero())
                 for j in range(n)] for i in range(n)]

    def H(self):
        R, n = self.ring, self.space.size
        return [[self.h[i] if i == j else R.zero() for j in range(n)] for i in range(n)]

    def E(self):
        R, n = self.ring, self.space.size
        return [[R.one() if i == j else (self.e[(i + 1, j + 1)] if i < j else R.zero())
                 for j in range(n)] for i in range(n)]

    def reconstruct(self):
        return mat_mul(self.ring, mat_mul(self.ring, self.F(), self.H()), self.E())


def gauss_decompose(space: SuperSpace, T, K: int, ring=None) -> GaussData:
    """LDU by iterated Schur complement; T is a size x size matrix of series."""
    ring = ring or SeriesRing(T[0][0].ring, K)
    n = space.size
    g = GaussData(space=space, K=K, ring=ring)
    cur = [list(r) for r in T]
    g.stages.append(cur)
    for p in range(1, n + 1):
        try:
            h, e_row, f_col, comp = schur_step(ring, cur)
        except PivotFailure as exc:
            raise PivotFailure(p, str(exc)) from exc
        g.h.append(h)
        for q, x in enumerate(e_row):
            g.e[(p, p + 1 + q)] = x
        for q, x in enumerate(f_col):
            g.f[(p + 1 + q, p)] = x
        cur = comp
        g.stages.append(cur)
    return g


def stage_entry(g: GaussData, l: int, i: int, j: int):
    """t^[l]_ij(u) from the stored Schur complements (indices in l+1..size)."""
    return g.stages[l][i - l - 1][j - l - 1]


def _shift(s: TruncSeries, a: Fraction) -> TruncSeries:
    return s if a == 0 else series_shift(s, a)


def build_currents(g: GaussData) -> GaussData:
    sp, R = g.space, g.ring
    m, n = sp.m, sp.n
    h = lambda i: g.h[i - 1]  # noqa: E731
    last = m + n if sp.family == "B" else m + n - 1
    for i in range(1, last + 1):
        g.k[i] = R.mul(R.inv(h(i)), h(i + 1))
        g.ecur[i] = g.e[(i, i + 1)]
        g.fcur[i] = g.f[(i + 1, i)]
    if sp.family == "D":
        i = m + n
        g.k[i] = R.mul(R.inv(h(i - 1)), h(i + 1))
        g.ecur[i] = g.e[(i - 1, i + 1)]
        g.fcur[i] = g.f[(i + 1, i - 1)]
    for i in range(1, m + n + 1):
        if sp.family == "D" and i == m + n:
            a = Fraction(-(n - 1), 2)
            sgn = 1
        else:
            pi = sp.parity(i)
            a = Fraction((-1) ** pi * (m - i), 2)
            sgn = (-1) ** pi
        g.kappa_cur[i] = _shift(g.k[i], a)
        g.xi_plus[i] = _shift(g.fcur[i], a)
        g.xi_minus[i] = _shift(g.ecur[i], a).scaled(sgn)
    return g


def psi_embed(space: SuperSpace, l: int, T, K: int, ring=None) -> dict:
    """t^[l]_ij(u) for l+1 <= i, j <= size - l as bordered quasideterminants."""
    rank = space.m + space.n
    bound = rank if space.family == "B" else rank - 1
    if not 0 <= l <= bound:
        raise ValueError(f"embedding level {l} outside 0..{bound}")
    ring = ring or SeriesRing(T[0][0].ring, K)
    n = space.size
    out = {}
    for i in range(l + 1, n - l + 1):
        for j in range(l + 1, n - l + 1):
            if l == 0:
                out[(i, j)] = T[i - 1][j - 1]
                continue
            idx = list(range(l)) + [i - 1]
            jdx = list(range(l)) + [j - 1]
            A = [[T[r][c] for c in jdx] for r in idx]
            out[(i, j)] = quasidet(ring, A, l + 1, l + 1)
    return out


def neumann_inverse(ring, A, K: int):
    """Inverse of I + N for a matrix of series with N = O(u^{-1}): sum of (-N)^k, k <= K."""
    n = len(A)
    Nm = [[ring.sub(A[i][j], ring.one()) if i == j else A[i][j] for j in range(n)] for i in range(n)]
    negN = [[ring.scale(x, -1) for x in row] for row in Nm]
    total = [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]
    power = [row[:] for row in total]
    for _ in range(K):
        power = mat_mul(ring, power, negN)
        total = [[ring.add(x, y) for x, y in zip(r1, r2)] for r1, r2 in zip(total, power)]
    return total


def quasidet_formulas(space: SuperSpace, T, K: int, ring=None) -> GaussData:
    """h, e, f from leading-minor quasideterminants, with minors inverted by Neumann series."""
    ring = ring or SeriesRing(T[0][0].ring, K)
    n = space.size
    g = GaussData(space=space, K=K, ring=ring)

    def qd(i, j, p):
        # |block rows 1..p-1,i ; cols 1..p-1,j|_{last,last}
        if p == 1:
            return T[i - 1][j - 1]
        lead = [[T[r][c] for c in range(p - 1)] for r in range(p - 1)]
        inv = neumann_inverse(ring, lead, K)
        rv = [[T[i - 1][c] for c in range(p - 1)]]
        cv = [[T[r][j - 1]] for r in range(p - 1)]
        corr = mat_mul(ring, mat_mul(ring, rv, inv), cv)[0][0]
        return ring.sub(T[i - 1][j - 1], corr)

    for i in range(1, n + 1):
        hi = qd(i, i, i)
        g.h.append(hi)
        hinv = ring.inv(hi)
        for j in range(i + 1, n + 1):
            g.e[(i, j)] = ring.mul(hinv, qd(i, j, i))
            g.f[(j, i)] = ring.mul(qd(j, i, i), hinv)
    return g
