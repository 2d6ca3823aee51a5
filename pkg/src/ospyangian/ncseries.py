"""Truncated extended Yangian X(osp_{N|2m}): straightening engine and series.

Elements are dicts mapping ordered words (tuples of integer letters) to
exact rationals.  The letters are

* ``c_r``: coefficients of the central series c(u), encoded as ``r``;
* ``t_ij^(r)``: generators with (i, j) in the PBW half set, encoded as
  ``LMAX * (1 + (i-1) size + (j-1)) + r``.

Integer order of the codes is the monomial order: central letters first,
then lexicographic in (i, j, r).  Generators outside the half set are never
stored; they are rewritten through T^t(u) = c(u) T(u - kappa)^{-1}.
Brackets of stored letters come from the defining relations with the
denominators (u - v)(u - v - kappa) cleared, read off row by row in u.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .superspace import SuperSpace

LMAX = 64
ONE = mpq(1)
ZERO = mpq(0)
HALF = mpq(1, 2)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

Word = tuple
Poly = dict


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient dicts; never mutated once returned)


def padd_into(acc: dict, p: dict, c=ONE) -> None:
    if not c:
        return
    for w, v in p.items():
        x = acc.get(w, ZERO) + v * c
        if x:
            acc[w] = x
        else:
            acc.pop(w, None)


def padd(*terms) -> dict:
    """padd((p, c), (q, d), ...) -> c p + d q + ..."""
    acc: dict = {}
    for p, c in terms:
        padd_into(acc, p, c)
    return acc


def pscale(p: dict, c) -> dict:
    c = mpq(c)
    if not c:
        return {}
    return {w: v * c for w, v in p.items()}


def scalar(c) -> dict:
    c = mpq(c)
    return {(): c} if c else {}


class PivotError(ArithmeticError):
    """A series to be inverted does not start with 1."""


@dataclass(frozen=True)
class Mutation:
    """Deliberate corruption of the defining relations (negative controls)."""

    kappa_shift: int = 0
    theta_flip: int | None = None

    def label(self) -> str:
        if self.theta_flip is not None:
            return f"theta-flip@{self.theta_flip}"
        return f"kappa+{self.kappa_shift}"


class Engine:
    """Normal-form arithmetic in the extended Yangian, truncated by level.

    The engine doubles as the coefficient ring for :class:`TruncSeries`.
    """

    def __init__(self, space: SuperSpace, mutation: Mutation | None = None):
        self.space = space
        self.mutation = mutation
        n = space.size
        self.size = n
        kap = space.kappa + (mutation.kappa_shift if mutation else 0)
        self.kappa = mpq(kap.numerator, kap.denominator)
        self._par = [0] + [space.parity(i) for i in range(1, n + 1)]
        self._theta = [0] + [space.theta(i) for i in range(1, n + 1)]
        self._qtheta = list(self._theta)
        if mutation and mutation.theta_flip is not None:
            self._qtheta[mutation.theta_flip] *= -1
        self._prime = [0] + [n - i + 1 for i in range(1, n + 1)]
        self._xtab: dict = {}
        self._comm: dict = {}
        self._wl: dict = {}
        self._ww: dict = {}
        self._elim: dict = {}
        self._W: dict = {}
        self._tauc: dict = {}

    # -- letters --------------------------------------------------------

    def code(self, i: int, j: int, r: int) -> int:
        if r >= LMAX:
            raise ValueError(f"level {r} exceeds engine limit {LMAX - 1}")
        return LMAX * (1 + (i - 1) * self.size + (j - 1)) + r

    def c_code(self, r: int) -> int:
        return r

    def decode(self, x: int) -> tuple:
        b, r = divmod(x, LMAX)
        if b == 0:
            return ("c", r)
        i, j = divmod(b - 1, self.size)
        return (i + 1, j + 1, r)

    def letter_parity(self, x: int) -> int:
        b = x // LMAX
        if b == 0:
            return 0
        i, j = divmod(b - 1, self.size)
        return self._par[i + 1] ^ self._par[j + 1]

    def letter_degree(self, x: int) -> int:
        return x % LMAX - 1

    def word_parity(self, w: Word) -> int:
        p = 0
        for x in w:
            p ^= self.letter_parity(x)
        return p

    def poly_parity(self, p: Poly) -> int | None:
        pars = {self.word_parity(w) for w in p}
        if len(pars) > 1:
            raise ValueError("inhomogeneous element")
        return pars.pop() if pars else None

    def degree(self, p: Poly) -> int:
        """Filtration degree (sum of level - 1); -1 for zero, 0 for scalars."""
        if not p:
            return -1
        return max(sum(x % LMAX - 1 for x in w) for w in p)

    def is_basis(self, i: int, j: int) -> bool:
        s = self.size + 1
        return i + j <= s if self._par[i] else i + j < s

    def fmt_letter(self, x: int) -> str:
        d = self.decode(x)
        if d[0] == "c":
            return f"c({d[1]})"
        return f"t[{d[0]},{d[1]}]({d[2]})"

    def describe(self, p: Poly) -> list[str]:
        return [f"({p[w]})*" + ("*".join(self.fmt_letter(x) for x in w) or "1") for w in sorted(p)]

    def fmt(self, p: Poly) -> str:
        if not p:
            return "0"
        parts = []
        for w in sorted(p):
            mono = "*".join(self.fmt_letter(x) for x in w) or "1"
            parts.append(f"({p[w]})*{mono}")
        return " + ".join(parts)

    # -- ring protocol --------------------------------------------------

    def zero(self) -> Poly:
        return {}

    def one(self) -> Poly:
        return {(): ONE}

    def from_scalar(self, c) -> Poly:
        return scalar(c)

    def add(self, p: Poly, q: Poly) -> Poly:
        return padd((p, ONE), (q, ONE))

    def sub(self, p: Poly, q: Poly) -> Poly:
        return padd((p, ONE), (q, -ONE))

    def scale(self, p: Poly, c) -> Poly:
        return pscale(p, c)

    def is_zero(self, p: Poly) -> bool:
        return not p

    def constant(self, p: Poly):
        return p.get((), ZERO)

    def mul(self, p: Poly, q: Poly) -> Poly:
        acc: dict = {}
        for w, a in p.items():
            for v, b in q.items():
                padd_into(acc, self._mul_ww(w, v), a * b)
        return acc

    def bracket(self, p: Poly, q: Poly) -> Poly:
        """Super-commutator of homogeneous elements."""
        pp, pq = self.poly_parity(p), self.poly_parity(q)
        s = -ONE if (pp and pq) else ONE
        return padd((self.mul(p, q), ONE), (self.mul(q, p), -s))

    def anticomm(self, p: Poly, q: Poly) -> Poly:
        return padd((self.mul(p, q), ONE), (self.mul(q, p), ONE))

    # -- generators -----------------------------------------------------

    def gen(self, i: int, j: int, r: int) -> Poly:
        """t_ij^(r) as an element (t^(0) = delta_ij)."""
        if r == 0:
            return {(): ONE} if i == j else {}
        if self.is_basis(i, j):
            return {(self.code(i, j, r),): ONE}
        key = (i, j, r)
        if key not in self._elim:
            self._elim[key] = self._eliminate(i, j, r)
        return self._elim[key]

    def c(self, r: int) -> Poly:
        if r == 0:
            return {(): ONE}
        return {(self.c_code(r),): ONE}

    def tsign(self, x: int, y: int) -> int:
        """Sign in (T^t)_{xy} = t_{y'x'} (-1)^{xy + y} theta_x theta_y."""
        px, py = self._par[x], self._par[y]
        s = -1 if (px * py + py) % 2 else 1
        return s * self._theta[x] * self._theta[y]

    def _shifted(self, q: int, x: int, y: int, skip_top: bool = False) -> Poly:
        """Coefficient of u^{-q} in t_xy(u - kappa)."""
        acc: dict = {}
        top = q - 1 if skip_top else q
        for a in range(1, top + 1):
            c = comb(q - 1, q - a) * self.kappa ** (q - a)
            padd_into(acc, self.gen(x, y, a), c)
        return acc

    def _winv(self, q: int, x: int, y: int, skip_top: bool = False) -> Poly:
        """Coefficient of u^{-q} in (T(u - kappa)^{-1})_{xy}."""
        if q == 0:
            return {(): ONE} if x == y else {}
        key = (q, x, y, skip_top)
        if key in self._W:
            return self._W[key]
        acc = pscale(self._shifted(q, x, y, skip_top), -1)
        for k in range(1, q):
            for p in range(1, self.size + 1):
                s = self._shifted(k, x, p)
                if not s:
                    continue
                w = self._winv(q - k, p, y)
                if w:
                    padd_into(acc, self.mul(s, w), -ONE)
        self._W[key] = acc
        return acc

    def _eliminate(self, a: int, b: int, r: int) -> Poly:
        x, y = self._prime[b], self._prime[a]
        s = self.tsign(x, y)
        # (T^t)_{xy}^{(r)} = sum_k c_k W^{(r-k)}_{xy}, with t_xy^(r) held back
        rest = self._winv(r, x, y, skip_top=True)
        rest = dict(rest)
        for k in range(1, r + 1):
            w = self._winv(r - k, x, y)
            if w:
                padd_into(rest, self.mul(self.c(k), w))
        if (x, y) == (a, b):
            if s != 1:
                raise AssertionError(f"self-paired generator ({a},{b}) with sign {s}")
            return pscale(rest, HALF)
        if not self.is_basis(x, y):
            raise AssertionError(f"partner of ({a},{b}) is not in the half set")
        padd_into(rest, self.gen(x, y, r), -ONE)
        return pscale(rest, s)

    def transpose_rest(self, a: int, r: int) -> Poly:
        """For odd a the transpose identity at t_{a a'}^(r) reduces to rest = 0."""
        x, y = a, self._prime[a]
        rest = dict(self._winv(r, x, y, skip_top=True))
        for k in range(1, r + 1):
            w = self._winv(r - k, x, y)
            if w:
                padd_into(rest, self.mul(self.c(k), w))
        return rest

    # -- the defining relations -----------------------------------------

    def _A(self, i, j, k, l, p, q) -> Poly:
        if p < 0 or q < 0:
            return {}
        P = self._par
        s1 = -ONE if (P[i] * P[j] + P[i] * P[k] + P[j] * P[k]) % 2 else ONE
        t1 = self.mul(self.gen(k, j, p), self.gen(i, l, q))
        t2 = self.mul(self.gen(k, j, q), self.gen(i, l, p))
        return padd((t1, s1), (t2, -s1))

    def _B(self, i, j, k, l, p, q) -> Poly:
        if p < 0 or q < 0:
            return {}
        P, th, pr = self._par, self._qtheta, self._prime
        acc: dict = {}
        if k == pr[i]:
            for z in range(1, self.size + 1):
                g1 = self.gen(z, j, p)
                if not g1:
                    continue
                g2 = self.gen(pr[z], l, q)
                if not g2:
                    continue
                e = P[i] + P[i] * P[j] + P[j] * P[z]
                s = (-1 if e % 2 else 1) * th[i] * th[z]
                padd_into(acc, self.mul(g1, g2), s)
        if l == pr[j]:
            for z in range(1, self.size + 1):
                g1 = self.gen(k, pr[z], q)
                if not g1:
                    continue
                g2 = self.gen(i, z, p)
                if not g2:
                    continue
                e = P[i] * P[k] + P[j] * P[k] + P[i] * P[z]
                s = (-1 if e % 2 else 1) * th[pr[j]] * th[pr[z]]
                padd_into(acc, self.mul(g1, g2), -s)
        return acc

    def cleared_rhs(self, i, j, k, l, r, s) -> Poly:
        """u^{-r} v^{-s} coefficient of (u-v-kappa) A(u,v) - (u-v) B(u,v)."""
        kap = self.kappa
        return padd(
            (self._A(i, j, k, l, r + 1, s), ONE),
            (self._A(i, j, k, l, r, s + 1), -ONE),
            (self._A(i, j, k, l, r, s), -kap),
            (self._B(i, j, k, l, r + 1, s), -ONE),
            (self._B(i, j, k, l, r, s + 1), ONE),
        )

    def relation_bracket(self, i, j, k, l, a, b) -> Poly:
        """[t_ij^(a), t_kl^(b)] solved from the cleared relation, rows r = a - 2."""
        if a <= 0 or b <= 0:
            return {}
        key = (i, j, k, l, a, b)
        got = self._xtab.get(key)
        if got is not None:
            return got
        kap = self.kappa
        if a == 1:
            res = self.cleared_rhs(i, j, k, l, -1, b)
        else:
            X = lambda p, q: self.relation_bracket(i, j, k, l, p, q)  # noqa: E731
            res = padd(
                (self.cleared_rhs(i, j, k, l, a - 2, b), ONE),
                (X(a - 1, b + 1), 2 * ONE),
                (X(a - 2, b + 2), -ONE),
                (X(a - 1, b), kap),
                (X(a - 2, b + 1), -kap),
            )
        self._xtab[key] = res
        return res

    # -- straightening --------------------------------------------------

    def letter_comm(self, x: int, y: int) -> Poly:
        if x < LMAX or y < LMAX:
            return {}
        key = (x, y)
        got = self._comm.get(key)
        if got is None:
            i, j, a = self.decode(x)
            k, l, b = self.decode(y)
            got = self.relation_bracket(i, j, k, l, a, b)
            self._comm[key] = got
        return got

    def _mul_wl(self, w: Word, y: int) -> Poly:
        if not w or w[-1] < y:
            return {w + (y,): ONE}
        key = (w, y)
        got = self._wl.get(key)
        if got is not None:
            return got
        x = w[-1]
        head = w[:-1]
        if x == y:
            if not self.letter_parity(y):
                res = {w + (y,): ONE}
            else:
                res = self._mul_wp(head, pscale(self.letter_comm(y, y), HALF))
        else:
            sgn = -ONE if (self.letter_parity(x) and self.letter_parity(y)) else ONE
            res = {}
            for v, c in self._mul_wl(head, y).items():
                padd_into(res, self._mul_wl(v, x), c * sgn)
            cm = self.letter_comm(x, y)
            if cm:
                padd_into(res, self._mul_wp(head, cm))
        self._wl[key] = res
        return res

    def _mul_wp(self, w: Word, p: Poly) -> Poly:
        acc: dict = {}
        for v, c in p.items():
            padd_into(acc, self._mul_ww(w, v), c)
        return acc

    def _mul_ww(self, w: Word, v: Word) -> Poly:
        if not v:
            return {w: ONE}
        if not w:
            return {v: ONE}
        if w[-1] < v[0]:
            return {w + v: ONE}
        key = (w, v)
        got = self._ww.get(key)
        if got is not None:
            return got
        cur = {w: ONE}
        for y in v:
            nxt: dict = {}
            for u, c in cur.items():
                padd_into(nxt, self._mul_wl(u, y), c)
            cur = nxt
        self._ww[key] = cur
        return cur

    def normal_form(self, word: Sequence, coeff=ONE) -> Poly:
        """Normal form of coeff * g1 g2 ... with g given as (i, j, r) or ('c', r)."""
        acc = scalar(coeff)
        for g in word:
            if g[0] == "c":
                acc = self.mul(acc, self.c(g[1]))
            else:
                acc = self.mul(acc, self.gen(*g))
        return acc

    def commutator(self, g1: tuple, g2: tuple) -> Poly:
        """[t_{i1 j1}^(r1), t_{i2 j2}^(r2)] computed by the straightening engine."""
        return self.bracket(self.normal_form([g1]), self.normal_form([g2]))

    # -- anti-automorphism tau and automorphisms mu_f ---------------------

    def tau_gen(self, i: int, j: int, r: int) -> Poly:
        P = self._par
        s = -1 if (P[i] * P[j] + P[j]) % 2 else 1
        return pscale(self.gen(j, i, r), s)

    def raw_c(self, r: int) -> list:
        """c_r as a list of (coeff, left factor, right factor) with factors raw generators."""
        out = []
        one_p = self._prime[1]
        for a in range(0, r + 1):
            b = r - a
            for p in range(1, self.size + 1):
                sgn = self.tsign(p, 1)
                if b == 0 and p != 1:
                    continue
                right = ("t", one_p, self._prime[p], b)
                if a == 0:
                    if p != 1:
                        continue
                    out.append((mpq(sgn), None, right))
                    continue
                for a2 in range(1, a + 1):
                    c = comb(a - 1, a - a2) * self.kappa ** (a - a2)
                    out.append((c * sgn, ("t", 1, p, a2), right))
        return out

    def tau_c(self, r: int) -> Poly:
        if r in self._tauc:
            return self._tauc[r]
        acc: dict = {}

        def tau_raw(g):
            if g is None:
                return {(): ONE}
            _, i, j, lev = g
            if lev == 0:
                return {(): ONE} if i == j else {}
            return self.tau_gen(i, j, lev)

        def par_raw(g):
            if g is None or g[3] == 0:
                return 0
            return self._par[g[1]] ^ self._par[g[2]]

        for c, left, right in self.raw_c(r):
            s = -1 if (par_raw(left) and par_raw(right)) else 1
            padd_into(acc, self.mul(tau_raw(right), tau_raw(left)), c * s)
        self._tauc[r] = acc
        return acc

    def raw_c_value(self, r: int) -> Poly:
        """c_r evaluated from its defining expression (reduces to the letter c_r)."""
        acc: dict = {}
        for c, left, right in self.raw_c(r):
            lp = {(): ONE} if left is None else self.gen(*left[1:])
            rp = self.gen(*right[1:]) if right[3] else ({(): ONE} if right[1] == right[2] else {})
            padd_into(acc, self.mul(lp, rp), c)
        return acc

    def apply_tau(self, p: Poly) -> Poly:
        acc: dict = {}
        for w, c in p.items():
            pars = [self.letter_parity(x) for x in w]
            odd_pairs = 0
            seen = 0
            for q in pars:
                if q:
                    odd_pairs += seen
                    seen += 1
            img = {(): ONE}
            for x in reversed(w):
                d = self.decode(x)
                lx = self.tau_c(d[1]) if d[0] == "c" else self.tau_gen(*d)
                img = self.mul(img, lx)
            padd_into(acc, img, -c if odd_pairs % 2 else c)
        return acc

    def apply_mu(self, p: Poly, f: Sequence) -> Poly:
        """Image under t_ij(u) -> f(u) t_ij(u); f = [1, f_1, f_2, ...] rationals."""
        f = [mpq(x) for x in f]
        if not f or f[0] != 1:
            raise ValueError("mu_f needs a series with leading coefficient 1")
        fk = lambda k: f[k] if k < len(f) else ZERO  # noqa: E731
        # f(u - kappa) f(u) coefficients, multiplying c(u)
        def fshift(q):
            s = ZERO
            for a in range(1, q + 1):
                s += fk(a) * comb(q - 1, q - a) * self.kappa ** (q - a)
            return s if q else ONE
        acc: dict = {}
        for w, c in p.items():
            img = {(): ONE}
            for x in w:
                d = self.decode(x)
                if d[0] == "c":
                    r = d[1]
                    lx: dict = {}
                    for a in range(r + 1):
                        for b in range(r - a + 1):
                            coef = fshift(a) * fk(b)
                            if coef:
                                padd_into(lx, self.c(r - a - b), coef)
                else:
                    i, j, r = d
                    lx = {}
                    for k in range(r + 1):
                        if fk(k):
                            padd_into(lx, self.gen(i, j, r - k), fk(k))
                img = self.mul(img, lx)
            padd_into(acc, img, c)
        return acc

    # -- introspection --------------------------------------------------

    def stats(self) -> dict:
        return {
            "table_size": len(self._comm),
            "relation_cache": len(self._xtab),
            "eliminated": len(self._elim),
            "memo_word_letter": len(self._wl),
            "max_word_length": max((len(w) for p in self._wl.values() for w in p), default=0),
        }

    def table_lines(self) -> list[str]:
        out = []
        for (x, y) in sorted(self._comm):
            out.append(f"[{self.fmt_letter(x)}, {self.fmt_letter(y)}] = {self.fmt(self._comm[(x, y)])}")
        return out

    def populate_table(self, max_level: int, both_orders: bool = False) -> None:
        """Fill brackets of all stored letters with levels <= max_level."""
        lets = [self.code(i, j, r) for i in range(1, self.size + 1) for j in range(1, self.size + 1)
                if self.is_basis(i, j) for r in range(1, max_level + 1)]
        for x in lets:
            for y in lets:
                if both_orders or x >= y:
                    self.letter_comm(x, y)


# ---------------------------------------------------------------------------
# truncated series over a coefficient ring


class TruncSeries:
    """sum_{r=0}^{K} coeffs[r] u^{-r} over ``ring`` (an Engine or matrix ring)."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs: Sequence):
        self.ring = ring
        self.coeffs = list(coeffs)

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, r: int):
        if 0 <= r < len(self.coeffs):
            return self.coeffs[r]
        return self.ring.zero()

    @classmethod
    def constant(cls, ring, K: int, c=1) -> "TruncSeries":
        return cls(ring, [ring.from_scalar(c)] + [ring.zero() for _ in range(K)])

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        R = self.ring
        K = min(self.K, other.K)
        return TruncSeries(R, [R.add(self[r], other[r]) for r in range(K + 1)])

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        R = self.ring
        K = min(self.K, other.K)
        return TruncSeries(R, [R.sub(self[r], other[r]) for r in range(K + 1)])

    def __neg__(self) -> "TruncSeries":
        return self.scaled(-1)

    def scaled(self, c) -> "TruncSeries":
        return TruncSeries(self.ring, [self.ring.scale(x, c) for x in self.coeffs])

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        R = self.ring
        K = min(self.K, other.K)
        out = []
        for r in range(K + 1):
            acc = R.zero()
            for a in range(r + 1):
                x, y = self[a], other[r - a]
                if R.is_zero(x) or R.is_zero(y):
                    continue
                acc = R.add(acc, R.mul(x, y))
            out.append(acc)
        return TruncSeries(R, out)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(x) for x in self.coeffs)

    def truncate(self, K: int) -> "TruncSeries":
        return TruncSeries(self.ring, self.coeffs[: K + 1])

    def __eq__(self, other) -> bool:
        return isinstance(other, TruncSeries) and (self - other).is_zero()


def series_invert(s: TruncSeries) -> TruncSeries:
    R = s.ring
    lead = R.sub(s[0], R.one())
    if not R.is_zero(lead):
        raise PivotError("series to invert must have leading coefficient 1")
    out = [R.one()]
    for r in range(1, s.K + 1):
        acc = R.zero()
        for a in range(1, r + 1):
            if R.is_zero(s[a]) or R.is_zero(out[r - a]):
                continue
            acc = R.sub(acc, R.mul(s[a], out[r - a]))
        out.append(acc)
    return TruncSeries(R, out)


def series_shift(s: TruncSeries, a) -> TruncSeries:
    """Substitute u -> u + a: (u+a)^{-r} = sum_k binom(-r, k) a^k u^{-r-k}."""
    R = s.ring
    a = mpq(a)
    out = [R.zero() for _ in range(s.K + 1)]
    out[0] = s[0]
    for r in range(1, s.K + 1):
        if R.is_zero(s[r]):
            continue
        for k in range(0, s.K - r + 1):
            c = (-1) ** k * comb(r + k - 1, k) * a ** k
            if c:
                out[r + k] = R.add(out[r + k], R.scale(s[r], c))
    return TruncSeries(R, out)


class BivarSeries:
    """sum c_{ab} u^{-a} v^{-b}, stored sparsely for 0 <= a, b <= K."""

    __slots__ = ("ring", "K", "c")

    def __init__(self, ring, K: int, c: dict | None = None):
        self.ring = ring
        self.K = K
        self.c = c or {}

    def __getitem__(self, ab):
        return self.c.get(ab, self.ring.zero())

    def _combine(self, other, sign):
        R = self.ring
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = R.add(out[k], R.scale(v, sign)) if k in out else R.scale(v, sign)
        return BivarSeries(R, min(self.K, other.K), {k: v for k, v in out.items() if not R.is_zero(v)})

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scaled(self, c):
        R = self.ring
        return BivarSeries(R, self.K, {k: R.scale(v, c) for k, v in self.c.items() if not R.is_zero(R.scale(v, c))})

    @classmethod
    def from_u(cls, s: TruncSeries) -> "BivarSeries":
        return cls(s.ring, s.K, {(a, 0): x for a, x in enumerate(s.coeffs) if not s.ring.is_zero(x)})

    @classmethod
    def from_v(cls, s: TruncSeries) -> "BivarSeries":
        return cls(s.ring, s.K, {(0, b): x for b, x in enumerate(s.coeffs) if not s.ring.is_zero(x)})

    def __mul__(self, other: "BivarSeries") -> "BivarSeries":
        R = self.ring
        K = min(self.K, other.K)
        out: dict = {}
        for (a, b), x in self.c.items():
            for (p, q), y in other.c.items():
                if a + p > K or b + q > K:
                    continue
                z = R.mul(x, y)
                key = (a + p, b + q)
                out[key] = R.add(out[key], z) if key in out else z
        return BivarSeries(R, K, {k: v for k, v in out.items() if not R.is_zero(v)})

    def shift_u(self, a) -> "BivarSeries":
        """Substitute u -> u + a."""
        R = self.ring
        a = mpq(a)
        out: dict = {}
        for (r, b), x in self.c.items():
            if r == 0:
                out[(0, b)] = R.add(out[(0, b)], x) if (0, b) in out else x
                continue
            for k in range(0, self.K - r + 1):
                c = (-1) ** k * comb(r + k - 1, k) * a ** k
                if not c:
                    continue
                key = (r + k, b)
                y = R.scale(x, c)
                out[key] = R.add(out[key], y) if key in out else y
        return BivarSeries(R, self.K, {k: v for k, v in out.items() if not R.is_zero(v)})

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(v) for v in self.c.values())

    def nonzero_keys(self) -> list:
        return sorted(k for k, v in self.c.items() if not self.ring.is_zero(v))


def divided_difference(s: TruncSeries) -> BivarSeries:
    """(s(u) - s(v)) / (u - v) using (u^{-r} - v^{-r})/(u - v) = -sum_{a+b=r+1} u^{-a} v^{-b}."""
    R = s.ring
    out: dict = {}
    for r in range(1, s.K + 1):
        if R.is_zero(s[r]):
            continue
        neg = R.scale(s[r], -1)
        for a in range(1, r + 1):
            b = r + 1 - a
            out[(a, b)] = R.add(out[(a, b)], neg) if (a, b) in out else neg
    return BivarSeries(R, s.K, out)


def bivar_bracket(ring, x: TruncSeries, y: TruncSeries, K: int) -> BivarSeries:
    """[x(u), y(v)] coefficientwise, for a+b <= K+1 (a, b <= K)."""
    out = {}
    for a in range(1, K + 1):
        for b in range(1, K + 2 - a):
            if b > K:
                continue
            z = ring.bracket(x[a], y[b])
            if not ring.is_zero(z):
                out[(a, b)] = z
    return BivarSeries(ring, K, out)


def apply_mu_f(T: Sequence[Sequence[TruncSeries]], f: Sequence) -> list[list[TruncSeries]]:
    """Series-level automorphism t_ij(u) -> f(u) t_ij(u) on a matrix of series."""
    f = [mpq(x) for x in f]
    if not f or f[0] != 1:
        raise ValueError("mu_f needs a series with leading coefficient 1")
    out = []
    for row in T:
        new = []
        for s in row:
            K = s.K
            fs = TruncSeries(s.ring, [s.ring.from_scalar(f[r] if r < len(f) else 0) for r in range(K + 1)])
            new.append(fs * s)
        out.append(new)
    return out


def generator_matrix(engine: Engine, K: int) -> list[list[TruncSeries]]:
    n = engine.size
    return [[TruncSeries(engine, [engine.gen(i, j, r) for r in range(K + 1)])
             for j in range(1, n + 1)] for i in range(1, n + 1)]
