"""Evaluation representation T(u) -> R(u - a) on C^{N|2m}.

Every t_ij(u) is sent to a size x size matrix of rational functions read off
from the R-matrix.  Whether this is a representation is not assumed: the
defining relations are checked at seeded rational points first, and only a
validated assignment is used to cross-check the symbolic computations.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

from .gauss import GaussData, build_currents, gauss_decompose
from .ncseries import Engine, TruncSeries, generator_matrix, series_shift
from .superspace import PoleError, SuperSpace, q_terms


# ---------------------------------------------------------------------------
# univariate rational functions


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q):
    out = [Fraction(0)] * max(len(p), len(q))
    for i, x in enumerate(p):
        out[i] += x
    for i, x in enumerate(q):
        out[i] += x
    return _trim(out)


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return _trim(out)


def _pdivmod(p, q):
    p = list(p)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    out = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    while len(p) >= len(q) and p:
        c = p[-1] / q[-1]
        d = len(p) - len(q)
        out[d] = c
        for i, y in enumerate(q):
            p[i + d] -= c * y
        _trim(p)
    return _trim(out), p


def _pgcd(p, q):
    while q:
        p, q = q, _pdivmod(p, q)[1]
    return [x / p[-1] for x in p] if p else p


class RatFun:
    """num/den with coefficient lists (constant first); den monic and coprime to num."""

    __slots__ = ("num", "den")

    def __init__(self, num: Sequence, den: Sequence = (1,)):
        num = _trim([Fraction(x) for x in num])
        den = _trim([Fraction(x) for x in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        g = _pgcd(num, den) if num else [Fraction(1)]
        if len(g) > 1:
            num = _pdivmod(num, g)[0]
            den = _pdivmod(den, g)[0]
        lead = den[-1]
        self.num = [x / lead for x in num]
        self.den = [x / lead for x in den]
        if not self.num:
            self.den = [Fraction(1)]

    @classmethod
    def const(cls, c) -> "RatFun":
        return cls([c])

    @classmethod
    def pole(cls, a) -> "RatFun":
        """1/(u - a)."""
        return cls([1], [-Fraction(a), 1])

    def __add__(self, o):
        o = _coerce(o)
        return RatFun(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)), _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return RatFun([-x for x in self.num], self.den)

    def __sub__(self, o):
        return self + (-_coerce(o))

    def __rsub__(self, o):
        return _coerce(o) - self

    def __mul__(self, o):
        o = _coerce(o)
        return RatFun(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _coerce(o)
        if not o.num:
            raise ZeroDivisionError("division by zero rational function")
        return RatFun(_pmul(self.num, o.den), _pmul(self.den, o.num))

    def __eq__(self, o):
        o = _coerce(o)
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((tuple(self.num), tuple(self.den)))

    def is_zero(self) -> bool:
        return not self.num

    def __call__(self, x):
        x = Fraction(x)
        d = _horner(self.den, x)
        if d == 0:
            raise PoleError(f"pole at {x}")
        return _horner(self.num, x) / d

    def expand_at_infinity(self, K: int) -> list[Fraction]:
        """Coefficients c_0..c_K of the expansion sum c_r u^{-r}; needs deg num <= deg den."""
        dn, dd = len(self.num) - 1, len(self.den) - 1
        if dn > dd:
            raise ValueError("rational function has a pole at infinity")
        # long division of num * u^K by den gives the coefficients in reverse
        shifted = [Fraction(0)] * K + list(self.num)
        q, _ = _pdivmod(shifted, self.den)
        # the polynomial part of u^K f(u) is sum_r c_r u^{K-r}
        return [q[K - r] if K - r < len(q) else Fraction(0) for r in range(K + 1)]

    def __repr__(self):
        return f"RatFun({[str(x) for x in self.num]}/{[str(x) for x in self.den]})"


def _coerce(x) -> RatFun:
    return x if isinstance(x, RatFun) else RatFun.const(x)


def _horner(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# exact matrices as a coefficient ring


class MatrixRing:
    """Sparse exact size x size matrices, graded by the parities of row and column."""

    def __init__(self, space: SuperSpace):
        self.space = space
        self.n = space.size

    def zero(self):
        return {}

    def one(self):
        return {(i, i): mpq(1) for i in range(1, self.n + 1)}

    def from_scalar(self, c):
        c = mpq(c)
        return {(i, i): c for i in range(1, self.n + 1)} if c else {}

    def add(self, x, y):
        out = dict(x)
        for k, v in y.items():
            w = out.get(k, 0) + v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        return out

    def sub(self, x, y):
        return self.add(x, self.scale(y, -1))

    def scale(self, x, c):
        c = mpq(c)
        if not c:
            return {}
        return {k: v * c for k, v in x.items()}

    def mul(self, x, y):
        if not x or not y:
            return {}
        rows: dict = {}
        for (k, l), v in y.items():
            rows.setdefault(k, []).append((l, v))
        out: dict = {}
        for (i, k), u in x.items():
            for l, v in rows.get(k, ()):
                out[(i, l)] = out.get((i, l), 0) + u * v
        return {k: v for k, v in out.items() if v}

    def is_zero(self, x):
        return not x

    def parity(self, x):
        P = self.space.parity
        pars = {(P(i) + P(j)) % 2 for (i, j) in x}
        if len(pars) > 1:
            raise ValueError("inhomogeneous matrix")
        return pars.pop() if pars else 0

    def bracket(self, x, y):
        s = -1 if (self.parity(x) and self.parity(y)) else 1
        return self.sub(self.mul(x, y), self.scale(self.mul(y, x), s))

    def anticomm(self, x, y):
        return self.add(self.mul(x, y), self.mul(y, x))

    def inv(self, x):
        raise ArithmeticError("matrix coefficients are inverted only inside series")

    def describe(self, x):
        return [f"E[{i},{j}]: {x[(i, j)]}" for (i, j) in sorted(x)]


# ---------------------------------------------------------------------------
# the assignment


class RepValidationError(RuntimeError):
    """The candidate assignment does not satisfy the defining relations."""


class RepAssignment:
    """t_ij(u) -> matrix of rational functions read from R(u - a).

    Writing R(u) = sum_{ij} e_ij (x) M_ij(u) (-1)^{ij + j}, the image of t_ij(u) is M_ij(u - a).
    ``sign_flip`` negates one Q term and exists for negative controls only.
    """

    def __init__(self, space: SuperSpace, a, sign_flip: int | None = None):
        self.space = space
        self.a = Fraction(a)
        self.sign_flip = sign_flip
        n = space.size
        kap = space.kappa
        P = space.parity
        img: dict = {}
        for i in range(1, n + 1):
            img[(i, i)] = {(k, k): RatFun.const(1) for k in range(1, n + 1)}
        # the P part: e_ij (x) e_ji (-1)^j / u
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                s = _sgn(P(j)) * _sgn(P(i) * P(j) + P(j))
                _acc(img, (i, j), (j, i), RatFun.pole(self.a) * (-s))
        for idx, (c, slots) in enumerate(q_terms(space)):
            (i, j), (k, l) = slots
            s = c * _sgn(P(i) * P(j) + P(j))
            if idx == sign_flip:
                s = -s
            _acc(img, (i, j), (k, l), RatFun.pole(self.a + kap) * s)
        self.images = img
        self._coef: dict = {}

    def matrix_at(self, i: int, j: int, u) -> dict:
        out = {}
        for key, f in self.images.get((i, j), {}).items():
            v = f(u)
            if v:
                out[key] = mpq(v.numerator, v.denominator)
        return out

    def coefficient(self, i: int, j: int, r: int) -> dict:
        """Image of t_ij^(r) from the expansion at infinity (r = 0 gives delta_ij Id)."""
        key = (i, j, r)
        if key not in self._coef:
            out = {}
            for pos, f in self.images.get((i, j), {}).items():
                c = f.expand_at_infinity(r)[r]
                if c:
                    out[pos] = mpq(c.numerator, c.denominator)
            self._coef[key] = out
        return self._coef[key]


def _sgn(e: int) -> int:
    return -1 if e % 2 else 1


def _acc(img, gen, pos, f):
    d = img.setdefault(gen, {})
    g = d.get(pos)
    d[pos] = f if g is None else g + f
    if d[pos].is_zero():
        del d[pos]


def relation_residual_at(rep: RepAssignment, ring: MatrixRing, u, v, i, j, k, l, kappa=None):
    """[t_ij(u), t_kl(v)] - A/(u-v) + B/(u-v-kappa) on matrices at a point."""
    sp = rep.space
    P, pr, th = sp.parity, sp.prime, sp.theta
    n = sp.size
    kap = sp.kappa if kappa is None else Fraction(kappa)
    u, v = Fraction(u), Fraction(v)
    T = lambda a, b, x: rep.matrix_at(a, b, x)  # noqa: E731
    lhs = ring.bracket(T(i, j, u), T(k, l, v))
    s1 = _sgn(P(i) * P(j) + P(i) * P(k) + P(j) * P(k))
    A = ring.scale(ring.sub(ring.mul(T(k, j, u), T(i, l, v)), ring.mul(T(k, j, v), T(i, l, u))), s1)
    B = {}
    if k == pr(i):
        for z in range(1, n + 1):
            sg = _sgn(P(i) + P(i) * P(j) + P(j) * P(z)) * th(i) * th(z)
            B = ring.add(B, ring.scale(ring.mul(T(z, j, u), T(pr(z), l, v)), sg))
    if l == pr(j):
        for z in range(1, n + 1):
            sg = _sgn(P(i) * P(k) + P(j) * P(k) + P(i) * P(z)) * th(pr(j)) * th(pr(z))
            B = ring.sub(B, ring.scale(ring.mul(T(k, pr(z), v), T(i, z, u)), sg))
    rhs = ring.sub(ring.scale(A, 1 / (u - v)), ring.scale(B, 1 / (u - v - kap)))
    return ring.sub(lhs, rhs)


def sample_points(rng: random.Random, count: int, avoid: Iterable, pair: bool = True,
                  retries: int = 1000) -> list:
    """Seeded small rationals (numerator and denominator bounded by 50) avoiding ``avoid``."""
    avoid = [Fraction(x) for x in avoid]
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > retries:
            raise RuntimeError("could not find enough regular sample points")
        u = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        if not pair:
            if u in avoid:
                continue
            out.append(u)
            continue
        v = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        diffs = [u - v, u - v - avoid[-1]] if avoid else [u - v]
        if any(d == 0 for d in diffs) or u in avoid or v in avoid:
            continue
        out.append((u, v))
    return out


def validate(rep: RepAssignment, points: Sequence, kappa=None) -> list:
    """Return the list of (point, indices) where the defining relations fail."""
    sp = rep.space
    ring = MatrixRing(sp)
    bad = []
    n = sp.size
    for (u, v) in points:
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                for k in range(1, n + 1):
                    for l in range(1, n + 1):
                        try:
                            res = relation_residual_at(rep, ring, u, v, i, j, k, l, kappa)
                        except PoleError:
                            continue
                        if res:
                            bad.append(((str(u), str(v)), (i, j, k, l)))
    return bad


def build_assignment(space: SuperSpace, a, seed: int = 42, points: int = 10,
                     sign_flip: int | None = None) -> RepAssignment:
    """Construct the assignment and pass it through the relation gate."""
    rep = RepAssignment(space, a, sign_flip=sign_flip)
    rng = random.Random(seed * 7919 + 17)
    poles = [rep.a, rep.a + space.kappa]
    pts = sample_points(rng, points, poles + [space.kappa])
    bad = validate(rep, pts)
    if bad:
        raise RepValidationError(f"assignment fails the defining relations at {len(bad)} instances, e.g. {bad[0]}")
    return rep


# ---------------------------------------------------------------------------
# representation model for the suites


class RepModel:
    kind = "rep"

    def __init__(self, rep: RepAssignment, K: int):
        self.rep = rep
        self.space = rep.space
        self.K = K
        self.ring = MatrixRing(rep.space)
        self.kappa = mpq(rep.space.kappa.numerator, rep.space.kappa.denominator)
        self._T = None
        self._g = None
        self._c = None

    def gen(self, i, j, r):
        if r == 0:
            return self.ring.one() if i == j else {}
        return self.rep.coefficient(i, j, r)

    @property
    def T(self):
        if self._T is None:
            n = self.space.size
            self._T = [[TruncSeries(self.ring, [self.gen(i, j, r) for r in range(self.K + 1)])
                        for j in range(1, n + 1)] for i in range(1, n + 1)]
        return self._T

    def c_series(self) -> TruncSeries:
        if self._c is None:
            from .relcheck import transposed_shift
            T = self.T
            Ts, Tt = transposed_shift(self, T, self.kappa)
            acc = None
            for p in range(self.space.size):
                term = Ts[0][p] * Tt[p][0]
                acc = term if acc is None else acc + term
            self._c = acc
        return self._c

    @property
    def gauss(self) -> GaussData:
        if self._g is None:
            self._g = build_currents(gauss_decompose(self.space, self.T, self.K))
        return self._g


def engine_image(model: RepModel, engine: Engine, p: dict) -> dict:
    """Image of a normal-form engine element under the assignment."""
    R = model.ring
    c = model.c_series()
    out = {}
    for w, coeff in p.items():
        acc = R.one()
        for x in w:
            d = engine.decode(x)
            img = c[d[1]] if d[0] == "c" else model.gen(*d)
            acc = R.mul(acc, img)
        out = R.add(out, R.scale(acc, coeff))
    return out
