"""Graded index conventions for C^{N|2m} and the orthosymplectic R-matrix.

Indices are 1-based throughout, matching the usual labelling
1, 2, ..., m, m+1, ..., (m+1)', m', ..., 1' with i' = N + 2m - i + 1.
Operators on tensor powers of C^{N|2m} are stored as sparse exact matrices
obtained from graded elementary tensors with the Koszul sign rule, so that
composition of operators is plain matrix multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence


class UnsupportedFamily(ValueError):
    """Raised for (N, m) outside the B/D orthosymplectic range N >= 3, m >= 1."""

    code = "unsupported-family"


class PoleError(ZeroDivisionError):
    """R(u) evaluated at one of its poles."""


@dataclass(frozen=True)
class SuperSpace:
    N: int
    m: int
    size: int = field(init=False)
    kappa: Fraction = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "size", self.N + 2 * self.m)
        object.__setattr__(self, "kappa", Fraction(self.N, 2) - self.m - 1)

    @property
    def n(self) -> int:
        return self.N // 2

    @property
    def family(self) -> str:
        return "B" if self.N % 2 else "D"

    @property
    def rank(self) -> int:
        return self.m + self.n

    def indices(self) -> range:
        return range(1, self.size + 1)

    def prime(self, i: int) -> int:
        return self.size - i + 1

    def parity(self, i: int) -> int:
        return 1 if (i <= self.m or i > self.N + self.m) else 0

    def theta(self, i: int) -> int:
        return 1 if i <= self.N + self.m else -1

    def sign(self, e: int) -> int:
        return -1 if e % 2 else 1

    def describe(self) -> str:
        return f"osp({self.N}|{2 * self.m}) type {self.family}"


def make_space(N: int, m: int) -> SuperSpace:
    if N < 3:
        raise UnsupportedFamily(f"unsupported family: N={N} (need N >= 3)")
    if m < 1:
        raise UnsupportedFamily(f"unsupported family: m={m} (need m >= 1)")
    return SuperSpace(N, m)


# ---------------------------------------------------------------------------
# roots and Cartan data


def _root_vector(space: SuperSpace, i: int) -> list[int]:
    r = space.rank
    if not 1 <= i <= r:
        raise IndexError(f"simple root index {i} out of range 1..{r}")
    v = [0] * r
    if i < r:
        v[i - 1], v[i] = 1, -1
    elif space.family == "B":
        v[r - 1] = 1
    else:
        v[r - 2], v[r - 1] = 1, 1
    return v


def _eps_form(space: SuperSpace, a: Sequence[int], b: Sequence[int]) -> Fraction:
    return Fraction(sum((-1 if k < space.m else 1) * x * y for k, (x, y) in enumerate(zip(a, b))))


def pairing(space: SuperSpace, i: int, j: int) -> Fraction:
    """(alpha_i, alpha_j) for the standard simple roots."""
    return _eps_form(space, _root_vector(space, i), _root_vector(space, j))


def eps_alpha(space: SuperSpace, p: int, j: int) -> Fraction:
    """(epsilon_p, alpha_j), with epsilon_{m+n+1} = 0."""
    if p == space.rank + 1:
        return Fraction(0)
    e = [0] * space.rank
    e[p - 1] = 1
    return _eps_form(space, e, _root_vector(space, j))


def h_weight(space: SuperSpace, p: int, j: int) -> Fraction:
    """(w_p, alpha_j) where w_p is the weight carried by the diagonal entry p <= m+n+1.

    For p <= m+n this is epsilon_p.  Entry m+n+1 is the fixed middle index in
    type B (weight 0) but equals (m+n)' in type D (weight -epsilon_{m+n}).
    """
    if p == space.rank + 1 and space.family == "D":
        return -eps_alpha(space, space.rank, j)
    return eps_alpha(space, p, j)


def cartan(space: SuperSpace, i: int, j: int) -> Fraction:
    c = pairing(space, i, j)
    if space.family == "B" and i == space.rank:
        c *= 2
    return c


def cartan_matrix(space: SuperSpace) -> list[list[Fraction]]:
    r = space.rank
    return [[cartan(space, i, j) for j in range(1, r + 1)] for i in range(1, r + 1)]


# ---------------------------------------------------------------------------
# super-transposition


def super_transpose(space: SuperSpace, A: Sequence[Sequence], scale: Callable = None) -> list[list]:
    """(A^t)_{ij} = a_{j'i'} (-1)^{ij + j} theta_i theta_j (0-based nested lists)."""
    if scale is None:
        scale = lambda x, s: x * s  # noqa: E731
    n = space.size
    out = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            pi, pj = space.parity(i), space.parity(j)
            s = space.sign(pi * pj + pj) * space.theta(i) * space.theta(j)
            row.append(scale(A[space.prime(j) - 1][space.prime(i) - 1], s))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# sparse operators on tensor powers

Term = tuple  # (coeff, ((i1, j1), (i2, j2), ...)) ; None slot = identity


class TensorOperator:
    """Sparse exact matrix acting on (C^{N|2m})^{(x) k}.

    Basis vector e_{a1} (x) ... (x) e_{ak} has flat index
    sum (a_s - 1) size^{k-s} (slot-major).
    """

    __slots__ = ("space", "k", "rows")

    def __init__(self, space: SuperSpace, k: int, rows: dict | None = None):
        self.space = space
        self.k = k
        self.rows = rows if rows is not None else {}

    @property
    def dim(self) -> int:
        return self.space.size ** self.k

    @classmethod
    def identity(cls, space: SuperSpace, k: int = 2) -> "TensorOperator":
        return cls(space, k, {r: {r: Fraction(1)} for r in range(space.size ** k)})

    @classmethod
    def from_terms(cls, space: SuperSpace, k: int, terms: Iterable[Term]) -> "TensorOperator":
        """Build from graded elementary tensors with the Koszul rule.

        (X_1 (x) ... (x) X_k)(e_{a1} (x) ... (x) e_{ak})
            = (-1)^{sum_s deg(X_s)(a_1 + ... + a_{s-1})} X_1 e_{a1} (x) ... ;
        a slot given as None is the identity of that factor.
        """
        n = space.size
        par = [0] + [space.parity(i) for i in range(1, n + 1)]
        op = cls(space, k)
        for coeff, slots in terms:
            # enumerate all input basis vectors compatible with the slots
            choices = []
            for sl in slots:
                if sl is None:
                    choices.append([(a, a) for a in range(1, n + 1)])
                else:
                    choices.append([(sl[0], sl[1])])
            _fill(op, coeff, slots, choices, par, n)
        return op

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        out = {r: dict(c) for r, c in self.rows.items()}
        for r, cols in other.rows.items():
            row = out.setdefault(r, {})
            for c, v in cols.items():
                w = row.get(c, 0) + v
                if w:
                    row[c] = w
                else:
                    row.pop(c, None)
        return TensorOperator(self.space, self.k, {r: c for r, c in out.items() if c})

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        return self + other.scaled(-1)

    def scaled(self, s) -> "TensorOperator":
        s = Fraction(s)
        if s == 0:
            return TensorOperator(self.space, self.k)
        return TensorOperator(self.space, self.k, {r: {c: v * s for c, v in cols.items()} for r, cols in self.rows.items()})

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        out = {}
        for r, cols in self.rows.items():
            acc: dict = {}
            for c, v in cols.items():
                orow = other.rows.get(c)
                if not orow:
                    continue
                for c2, w in orow.items():
                    acc[c2] = acc.get(c2, 0) + v * w
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                out[r] = acc
        return TensorOperator(self.space, self.k, out)

    def is_zero(self) -> bool:
        return not any(self.rows.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, TensorOperator) and (self - other).is_zero()

    def entry(self, r: int, c: int) -> Fraction:
        return self.rows.get(r, {}).get(c, Fraction(0))

    def nnz(self) -> int:
        return sum(len(c) for c in self.rows.values())


def _fill(op, coeff, slots, choices, par, n):
    def rec(s, row, col, deg_before, sign):
        if s == len(slots):
            r = op.rows.setdefault(row, {})
            v = r.get(col, 0) + coeff * sign
            if v:
                r[col] = v
            else:
                r.pop(col, None)
            return
        sl = slots[s]
        d = 0 if sl is None else (par[sl[0]] + par[sl[1]]) % 2
        for out_i, in_a in choices[s]:
            sg = -sign if (d * deg_before) % 2 else sign
            rec(s + 1, row * n + out_i - 1, col * n + in_a - 1, deg_before + par[in_a], sg)

    rec(0, 0, 0, 0, 1)


def p_terms(space: SuperSpace) -> list[Term]:
    out = []
    for i in space.indices():
        for j in space.indices():
            out.append((Fraction(space.sign(space.parity(j))), ((i, j), (j, i))))
    return out


def q_terms(space: SuperSpace) -> list[Term]:
    out = []
    pr = space.prime
    for i in space.indices():
        for j in space.indices():
            s = space.sign(space.parity(i) * space.parity(j)) * space.theta(i) * space.theta(j)
            out.append((Fraction(s), ((i, j), (pr(i), pr(j)))))
    return out


def _place(terms: list[Term], k: int, a: int, b: int) -> list[Term]:
    out = []
    for c, (x, y) in terms:
        slots = [None] * k
        slots[a], slots[b] = x, y
        out.append((c, tuple(slots)))
    return out


def build_P(space: SuperSpace) -> TensorOperator:
    return TensorOperator.from_terms(space, 2, p_terms(space))


def build_Q(space: SuperSpace) -> TensorOperator:
    return TensorOperator.from_terms(space, 2, q_terms(space))


def r_terms(space: SuperSpace, u, sign_flip: int | None = None, kappa=None) -> list[Term]:
    """Elementary-tensor expansion of R(u) = 1 - P/u + Q/(u - kappa).

    ``sign_flip`` negates the n-th Q term and ``kappa`` overrides the pole;
    both exist only for negative controls.
    """
    u = Fraction(u)
    kap = space.kappa if kappa is None else Fraction(kappa)
    if u == 0 or u == kap:
        raise PoleError(f"R(u) has a pole at u={u}")
    terms: list[Term] = [(Fraction(1), (None, None))]
    terms += [(-c / u, s) for c, s in p_terms(space)]
    qs = [(c / (u - kap), s) for c, s in q_terms(space)]
    if sign_flip is not None:
        c, s = qs[sign_flip]
        qs[sign_flip] = (-c, s)
    return terms + qs


def build_R(space: SuperSpace, u, **kw) -> TensorOperator:
    return TensorOperator.from_terms(space, 2, r_terms(space, u, **kw))


def build_R_in(space: SuperSpace, u, k: int, a: int, b: int, **kw) -> TensorOperator:
    """R(u) acting in factors a, b (0-based) of a k-fold tensor power."""
    return TensorOperator.from_terms(space, k, _place(r_terms(space, u, **kw), k, a, b))


def ybe_residual(space: SuperSpace, u, v, **kw) -> TensorOperator:
    u, v = Fraction(u), Fraction(v)
    R12 = build_R_in(space, u - v, 3, 0, 1, **kw)
    R13 = build_R_in(space, u, 3, 0, 2, **kw)
    R23 = build_R_in(space, v, 3, 1, 2, **kw)
    return (R12 @ R13 @ R23) - (R23 @ R13 @ R12)


def derived_constants(space: SuperSpace) -> dict:
    """Q^2 = a Q, P Q = b Q and the scalar R(u) R(-u), computed by multiplication."""
    P, Q = build_P(space), build_Q(space)
    Q2 = Q @ Q
    r, c = next((r, c) for r, cols in Q.rows.items() for c in cols)
    a = Q2.entry(r, c) / Q.entry(r, c)
    if Q2 != Q.scaled(a):
        raise AssertionError("Q^2 is not proportional to Q")
    PQ = P @ Q
    b = PQ.entry(r, c) / Q.entry(r, c)
    if PQ != Q.scaled(b) or Q @ P != Q.scaled(b):
        raise AssertionError("PQ is not proportional to Q")
    # R(u)R(-u) = s(u) Id; s(u) u^2 (u^2 - kappa^2) is a polynomial of degree <= 4
    pts = [Fraction(k, 3) + 5 for k in range(7)]
    vals = []
    for u in pts:
        prod = build_R(space, u) @ build_R(space, -u)
        s = prod.entry(0, 0)
        if prod != TensorOperator.identity(space).scaled(s):
            raise AssertionError("R(u)R(-u) is not scalar")
        vals.append(s * u * u * (u * u - space.kappa ** 2))
    numer = _interpolate(pts[:5], vals[:5])
    for u, val in zip(pts[5:], vals[5:]):
        if _horner(numer, u) != val:
            raise AssertionError("unitarity numerator has degree > 4")
    return {
        "N": space.N,
        "m": space.m,
        "Q_squared_coeff": str(a),
        "PQ_sign": int(b),
        "unitarity_scalar_numer_poly": [str(x) for x in numer],
        "unitarity_scalar_denom": "u^2 (u^2 - kappa^2)",
    }


def _horner(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _interpolate(xs, ys):
    """Coefficients (constant first) of the Lagrange interpolant."""
    n = len(xs)
    out = [Fraction(0)] * n
    for i in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xs[j] * basis[k + 1]
            denom *= xs[i] - xs[j]
        for k in range(n):
            out[k] += ys[i] * basis[k] / denom
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out
