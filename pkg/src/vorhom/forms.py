"""Positive definite Hermitian forms over Z[i] / Z[rho].

Hermitian n x n matrices form a real vector space of dimension n^2.  We fix
one chart for it, used everywhere (cones, orientations, boundary signs):

    (X_11, ..., X_nn, a_12, b_12, a_13, b_13, ..., a_{n-1,n}, b_{n-1,n})

where X_jk = a_jk + b_jk * w for j < k.  For Z[i] the (a, b) pair is exactly
(Re, Im); for Z[rho] the w-basis keeps rank-one forms integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Sequence

from . import linalg
from .ring import (QuadInt, Ring, conj_pair, flatten, get_ring, mul_pair,
                   normalize_flat, norm_pair, unflatten)


class NotPositiveDefinite(ValueError):
    pass


# -- chart on Hermitian matrices ---------------------------------------------

def offdiag_pairs(n: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def herm_coords(M) -> list:
    n = len(M)
    out = [M[j][j].a for j in range(n)]
    for j, k in offdiag_pairs(n):
        out.append(M[j][k].a)
        out.append(M[j][k].b)
    return out


def herm_from_coords(disc: int, n: int, c: Sequence):
    M = [[None] * n for _ in range(n)]
    for j in range(n):
        M[j][j] = QuadInt(c[j], 0, disc)
    pos = n
    for j, k in offdiag_pairs(n):
        x = QuadInt(c[pos], c[pos + 1], disc)
        M[j][k] = x
        M[k][j] = x.conj()
        pos += 2
    return tuple(tuple(r) for r in M)


def pairing_vector(disc: int, n: int, c: Sequence) -> list:
    """w with trace(M X) = w . coords(X), for M the matrix with coordinates c."""
    out = list(c[:n])
    for p in range(n, n * n, 2):
        a, b = c[p], c[p + 1]
        if disc == -4:
            out += [2 * a, 2 * b]
        else:
            out += [2 * a + b, a + 2 * b]
    return out


def functional_to_coords(disc: int, n: int, w: Sequence) -> list:
    """Inverse of pairing_vector, scaled by a positive constant to stay integral
    (factor 6 works for both rings)."""
    out = [6 * x for x in w[:n]]
    for p in range(n, n * n, 2):
        x, y = w[p], w[p + 1]
        if disc == -4:
            out += [3 * x, 3 * y]
        else:
            out += [2 * (2 * x - y), 2 * (2 * y - x)]
    return out


def q_flat(disc: int, flat: Sequence[int]) -> tuple:
    """Chart coordinates of v v* for a flat vector (a_1, b_1, ..., a_n, b_n)."""
    n = len(flat) // 2
    out = [norm_pair(disc, flat[2 * j], flat[2 * j + 1]) for j in range(n)]
    for j, k in offdiag_pairs(n):
        ca, cb = conj_pair(disc, flat[2 * k], flat[2 * k + 1])
        a, b = mul_pair(disc, flat[2 * j], flat[2 * j + 1], ca, cb)
        out.append(a)
        out.append(b)
    return tuple(out)


def q_map(v: Sequence[QuadInt]) -> tuple:
    """Rank-one Hermitian matrix v v* in chart coordinates; unit invariant."""
    if not any(not x.is_zero() for x in v):
        raise ValueError("q_map of the zero vector")
    return q_flat(v[0].disc, flatten(v))


# -- realification ------------------------------------------------------------

def realify_matrix(M) -> list[list]:
    """Doubled real Gram matrix of x, y -> 2 Re(x* M y) on the Z-basis
    e_1, w e_1, ..., e_n, w e_n."""
    n = len(M)
    disc = M[0][0].disc
    basis = [QuadInt(1, 0, disc), QuadInt(0, 1, disc)]
    G = [[0] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        for al in range(2):
            left = basis[al].conj()
            for k in range(n):
                lm = left * M[j][k]
                for be in range(2):
                    G[2 * j + al][2 * k + be] = (lm * basis[be]).trace()
    return G


def realify_coords(disc: int, n: int, c: Sequence) -> list[list]:
    return realify_matrix(herm_from_coords(disc, n, c))


# -- exact positive-definiteness and enumeration ------------------------------

def ldl(G) -> tuple[list, list] | None:
    """Cholesky-style decomposition x^T G x = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2.

    Returns (d, mu) or None if G is not positive definite.
    """
    n = len(G)
    Q = [[Fraction(x) for x in row] for row in G]
    for i in range(n):
        if Q[i][i] <= 0:
            return None
        for j in range(i + 1, n):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k][l] -= Q[k][i] * Q[i][l]
    d = [Q[i][i] for i in range(n)]
    mu = [[Q[i][j] if j > i else Fraction(0) for j in range(n)] for i in range(n)]
    return d, mu


def is_positive_definite(G) -> bool:
    return ldl(G) is not None


def _int_range(c: Fraction, r: Fraction) -> tuple[int, int]:
    """Integers y with (y - c)^2 <= r, as an inclusive range."""
    s = math.sqrt(float(r)) if r > 0 else 0.0
    fc = float(c)
    lo = math.floor(fc - s) - 1
    hi = math.ceil(fc + s) + 1
    while lo <= hi and (lo - c) ** 2 > r:
        lo += 1
    while hi >= lo and (hi - c) ** 2 > r:
        hi -= 1
    return lo, hi


def short_vectors(G, bound) -> list[tuple[int, ...]]:
    """All nonzero integer x, one per +-pair, with x^T G x <= bound."""
    dec = ldl(G)
    if dec is None:
        raise NotPositiveDefinite("form is not positive definite")
    d, mu = dec
    n = len(G)
    bound = Fraction(bound)
    out = []
    x = [0] * n

    def rec(i, remaining, all_zero_above):
        centre = Fraction(0)
        for j in range(i + 1, n):
            if x[j]:
                centre -= mu[i][j] * x[j]
        lo, hi = _int_range(centre, remaining / d[i])
        if all_zero_above:
            lo = max(lo, 0)
        for y in range(lo, hi + 1):
            x[i] = y
            t = y - centre
            rem = remaining - d[i] * t * t
            if i == 0:
                if not (all_zero_above and y == 0):
                    out.append(tuple(x))
            else:
                rec(i - 1, rem, all_zero_above and y == 0)
        x[i] = 0

    rec(n - 1, bound, True)
    return out


def quad_value(G, x) -> int | Fraction:
    n = len(x)
    s = 0
    for i in range(n):
        if x[i]:
            row = G[i]
            s += x[i] * sum(row[j] * x[j] for j in range(n) if x[j])
    return s


def _integral_gram(G):
    den = 1
    for r in G:
        for x in r:
            if isinstance(x, Fraction):
                den = den * x.denominator // gcd(den, x.denominator)
    return [[int(x * den) for x in r] for r in G], den


def min_and_vectors(G, bound=None) -> tuple[Fraction, list[tuple[int, ...]]]:
    """Minimum of a rational positive definite Gram matrix and all vectors
    (one per +-pair) attaining it.  With ``bound``, only vectors of value
    <= bound are searched; returns (None, []) if there are none."""
    Gi, den = _integral_gram(G)
    # enumerate in an LLL-reduced basis; skewed bases make the search tree explode
    U, R = linalg.lll_gram(Gi)
    if bound is None:
        bound = min(R[i][i] for i in range(len(R)))
    else:
        bound = Fraction(bound) * den
    n = len(Gi)
    vecs = [tuple(sum(U[r][c] * y[c] for c in range(n)) for r in range(n))
            for y in short_vectors(R, bound)]
    if not vecs:
        return None, []
    vals = [quad_value(Gi, v) for v in vecs]
    m = min(vals)
    return Fraction(m, den), [v for v, val in zip(vecs, vals) if val == m]


# -- Hermitian forms ------------------------------------------------------------

@dataclass(frozen=True)
class MinVecSet:
    min_value: int | Fraction
    vectors: tuple
    full_count: int

    @property
    def flats(self):
        return [flatten(v) for v in self.vectors]


@dataclass(frozen=True, eq=False)
class HermForm:
    """scale * entries, where entries is an integral Hermitian matrix."""
    ring: Ring
    entries: tuple
    scale: Fraction = Fraction(1)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.entries)
        for j in range(n):
            if len(self.entries[j]) != n:
                raise ValueError("matrix is not square")
            d = self.entries[j][j]
            if d.b != 0:
                raise ValueError("diagonal entries must be rational integers")
            for k in range(n):
                if self.entries[j][k] != self.entries[k][j].conj():
                    raise ValueError("matrix is not Hermitian")
                if not self.entries[j][k].is_integral():
                    raise ValueError("entries must be integral")
        if not is_positive_definite(self.gram):
            raise NotPositiveDefinite("form is not positive definite")

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def from_pairs(cls, ring, rows, scale=1) -> HermForm:
        ring = get_ring(ring)
        return cls(ring, linalg.qmat(rows, ring.disc), Fraction(scale))

    @classmethod
    def identity(cls, ring, n: int) -> HermForm:
        ring = get_ring(ring)
        return cls(ring, linalg.qidentity(n, ring.disc))

    @classmethod
    def from_coords(cls, ring, n: int, coords: Sequence) -> HermForm:
        """Primitive integral form proportional to the rational coordinates."""
        ring = get_ring(ring)
        prim = linalg.primitive(coords)
        scale = Fraction(coords[0]) / prim[0] if prim[0] else Fraction(1)
        return cls(ring, herm_from_coords(ring.disc, n, prim), scale)

    def __eq__(self, other):
        return (isinstance(other, HermForm) and self.ring == other.ring
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.ring.disc, self.entries))

    @cached_property
    def coords(self) -> tuple:
        return tuple(herm_coords(self.entries))

    @cached_property
    def gram(self):
        return realify_matrix(self.entries)

    @cached_property
    def pairing(self) -> tuple:
        return tuple(pairing_vector(self.ring.disc, self.n, self.coords))

    def transform(self, T) -> HermForm:
        """T* A T."""
        M = linalg.qmatmul(linalg.qmatmul(linalg.qconjT(T), self.entries), T)
        return HermForm(self.ring, linalg.qsimplify(M), self.scale)

    def primitive(self) -> HermForm:
        prim = linalg.primitive(self.coords)
        g = Fraction(self.coords[0]) / prim[0]
        return HermForm(self.ring, herm_from_coords(self.ring.disc, self.n, prim), self.scale * g)

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "n": self.n,
            "entries": [[[int(x.a), int(x.b)] for x in row] for row in self.entries],
            "scale": str(self.scale),
        }

    @classmethod
    def from_json(cls, data: dict) -> HermForm:
        ring = get_ring(data["ring"])
        if len(data["entries"]) != data["n"]:
            raise ValueError("entry matrix does not match n")
        return cls(ring, linalg.qmat(data["entries"], ring.disc),
                   Fraction(data.get("scale", "1")))


def evaluate(A: HermForm, v: Sequence[QuadInt]) -> int:
    """v* A v for the integral matrix of A."""
    if len(v) != A.n:
        raise ValueError(f"vector has length {len(v)}, form has rank {A.n}")
    return linalg.dot(A.pairing, q_flat(A.ring.disc, flatten(v)))


def realify(A: HermForm):
    return A.gram


def _orbit_reps(ring: Ring, flats) -> list[tuple]:
    reps = {normalize_flat(ring, f) for f in flats}
    return sorted(reps)


def minimal_vectors(A: HermForm) -> MinVecSet:
    cached = A._cache.get("minvec")
    if cached is not None:
        return cached
    m2, vecs = min_and_vectors(A.gram)
    reps = _orbit_reps(A.ring, vecs)
    mv = MinVecSet(
        min_value=int(m2 / 2) if (m2 / 2).denominator == 1 else m2 / 2,
        vectors=tuple(unflatten(f, A.ring.disc) for f in reps),
        full_count=len(reps) * len(A.ring.units),
    )
    A._cache["minvec"] = mv
    return mv


def perfection_rank(disc: int, flats) -> int:
    return linalg.rank([q_flat(disc, f) for f in flats])


def is_perfect(A: HermForm) -> tuple[bool, int]:
    mv = minimal_vectors(A)
    r = perfection_rank(A.ring.disc, mv.flats)
    return r == A.n * A.n, r


def hermitian_product(M, v, w):
    """v* M w over the quadratic field."""
    s = None
    for j, vj in enumerate(v):
        cj = vj.conj()
        for k, wk in enumerate(w):
            t = cj * M[j][k] * wk
            s = t if s is None else s + t
    return s
