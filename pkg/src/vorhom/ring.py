"""Arithmetic in the Gaussian integers Z[i] and the Eisenstein integers Z[rho].

Elements are written ``a + b*w`` with ``w = i`` (disc -4) or
``w = rho = (1 + sqrt(-3))/2`` (disc -3).  Components are Python ints for
ring elements; the same class carries ``Fraction`` components when an
element of the fraction field is needed (matrix inverses, rational forms).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

SPLIT, INERT, RAMIFIED = "split", "inert", "ramified"


@dataclass(frozen=True, slots=True)
class QuadInt:
    a: int | Fraction
    b: int | Fraction
    disc: int

    def __add__(self, other):
        if not isinstance(other, QuadInt):
            return QuadInt(self.a + other, self.b, self.disc)
        return QuadInt(self.a + other.a, self.b + other.b, self.disc)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, QuadInt):
            return QuadInt(self.a - other, self.b, self.disc)
        return QuadInt(self.a - other.a, self.b - other.b, self.disc)

    def __rsub__(self, other):
        return QuadInt(other - self.a, -self.b, self.disc)

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.disc)

    def __mul__(self, other):
        if not isinstance(other, QuadInt):
            return QuadInt(self.a * other, self.b * other, self.disc)
        a, b = mul_pair(self.disc, self.a, self.b, other.a, other.b)
        return QuadInt(a, b, self.disc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, QuadInt):
            other = Fraction(other)
            return QuadInt(Fraction(self.a) / other, Fraction(self.b) / other, self.disc)
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        p = self * other.conj()
        return QuadInt(Fraction(p.a, 1) / n, Fraction(p.b, 1) / n, self.disc)

    def conj(self) -> QuadInt:
        a, b = conj_pair(self.disc, self.a, self.b)
        return QuadInt(a, b, self.disc)

    def norm(self):
        return norm_pair(self.disc, self.a, self.b)

    def trace(self):
        """a + conj(a), i.e. twice the real part; integral on ring elements."""
        return 2 * self.a + (self.b if self.disc == -3 else 0)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        return _is_int(self.a) and _is_int(self.b)

    def key(self) -> tuple:
        return (self.a, self.b)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        w = "i" if self.disc == -4 else "r"
        return f"({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}{w})"


def _is_int(x) -> bool:
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


def mul_pair(disc, a1, b1, a2, b2):
    bb = b1 * b2
    if disc == -4:
        return a1 * a2 - bb, a1 * b2 + a2 * b1
    return a1 * a2 - bb, a1 * b2 + a2 * b1 + bb


def conj_pair(disc, a, b):
    if disc == -4:
        return a, -b
    return a + b, -b


def norm_pair(disc, a, b):
    if disc == -4:
        return a * a + b * b
    return a * a + a * b + b * b


class Ring:
    """One of the two rings; holds the unit group and small helpers."""

    def __init__(self, disc: int):
        if disc not in (-4, -3):
            raise ValueError(f"unsupported discriminant {disc}")
        self.disc = disc
        if disc == -4:
            pairs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        else:
            pairs = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
        self.units = tuple(QuadInt(a, b, disc) for a, b in pairs)
        self.unit_pairs = tuple(pairs)

    name = property(lambda self: "gaussian" if self.disc == -4 else "eisenstein")

    def __repr__(self):
        return f"Ring({self.name})"

    def __eq__(self, other):
        return isinstance(other, Ring) and other.disc == self.disc

    def __hash__(self):
        return hash(self.disc)

    def __call__(self, a, b=0) -> QuadInt:
        return QuadInt(a, b, self.disc)

    @property
    def zero(self):
        return QuadInt(0, 0, self.disc)

    @property
    def one(self):
        return QuadInt(1, 0, self.disc)

    @cached_property
    def omega(self):
        return QuadInt(0, 1, self.disc)

    def is_unit(self, x: QuadInt) -> bool:
        return x.is_integral() and x.norm() == 1

    def to_json(self) -> dict:
        return {"disc": self.disc}


GAUSSIAN = Ring(-4)
EISENSTEIN = Ring(-3)

_BY_NAME = {"gaussian": GAUSSIAN, "eisenstein": EISENSTEIN, "-4": GAUSSIAN, "-3": EISENSTEIN}


def get_ring(spec) -> Ring:
    """Look a ring up by name, discriminant, or ``{"disc": d}`` dict."""
    if isinstance(spec, Ring):
        return spec
    if isinstance(spec, dict):
        spec = spec["disc"]
    try:
        return _BY_NAME[str(spec).lower()]
    except KeyError:
        raise ValueError(f"unknown ring {spec!r}; use gaussian or eisenstein") from None


def norm(x: QuadInt):
    return x.norm()


# -- flat integer vectors ---------------------------------------------------
# A vector of length n over the ring is stored internally as the flat tuple
# (a_1, b_1, ..., a_n, b_n).  Lexicographic order on that tuple is exactly the
# componentwise (a, b) order used for canonical representatives.

def flatten(v: Sequence[QuadInt]) -> tuple:
    out = []
    for x in v:
        out.append(x.a)
        out.append(x.b)
    return tuple(out)


def unflatten(flat: Sequence, disc: int) -> tuple:
    return tuple(QuadInt(flat[2 * j], flat[2 * j + 1], disc) for j in range(len(flat) // 2))


def scale_flat(disc: int, u: tuple, flat: Sequence) -> tuple:
    ua, ub = u
    out = []
    for j in range(0, len(flat), 2):
        a, b = mul_pair(disc, ua, ub, flat[j], flat[j + 1])
        out.append(a)
        out.append(b)
    return tuple(out)


def normalize_flat(ring: Ring, flat: Sequence) -> tuple:
    best = None
    for u in ring.unit_pairs:
        cand = scale_flat(ring.disc, u, flat)
        if best is None or cand < best:
            best = cand
    return best


def unit_normalize(v: Sequence[QuadInt], ring: Ring | None = None) -> tuple:
    """Canonical representative of the unit orbit {u*v}: the lexicographically
    smallest vector under (a, b) order."""
    if not v:
        raise ValueError("empty vector")
    disc = v[0].disc
    ring = ring or get_ring(disc)
    flat = flatten(v)
    if not any(flat):
        raise ValueError("cannot normalize the zero vector")
    return unflatten(normalize_flat(ring, flat), disc)


# -- primes -----------------------------------------------------------------

def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def kronecker(d: int, p: int) -> int:
    """Kronecker symbol (d/p) for a prime p."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    r = pow(d % p, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def splitting_type(ring: Ring, p: int) -> str:
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if ring.disc % p == 0:
        return RAMIFIED
    return SPLIT if kronecker(ring.disc, p) == 1 else INERT


def prime_factors(n: int) -> set[int]:
    n = abs(n)
    out, f = set(), 2
    while f * f <= n:
        while n % f == 0:
            out.add(f)
            n //= f
        f += 1
    if n > 1:
        out.add(n)
    return out


def elements_of_norm(ring: Ring, m: int) -> Iterable[QuadInt]:
    """All ring elements of norm exactly m (small m; brute force)."""
    r = 2 * int(m ** 0.5) + 2
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if norm_pair(ring.disc, a, b) == m:
                yield QuadInt(a, b, ring.disc)
