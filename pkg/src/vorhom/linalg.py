"""Exact rational linear algebra on lists of ints/Fractions, plus small
matrix helpers over the quadratic rings."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .ring import QuadInt


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows)[1])


def row_echelon(rows):
    """Reduced row echelon form over Q. Returns (rows, pivot_columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : rows . x = 0}."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, piv = row_echelon(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, c in enumerate(piv):
            x[c] = -red[r][f]
        basis.append(x)
    return basis


def det(mat) -> Fraction:
    m = [[Fraction(x) for x in r] for r in mat]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def det_sign(mat) -> int:
    d = det(mat)
    return (d > 0) - (d < 0)


def primitive(vec) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to a primitive integer vector."""
    den = 1
    for x in vec:
        x = Fraction(x)
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(Fraction(x) * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def dot(u, v):
    return sum(x * y for x, y in zip(u, v))


class SpanChart:
    """Coordinates on the rational span of an ordered list of vectors.

    The basis is picked greedily (first vector that raises the rank), so an
    ordered generator list fixes an ordered basis and hence an orientation.
    """

    def __init__(self, vectors: Sequence[Sequence]):
        self.basis_index: list[int] = []
        basis: list = []
        red: list = []
        piv: list = []
        for i, v in enumerate(vectors):
            w = [Fraction(x) for x in v]
            for r, c in zip(red, piv):
                if w[c] != 0:
                    f = w[c]
                    w = [x - f * y for x, y in zip(w, r)]
            c = next((k for k, x in enumerate(w) if x != 0), None)
            if c is None:
                continue
            inv = 1 / w[c]
            w = [x * inv for x in w]
            for k in range(len(red)):
                if red[k][c] != 0:
                    f = red[k][c]
                    red[k] = [x - f * y for x, y in zip(red[k], w)]
            red.append(w)
            piv.append(c)
            self.basis_index.append(i)
            basis.append(list(v))
        self.basis = basis
        self.dim = len(basis)
        # pivot columns where the basis restricted is invertible
        self.pivots = piv
        sub = [[Fraction(basis[j][c]) for j in range(self.dim)] for c in piv]
        self._inv = inverse(sub) if self.dim else []

    def coords(self, v) -> list[Fraction]:
        """Coordinates of v (assumed in the span) w.r.t. the ordered basis."""
        rhs = [v[c] for c in self.pivots]
        return [sum(r[k] * rhs[k] for k in range(self.dim)) for r in self._inv]

    def contains(self, v) -> bool:
        c = self.coords(v)
        for k in range(len(v)):
            if sum(c[j] * self.basis[j][k] for j in range(self.dim)) != v[k]:
                return False
        return True


def inverse(mat):
    n = len(mat)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[p] = m[p], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


# -- matrices over the quadratic field (tuple of tuples of QuadInt) ---------

def _gram_schmidt(G):
    """mu and squared lengths of the Gram-Schmidt vectors of a Gram matrix."""
    n = len(G)
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            mu[i][j] = (G[i][j] - sum(mu[j][k] * mu[i][k] * B[k] for k in range(j))) / B[j]
        B[i] = G[i][i] - sum(mu[i][k] ** 2 * B[k] for k in range(i))
    return mu, B


def lll_gram(G, delta: Fraction = Fraction(3, 4)):
    """LLL reduction of a positive definite integral Gram matrix.

    Returns (U, R) with U unimodular (columns are the new basis in old
    coordinates) and R = U^T G U.
    """
    n = len(G)
    G = [[int(x) for x in row] for row in G]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def add_col(k, j, q):  # b_k -= q b_j
        for r in range(n):
            U[r][k] -= q * U[r][j]
        for r in range(n):
            G[r][k] -= q * G[r][j]
        for c in range(n):
            G[k][c] -= q * G[j][c]

    def swap(k, j):
        for r in range(n):
            U[r][k], U[r][j] = U[r][j], U[r][k]
        G[k], G[j] = G[j], G[k]
        for row in G:
            row[k], row[j] = row[j], row[k]

    k = 1
    while k < n:
        mu, _ = _gram_schmidt(G)
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                add_col(k, j, q)
                mu, _ = _gram_schmidt(G)
        mu, B = _gram_schmidt(G)
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            k = max(k - 1, 1)
    return U, G


def qmat(rows, disc: int):
    """Build a QuadInt matrix from nested (a, b) pairs / ints / QuadInts."""
    def conv(x):
        if isinstance(x, QuadInt):
            return x
        if isinstance(x, (tuple, list)):
            return QuadInt(x[0], x[1], disc)
        return QuadInt(x, 0, disc)
    return tuple(tuple(conv(x) for x in r) for r in rows)


def qidentity(n: int, disc: int):
    return tuple(tuple(QuadInt(int(i == j), 0, disc) for j in range(n)) for i in range(n))


def qmatmul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = A[i][0] * B[0][j]
            for t in range(1, k):
                s = s + A[i][t] * B[t][j]
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def qmatvec(A, v):
    out = []
    for row in A:
        s = row[0] * v[0]
        for t in range(1, len(v)):
            s = s + row[t] * v[t]
        out.append(s)
    return tuple(out)


def qconjT(A):
    return tuple(tuple(A[j][i].conj() for j in range(len(A))) for i in range(len(A[0])))


def qdet(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    # Laplace expansion along the first row; n <= 5 here
    total = None
    for j in range(n):
        minor = tuple(tuple(A[i][k] for k in range(n) if k != j) for i in range(1, n))
        term = A[0][j] * qdet(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def qinverse(A):
    n = len(A)
    disc = A[0][0].disc
    m = [list(r) + [QuadInt(int(i == j), 0, disc) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        p = next((i for i in range(c, n) if not m[i][c].is_zero()), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for i in range(n):
            if i != c and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return tuple(tuple(_simplify(x) for x in row[n:]) for row in m)


def _simplify(x: QuadInt) -> QuadInt:
    a, b = x.a, x.b
    if isinstance(a, Fraction) and a.denominator == 1:
        a = int(a)
    if isinstance(b, Fraction) and b.denominator == 1:
        b = int(b)
    return QuadInt(a, b, x.disc)


def qsimplify(A):
    return tuple(tuple(_simplify(x) for x in r) for r in A)


def is_integral_matrix(A) -> bool:
    return all(x.is_integral() for r in A for x in r)
