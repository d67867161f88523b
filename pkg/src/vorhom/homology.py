"""Integer linear algebra for chain complexes: Smith normal form, homology,
and finitely generated abelian groups modulo the Serre class S_{p<=k}
(finite groups whose order has only prime factors <= k)."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

from .ring import prime_factors


class ChainComplexError(ValueError):
    pass


# -- sparse matrices ------------------------------------------------------------

@dataclass
class SparseIntMatrix:
    rows: int
    cols: int
    triplets: list = field(default_factory=list)

    def __post_init__(self):
        acc: dict = {}
        for r, c, v in self.triplets:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            acc[(r, c)] = acc.get((r, c), 0) + v
        self.triplets = sorted((r, c, v) for (r, c), v in acc.items() if v)

    @classmethod
    def from_dense(cls, M: Sequence[Sequence[int]]) -> SparseIntMatrix:
        rows = len(M)
        cols = len(M[0]) if rows else 0
        if any(len(r) != cols for r in M):
            raise ValueError("rows have different lengths")
        return cls(rows, cols, [(i, j, v) for i, r in enumerate(M) for j, v in enumerate(r) if v])

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for r, c, v in self.triplets:
            out[r][c] = v
        return out

    def __matmul__(self, other: SparseIntMatrix) -> SparseIntMatrix:
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row: dict = {}
        for r, c, v in other.triplets:
            by_row.setdefault(r, []).append((c, v))
        acc: dict = {}
        for r, k, v in self.triplets:
            for c, w in by_row.get(k, ()):
                acc[(r, c)] = acc.get((r, c), 0) + v * w
        return SparseIntMatrix(self.rows, other.cols, [(r, c, v) for (r, c), v in acc.items()])

    def is_zero(self) -> bool:
        return not self.triplets

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "triplets": [list(t) for t in self.triplets]}

    @classmethod
    def from_json(cls, data) -> SparseIntMatrix:
        if isinstance(data, list):
            return cls.from_dense(data)
        return cls(data["rows"], data["cols"], [tuple(t) for t in data["triplets"]])


# -- Smith normal form ------------------------------------------------------------

def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _dense_snf(A: list[list[int]], transforms: bool = False):
    """Textbook SNF. Returns (divisors, U, V) with U A V = diag(divisors)."""
    A = [list(r) for r in A]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m) if transforms else None
    V = _identity(n) if transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if transforms:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        if transforms:
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        if transforms:
            U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for r in A:
            r[dst] += q * r[src]
        if transforms:
            for r in V:
                r[dst] += q * r[src]

    divisors = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        clean = False
            if not clean:
                # move the smallest leftover in row/column t to the pivot
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cand)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if transforms:
                U[t] = [-x for x in U[t]]
        divisors.append(A[t][t])
        t += 1
    return divisors, U, V


def _as_rows(M) -> tuple[int, int, list[dict]]:
    if isinstance(M, SparseIntMatrix):
        rows = [dict() for _ in range(M.rows)]
        for r, c, v in M.triplets:
            rows[r][c] = v
        return M.rows, M.cols, rows
    M = [list(r) for r in M]
    ncols = len(M[0]) if M else 0
    return len(M), ncols, [{j: v for j, v in enumerate(r) if v} for r in M]


def _eliminate_unit_pivots(rows: list[dict]) -> tuple[int, list[dict]]:
    """Markowitz-style elimination on +-1 pivots. Returns (number of unit
    pivots removed, remaining rows restricted to surviving columns)."""
    cols: dict = {}
    for i, r in enumerate(rows):
        for c in r:
            cols.setdefault(c, set()).add(i)
    alive = set(i for i, r in enumerate(rows) if r)
    count = 0
    while True:
        best = None
        for i in alive:
            r = rows[i]
            li = len(r) - 1
            for c, v in r.items():
                if v == 1 or v == -1:
                    cost = li * (len(cols[c]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, i, c)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pi, pc = best
        prow = rows[pi]
        pv = prow[pc]
        for i in list(cols[pc]):
            if i == pi:
                continue
            r = rows[i]
            f = r[pc] * pv  # pv = +-1 so pv^-1 = pv
            for c, v in prow.items():
                nv = r.get(c, 0) - f * v
                if nv:
                    if c not in r:
                        cols[c].add(i)
                    r[c] = nv
                else:
                    if c in r:
                        del r[c]
                        cols[c].discard(i)
            if not r:
                alive.discard(i)
        for c in prow:
            cols[c].discard(pi)
        rows[pi] = {}
        alive.discard(pi)
        count += 1
        # the pivot column is now empty apart from the removed row
        cols.pop(pc, None)
    rest = [rows[i] for i in sorted(alive)]
    return count, rest


def smith_normal_form(M, transforms: bool = False):
    """Nonzero elementary divisors d_1 | d_2 | ... of an integer matrix.

    With ``transforms=True`` returns (divisors, U, V), U and V unimodular with
    U M V = diag(divisors) (padded with zeros).
    """
    if transforms:
        if isinstance(M, SparseIntMatrix):
            M = M.to_dense()
        return _dense_snf(M, True)
    nrows, ncols, rows = _as_rows(M)
    ones, rest = _eliminate_unit_pivots(rows)
    if not rest:
        return [1] * ones
    used = sorted({c for r in rest for c in r})
    pos = {c: k for k, c in enumerate(used)}
    dense = [[0] * len(used) for _ in rest]
    for i, r in enumerate(rest):
        for c, v in r.items():
            dense[i][pos[c]] = v
    divs, _, _ = _dense_snf(dense)
    return [1] * ones + divs


def matrix_rank(M) -> int:
    return len(smith_normal_form(M))


# -- groups modulo Serre classes ----------------------------------------------

def _strip_small(d: int, k: int) -> int:
    for p in prime_factors(d):
        if p <= k:
            while d % p == 0:
                d //= p
    return d


def _chain(torsion: Iterable[int]) -> tuple[int, ...]:
    """Invariant-factor chain of a direct sum of cyclic groups."""
    primes: dict[int, list[int]] = {}
    for d in torsion:
        d = abs(d)
        if d in (0, 1):
            continue
        for p in prime_factors(d):
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            primes.setdefault(p, []).append(p ** e)
    if not primes:
        return ()
    length = max(len(v) for v in primes.values())
    chain = [1] * length
    for p, powers in primes.items():
        powers.sort()
        for k, q in enumerate(powers):
            chain[length - len(powers) + k] *= q
    return tuple(chain)


@dataclass(frozen=True)
class FGAbGroupModSerre:
    """Z^rank + torsion, with statements valid modulo S_{p<=serre_bound}.

    serre_bound = 1 means the group is known exactly.
    """
    rank: int = 0
    torsion: tuple = ()
    serre_bound: int = 1

    def __post_init__(self):
        object.__setattr__(self, "torsion", _chain(self.torsion))

    def reduce(self, k: int) -> FGAbGroupModSerre:
        return FGAbGroupModSerre(self.rank, tuple(_strip_small(d, k) for d in self.torsion),
                                 max(k, self.serre_bound))

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def is_Z(self) -> bool:
        return self.rank == 1 and not self.torsion

    @property
    def torsion_primes(self) -> set[int]:
        out = set()
        for d in self.torsion:
            out |= prime_factors(d)
        return out

    def __str__(self):
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        body = " + ".join(parts) if parts else "0"
        if self.serre_bound > 1:
            body += f" mod S_{{p<={self.serre_bound}}}"
        return body

    def to_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion), "serre_bound": self.serre_bound}

    @classmethod
    def from_json(cls, d) -> FGAbGroupModSerre:
        return cls(d["rank"], tuple(d.get("torsion", ())), d.get("serre_bound", 1))


ZERO = FGAbGroupModSerre()
Z = FGAbGroupModSerre(rank=1)


def serre_reduce(G: FGAbGroupModSerre, k: int) -> FGAbGroupModSerre:
    if k < 2:
        raise ValueError("Serre bound must be >= 2")
    return G.reduce(k)


def serre_equal(G: FGAbGroupModSerre, H: FGAbGroupModSerre, k: int) -> bool:
    a, b = serre_reduce(G, k), serre_reduce(H, k)
    return a.rank == b.rank and a.torsion == b.torsion


# -- homology of a chain complex ---------------------------------------------

@dataclass
class HomologyResult:
    n: int
    serre_bound: int
    exact: dict  # degree -> FGAbGroupModSerre (serre_bound 1)
    divisors: dict  # degree d -> elementary divisors of the boundary out of degree d

    @property
    def groups(self) -> dict:
        return {m: G.reduce(self.serre_bound) for m, G in self.exact.items()}

    def steinberg(self) -> dict:
        """H_{m-n+1}(GL_n, St_n) indexing of the reduced groups."""
        return {m - self.n + 1: G for m, G in self.groups.items()}

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "serre_bound": self.serre_bound,
            "voronoi": {str(m): G.to_json() for m, G in sorted(self.exact.items())},
            "steinberg": {str(m): G.to_json() for m, G in sorted(self.steinberg().items())},
            "divisors": {str(d): v for d, v in sorted(self.divisors.items())},
        }


def check_boundaries(sizes: Mapping[int, int], boundary: Mapping[int, SparseIntMatrix]):
    for d, B in boundary.items():
        if B.cols != sizes.get(d, 0) or B.rows != sizes.get(d - 1, 0):
            raise ChainComplexError(f"boundary in degree {d} has shape {B.rows}x{B.cols}")
        nxt = boundary.get(d - 1)
        if nxt is not None and nxt.cols and B.cols and nxt.rows:
            if not (nxt @ B).is_zero():
                raise ChainComplexError(f"boundary composite {d - 1}<-{d} is nonzero")


def homology_from_boundaries(n: int, sizes: Mapping[int, int], boundary: Mapping[int, SparseIntMatrix],
                             serre_bound: int = 1) -> HomologyResult:
    check_boundaries(sizes, boundary)
    divs = {d: smith_normal_form(B) if B.triplets else [] for d, B in boundary.items()}
    ranks = {d: len(v) for d, v in divs.items()}
    exact = {}
    for m, size in sizes.items():
        r = size - ranks.get(m, 0) - ranks.get(m + 1, 0)
        tors = [e for e in divs.get(m + 1, []) if e > 1]
        exact[m] = FGAbGroupModSerre(r, tuple(tors))
    return HomologyResult(n, serre_bound, exact, divs)


def homology_of_complex(cx) -> HomologyResult:
    """Homology of a VoronoiChainComplex, tagged with its torsion-prime bound."""
    return homology_from_boundaries(cx.n, cx.sizes(), cx.boundary, torsion_prime_bound(cx))


def torsion_prime_bound(cx) -> int:
    """Largest prime dividing the order of any cell stabilizer (at least 2)."""
    b = 2
    for cells in cx.levels.values():
        for cell in cells:
            ps = prime_factors(cell.stabilizer_order)
            if ps:
                b = max(b, max(ps))
    return b
