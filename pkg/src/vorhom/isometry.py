"""Backtracking search for elements g of GL_n(R) carrying one finite vector
configuration onto another while preserving a Hermitian Gram matrix.

Both perfect-form equivalence (Gram = the form, vectors = minimal vectors)
and cell equivalence (Gram = adjugate of the barycenter, vectors = support)
reduce to this.  Vectors are flat int tuples, unit normalized.
"""
from __future__ import annotations

from collections import Counter
from typing import Sequence

from . import linalg
from .ring import QuadInt, Ring, conj_pair, mul_pair, norm_pair, normalize_flat, unflatten


def _matvec_pairs(disc, M, flat):
    """M w for an integral Hermitian matrix M (QuadInt) and flat vector w."""
    n = len(M)
    out = []
    for j in range(n):
        a = b = 0
        for k in range(n):
            x = M[j][k]
            pa, pb = mul_pair(disc, x.a, x.b, flat[2 * k], flat[2 * k + 1])
            a += pa
            b += pb
        out.append((a, b))
    return out


def herm_products(disc: int, M, vecs: Sequence[tuple]) -> list[list[tuple]]:
    """Matrix of v_i* M v_j as (a, b) pairs."""
    Mv = [_matvec_pairs(disc, M, w) for w in vecs]
    out = []
    for v in vecs:
        conj_v = [conj_pair(disc, v[2 * j], v[2 * j + 1]) for j in range(len(v) // 2)]
        row = []
        for mw in Mv:
            a = b = 0
            for (ca, cb), (ma, mb) in zip(conj_v, mw):
                pa, pb = mul_pair(disc, ca, cb, ma, mb)
                a += pa
                b += pb
            row.append((a, b))
        out.append(row)
    return out


def fingerprints(disc: int, prods) -> list[tuple]:
    """Unit-invariant per-vector fingerprint: own value plus sorted norms of
    products with all vectors."""
    out = []
    for i, row in enumerate(prods):
        norms = sorted(norm_pair(disc, a, b) for a, b in row)
        out.append((row[i][0], tuple(norms)))
    return out


def config_key(disc: int, prods) -> tuple:
    return tuple(sorted(Counter(fingerprints(disc, prods)).items()))


def _independent_basis(vecs, order, n, disc) -> list[int]:
    """Greedily choose n F-linearly independent vectors following ``order``."""
    chosen: list[int] = []
    rows: list = []
    for i in order:
        # realify: F-independence of complex vectors == R-independence of
        # {v, w v}; use the rank of realified rows
        v = vecs[i]
        wv = tuple(x for j in range(n) for x in mul_pair(disc, 0, 1, v[2 * j], v[2 * j + 1]))
        if linalg.rank(rows + [list(v), list(wv)]) == len(rows) + 2:
            rows += [list(v), list(wv)]
            chosen.append(i)
            if len(chosen) == n:
                break
    return chosen


class Configuration:
    """Vectors plus Gram matrix, with precomputed products and fingerprints."""

    def __init__(self, ring: Ring, gram, vecs: Sequence[tuple]):
        self.ring = ring
        self.gram = gram
        self.vecs = list(vecs)
        self.n = len(gram)
        self.prods = herm_products(ring.disc, gram, self.vecs)
        self.fps = fingerprints(ring.disc, self.prods)
        self.index = {v: i for i, v in enumerate(self.vecs)}

    def key(self):
        return tuple(sorted(Counter(self.fps).items()))


def search(src: Configuration, dst: Configuration, first_only: bool = True,
           mod_scalars: bool = False, limit: int | None = None):
    """Elements g of GL_n(R) with g(src vectors) = dst vectors up to units and
    (g v)* dst.gram (g w) = v* src.gram w.

    Yields (g, perm) with perm[i] = (index into dst.vecs, unit pair) such that
    g v_i = unit * dst_vec.  With ``mod_scalars`` only one element per coset of
    the scalar unit matrices is produced.
    """
    ring = src.ring
    disc = ring.disc
    n = src.n
    if len(src.vecs) != len(dst.vecs) or sorted(src.fps) != sorted(dst.fps):
        return
    counts = Counter(src.fps)
    order = sorted(range(len(src.vecs)), key=lambda i: (counts[src.fps[i]], i))
    basis = _independent_basis(src.vecs, order, n, disc)
    if len(basis) < n:
        raise ValueError("vector configuration does not span")
    Bmat = tuple(tuple(unflatten(src.vecs[b], disc)[r] for b in basis) for r in range(n))
    Binv = linalg.qinverse(Bmat)
    units = ring.unit_pairs

    by_fp: dict = {}
    for s, fp in enumerate(dst.fps):
        by_fp.setdefault(fp, []).append(s)

    chosen: list[tuple[int, tuple]] = []
    found = 0

    def leaf():
        cols = []
        for s, u in chosen:
            w = dst.vecs[s]
            cols.append([QuadInt(*mul_pair(disc, u[0], u[1], w[2 * r], w[2 * r + 1]), disc)
                         for r in range(n)])
        C = tuple(tuple(cols[c][r] for c in range(len(cols))) for r in range(n))
        g = linalg.qsimplify(linalg.qmatmul(C, Binv))
        if not linalg.is_integral_matrix(g):
            return None
        if not ring.is_unit(linalg.qdet(g)):
            return None
        perm = []
        seen = set()
        for v in src.vecs:
            img = []
            for r in range(n):
                a = b = 0
                for k in range(n):
                    x = g[r][k]
                    pa, pb = mul_pair(disc, x.a, x.b, v[2 * k], v[2 * k + 1])
                    a += pa
                    b += pb
                img += [a, b]
            img = tuple(img)
            nf = normalize_flat(ring, img)
            t = dst.index.get(nf)
            if t is None or t in seen:
                return None
            seen.add(t)
            # unit u with img = u * nf
            for u in units:
                if tuple(x for j in range(n) for x in mul_pair(disc, u[0], u[1], nf[2 * j], nf[2 * j + 1])) == img:
                    perm.append((t, u))
                    break
        return g, perm

    def rec(level):
        nonlocal found
        if level == n:
            res = leaf()
            if res is not None:
                found += 1
                yield res
            return
        b = basis[level]
        for s in by_fp.get(src.fps[b], ()):
            unit_choices = units[:1] if (mod_scalars and level == 0) else units
            for u in unit_choices:
                ok = True
                for l, (sl, ul) in enumerate(chosen):
                    # (ul w_l)* M (u w_s) = conj(ul) u <w_l, w_s>
                    pa, pb = dst.prods[sl][s]
                    cu = conj_pair(disc, ul[0], ul[1])
                    fa, fb = mul_pair(disc, cu[0], cu[1], u[0], u[1])
                    if mul_pair(disc, fa, fb, pa, pb) != src.prods[basis[l]][b]:
                        ok = False
                        break
                if not ok:
                    continue
                if level == 0 and dst.prods[s][s] != src.prods[b][b]:
                    continue
                chosen.append((s, u))
                yield from rec(level + 1)
                chosen.pop()
                if first_only and found:
                    return
                if limit is not None and found >= limit:
                    return

    yield from rec(0)


def find_one(src: Configuration, dst: Configuration):
    for res in search(src, dst, first_only=True, mod_scalars=True):
        return res
    return None


def find_all(src: Configuration, dst: Configuration):
    """All solutions; scalar unit multiples included."""
    ring = src.ring
    disc = ring.disc
    out = []
    for g, perm in search(src, dst, first_only=False, mod_scalars=True):
        for u in ring.unit_pairs:
            uq = QuadInt(u[0], u[1], disc)
            ug = tuple(tuple(uq * x for x in row) for row in g)
            uperm = [(t, mul_pair(disc, u[0], u[1], w[0], w[1])) for t, w in perm]
            out.append((ug, uperm))
    return out
