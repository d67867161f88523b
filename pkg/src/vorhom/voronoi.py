"""Voronoi reduction theory for GL_n over Z[i] and Z[rho].

Perfect forms are enumerated by walking across the facets of their cones of
rank-one forms.  The faces of those cones that meet the positive definite
cone, taken up to GL_n(R), are the cells of the Voronoi complex; a cell is
recorded by its support (the minimal vectors whose rank-one forms lie on
it), and its projective dimension is rank(span) - 1.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement
from typing import Sequence

from . import isometry, linalg
from .forms import (HermForm, MinVecSet, functional_to_coords, herm_from_coords,
                    is_positive_definite, min_and_vectors, minimal_vectors,
                    pairing_vector, perfection_rank, q_flat, realify_coords)
from .grouptheory import FiniteMatrixGroup, abelianization, orientation_preserving_subgroup
from .homology import ChainComplexError, SparseIntMatrix
from .polyhedra import RationalCone
from .ring import Ring, get_ring, mul_pair, normalize_flat, norm_pair, unflatten

log = logging.getLogger(__name__)


class ResourceLimitExceeded(RuntimeError):
    """Raised with whatever was completed before the limit was hit."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# -- walking in the space of forms ---------------------------------------------

def _value2(disc, n, coords, flat):
    """Doubled Hermitian value of a flat vector under the form with these coordinates."""
    return 2 * linalg.dot(pairing_vector(disc, n, coords), q_flat(disc, flat))


def _is_psd(G) -> bool:
    m = len(G)
    for size in range(1, m + 1):
        for idx in _subsets(m, size):
            if linalg.det([[G[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def _subsets(m, size):
    from itertools import combinations
    return combinations(range(m), size)


def _walk(ring: Ring, n: int, coords, direction, m2, old: set):
    """Smallest t > 0 such that coords + t*direction has the same minimum m2
    (doubled) and a minimal vector outside ``old``.  Returns the new coordinates."""
    disc = ring.disc

    def at(t):
        return [a + t * f for a, f in zip(coords, direction)]

    lo, hi = Fraction(0), Fraction(1)
    while True:
        G = realify_coords(disc, n, at(hi))
        if not is_positive_definite(G):
            hi = (lo + hi) / 2
            continue
        mval, vecs = min_and_vectors(G, bound=m2)
        if mval == m2:
            if any(normalize_flat(ring, v) not in old for v in vecs):
                return at(hi)
            lo, hi = hi, 2 * hi
            continue
        break
    # hi overshoots: some vector dropped below m2; step back to where it hits m2
    while True:
        G = realify_coords(disc, n, at(hi))
        mval, vecs = min_and_vectors(G, bound=m2)
        if mval == m2:
            return at(hi)
        v = vecs[0]
        av = _value2(disc, n, coords, v)
        fv = _value2(disc, n, direction, v)
        if fv >= 0:
            raise ArithmeticError("ray search diverged: direction is not a facet direction")
        hi = Fraction(av - m2) / (-fv)


def voronoi_ascent(A: HermForm) -> HermForm:
    """Walk from A to a perfect form, adding minimal vectors at each step."""
    ring, n = A.ring, A.n
    disc = ring.disc
    coords = list(A.coords)
    m2 = 2 * minimal_vectors(A).min_value
    flats = list(minimal_vectors(A).flats)
    while True:
        qs = [q_flat(disc, f) for f in flats]
        if linalg.rank(qs) == n * n:
            return HermForm.from_coords(ring, n, coords)
        w = linalg.primitive(linalg.nullspace(qs, n * n)[0])
        direction = functional_to_coords(disc, n, w)
        if _is_psd(realify_coords(disc, n, direction)):
            direction = [-x for x in direction]
        old = {normalize_flat(ring, f) for f in flats}
        coords = _walk(ring, n, coords, direction, m2, old)
        G = realify_coords(disc, n, coords)
        _, vecs = min_and_vectors(G, bound=m2)
        flats = sorted({normalize_flat(ring, v) for v in vecs})


def invariant_key(A: HermForm) -> tuple:
    """Equivalence invariant: (det of the realification, minimum, number of
    minimal vectors, multiset of norms of Hermitian products between them)."""
    A = A.primitive()
    mv = minimal_vectors(A)
    flats = mv.flats
    prods = isometry.herm_products(A.ring.disc, A.entries, flats)
    norms = Counter()
    for i in range(len(flats)):
        for j in range(i, len(flats)):
            a, b = prods[i][j]
            norms[norm_pair(A.ring.disc, a, b)] += 1
    return (int(linalg.det(A.gram)), mv.min_value, mv.full_count, tuple(sorted(norms.items())))


def _form_config(A: HermForm) -> isometry.Configuration:
    return isometry.Configuration(A.ring, A.entries, minimal_vectors(A).flats)


def is_equivalent(A: HermForm, B: HermForm):
    """T in GL_n(R) with T* A T = B (up to scale), or None."""
    if A.ring != B.ring or A.n != B.n:
        return None
    A, B = A.primitive(), B.primitive()
    if invariant_key(A) != invariant_key(B):
        return None
    res = isometry.find_one(_form_config(B), _form_config(A))
    if res is None:
        return None
    T = res[0]
    if A.transform(T).entries != B.entries:
        raise AssertionError("isometry search returned an invalid transporter")
    return T


# -- perfect forms --------------------------------------------------------------

@dataclass
class PerfectFormClass:
    representative: HermForm
    min_vec_orbits: MinVecSet
    invariant_key: tuple
    neighbor_ids: list = field(default_factory=list)
    facet_orbits: list | None = None  # support indices of one facet per Aut-orbit

    @cached_property
    def cone(self) -> RationalCone:
        disc = self.representative.ring.disc
        return RationalCone([q_flat(disc, f) for f in self.min_vec_orbits.flats],
                            self.representative.n ** 2)

    @cached_property
    def automorphisms(self) -> list:
        """All (g, perm) with g an automorphism of the form."""
        cfg = _form_config(self.representative)
        return isometry.find_all(cfg, cfg)

    def to_json(self) -> dict:
        rep = self.representative
        return {
            "form": rep.to_json(),
            "min_value": self.min_vec_orbits.min_value,
            "min_vectors": [[[int(x.a), int(x.b)] for x in v] for v in self.min_vec_orbits.vectors],
            "full_count": self.min_vec_orbits.full_count,
            "automorphism_group_order": len(self.automorphisms),
            "neighbors": self.neighbor_ids,
            "facet_orbits": [list(idx) for idx in self.facet_orbits or ()],
        }


def make_perfect_class(A: HermForm) -> PerfectFormClass:
    A = A.primitive()
    mv = minimal_vectors(A)
    scaled = HermForm(A.ring, A.entries, Fraction(1, mv.min_value))
    return PerfectFormClass(scaled, mv, invariant_key(A))


def neighbor(P: PerfectFormClass, facet_normal) -> HermForm:
    """The perfect form on the other side of the given facet of P's cone."""
    A = P.representative
    ring, n = A.ring, A.n
    direction = functional_to_coords(ring.disc, n, facet_normal)
    old = set(P.min_vec_orbits.flats)
    m2 = 2 * P.min_vec_orbits.min_value
    coords = _walk(ring, n, list(A.coords), direction, m2, old)
    return HermForm.from_coords(ring, n, coords)


def _facet_orbits(P: PerfectFormClass, facets):
    """Representatives of facet orbits under the automorphism group."""
    seen = set()
    reps = []
    for normal, idx in facets:
        key = frozenset(idx)
        if key in seen:
            continue
        reps.append((normal, idx))
        for _, perm in P.automorphisms:
            seen.add(frozenset(perm[i][0] for i in idx))
    return reps


def enumerate_perfect_forms(ring, n: int, reverse_facets: bool = False,
                            max_classes: int | None = None) -> list[PerfectFormClass]:
    """All GL_n(R)-classes of perfect forms, by breadth-first neighbor walk."""
    ring = get_ring(ring)
    if n > 4:
        raise ValueError("rank > 4 is not supported")
    seed = voronoi_ascent(HermForm.identity(ring, n))
    classes = [make_perfect_class(seed)]
    k = 0
    while k < len(classes):
        P = classes[k]
        facets = P.cone.facets()
        if reverse_facets:
            facets = facets[::-1]
        orbits = _facet_orbits(P, facets)
        P.facet_orbits = [tuple(idx) for _, idx in orbits]
        for normal, idx in orbits:
            N = neighbor(P, normal)
            key = invariant_key(N)
            hit = None
            for j, Q in enumerate(classes):
                if Q.invariant_key == key and is_equivalent(Q.representative, N) is not None:
                    hit = j
                    break
            if hit is None:
                if max_classes is not None and len(classes) >= max_classes:
                    raise ResourceLimitExceeded("too many perfect form classes", classes)
                classes.append(make_perfect_class(N))
                hit = len(classes) - 1
                log.info("perfect form class %d found (%d minimal vector orbits)", hit,
                         len(classes[-1].min_vec_orbits.vectors))
            if hit not in P.neighbor_ids:
                P.neighbor_ids.append(hit)
        k += 1
    order = sorted(range(len(classes)), key=lambda i: classes[i].invariant_key)
    new_id = {old: new for new, old in enumerate(order)}
    out = []
    for old in order:
        P = classes[old]
        P.neighbor_ids = sorted(new_id[j] for j in P.neighbor_ids)
        out.append(P)
    return out


# -- cells --------------------------------------------------------------------------

def barycenter(disc: int, n: int, support) -> list:
    coords = [0] * (n * n)
    for f in support:
        for k, x in enumerate(q_flat(disc, f)):
            coords[k] += x
    return coords


def meets_interior(ring, n: int, support) -> bool:
    """True iff the sum of the rank-one forms of the support is positive definite."""
    ring = get_ring(ring)
    if not support:
        raise ValueError("empty support")
    return is_positive_definite(realify_coords(ring.disc, n, barycenter(ring.disc, n, support)))


def _adjugate(M):
    inv = linalg.qinverse(M)
    d = linalg.qdet(M)
    return linalg.qsimplify(tuple(tuple(d * x for x in row) for row in inv))


def _apply(disc, g, flat):
    n = len(g)
    out = []
    for r in range(n):
        a = b = 0
        for k in range(n):
            x = g[r][k]
            pa, pb = mul_pair(disc, x.a, x.b, flat[2 * k], flat[2 * k + 1])
            a += pa
            b += pb
        out += [a, b]
    return tuple(out)


class CellClass:
    """A Voronoi cell given by its support of unit-normalized minimal vectors."""

    def __init__(self, ring: Ring, n: int, support: Sequence[tuple]):
        self.ring = ring
        self.n = n
        self.support = tuple(sorted(support))
        self.qvecs = [q_flat(ring.disc, f) for f in self.support]
        self.chart = linalg.SpanChart(self.qvecs)
        self.dim = self.chart.dim - 1
        self.stabilizer: FiniteMatrixGroup | None = None
        self.orientable: bool | None = None
        self.meets_interior = True
        self._perm_of: dict = {}

    @cached_property
    def config(self) -> isometry.Configuration:
        bary = herm_from_coords(self.ring.disc, self.n, barycenter(self.ring.disc, self.n, self.support))
        return isometry.Configuration(self.ring, _adjugate(bary), self.support)

    @cached_property
    def key(self) -> tuple:
        return (len(self.support), self.config.key())

    @property
    def stabilizer_order(self) -> int:
        return self.stabilizer.order if self.stabilizer is not None else 0

    def compute_stabilizer(self):
        sols = isometry.find_all(self.config, self.config)
        elems = []
        for g, perm in sols:
            elems.append(g)
            self._perm_of[_gkey(g)] = [t for t, _ in perm]
        self.stabilizer = FiniteMatrixGroup.from_elements(self.ring, self.n, elems)
        self.orientable = all(self.orientation_character(g) == 1 for g in self.stabilizer.generators)

    def orientation_character(self, g) -> int:
        """Sign of det of g acting on the span of the cell (g must stabilize it)."""
        disc = self.ring.disc
        perm = self._perm_of.get(_gkey(g))
        cols = []
        for b in self.chart.basis_index:
            if perm is not None:
                q = self.qvecs[perm[b]]
            else:
                img = normalize_flat(self.ring, _apply(disc, g, self.support[b]))
                if img not in self.config.index:
                    raise ValueError("element does not stabilize the cell")
                q = q_flat(disc, img)
            cols.append(self.chart.coords(q))
        return linalg.det_sign(cols)

    def orientation_preserving_subgroup(self) -> FiniteMatrixGroup:
        return orientation_preserving_subgroup(self.stabilizer, self.orientation_character, homomorphism=True)

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "support": [[[a, b] for a, b in zip(f[::2], f[1::2])] for f in self.support],
            "stabilizer_order": self.stabilizer_order,
            "orientable": self.orientable,
            "meets_interior": self.meets_interior,
        }
        # orientation kernel and its abelianization (H_1 with twisted coefficients up to 2-groups)
        if self.stabilizer is not None:
            sub = self.orientation_preserving_subgroup()
            out["orientation_preserving_order"] = sub.order
            out["orientation_preserving_abelianization"] = list(abelianization(sub).torsion)
        return out


def _gkey(g):
    return tuple((x.a, x.b) for row in g for x in row)


def orientation_character(cell: CellClass, g) -> int:
    return cell.orientation_character(g)


def is_orientable(cell: CellClass) -> bool:
    if cell.stabilizer is None:
        cell.compute_stabilizer()
    return cell.orientable


def transporter_sign(face: CellClass, rep: CellClass, g) -> int:
    """Sign of g: span(face) -> span(rep) w.r.t. the two lexicographic orientations."""
    disc = face.ring.disc
    cols = []
    for b in face.chart.basis_index:
        img = normalize_flat(face.ring, _apply(disc, g, face.support[b]))
        cols.append(rep.chart.coords(q_flat(disc, img)))
    return linalg.det_sign(cols)


def incidence_sign(cell: CellClass, face: CellClass) -> int:
    """Orientation induced on a facet: sign of det(w, c_1..c_d) in the cell's
    basis, w a generator of the cell off the facet and c the facet basis."""
    on_face = set(face.support)
    w = next(q for f, q in zip(cell.support, cell.qvecs) if f not in on_face)
    cols = [cell.chart.coords(w)] + [cell.chart.coords(face.qvecs[b]) for b in face.chart.basis_index]
    return linalg.det_sign(cols)


@dataclass
class Incidence:
    cell: int  # index in level d
    face: int  # class index in level d-1
    sign: int  # incidence sign times transporter sign, for the orbit representative
    count: int = 1  # facets in the stabilizer orbit


@dataclass
class VoronoiChainComplex:
    ring: Ring
    n: int
    levels: dict  # d -> list[CellClass]
    incidences: dict  # d -> list[Incidence] (from level d to d-1)
    perfect_forms: list = field(default_factory=list)
    discarded: dict = field(default_factory=dict)  # d -> number of boundary facets dropped
    complete: bool = True

    @property
    def top(self) -> int:
        return self.n * self.n - 1

    def orientable_index(self, d: int) -> dict:
        """class index -> basis position among orientable classes of level d."""
        out = {}
        for i, c in enumerate(self.levels.get(d, [])):
            if c.orientable:
                out[i] = len(out)
        return out

    def sizes(self) -> dict:
        return {d: len(self.orientable_index(d)) for d in self.levels}

    def counts(self) -> dict:
        """d -> (|Sigma_d*|, |Sigma_d|)."""
        return {d: (len(cells), sum(1 for c in cells if c.orientable))
                for d, cells in sorted(self.levels.items())}

    @cached_property
    def boundary(self) -> dict:
        return boundary_matrices(self)


def _orbit(idx, gen_perms) -> set:
    start = frozenset(idx)
    seen, stack = {start}, [start]
    while stack:
        s = stack.pop()
        for p in gen_perms:
            t = frozenset(p[i] for i in s)
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def facet_orbits(cell: CellClass, facet_supports=None) -> list[tuple[tuple, int]]:
    """(support indices, orbit size) for one facet per Stab(cell)-orbit.

    ``facet_supports`` may already be orbit representatives (as stored for
    perfect forms); otherwise all facets are enumerated.
    """
    gens = [cell._perm_of[_gkey(g)] for g in cell.stabilizer.generators]
    if facet_supports is None:
        facet_supports = [idx for _, idx in RationalCone(cell.qvecs, cell.n * cell.n).facets()]
    seen: set = set()
    out = []
    for idx in facet_supports:
        key = frozenset(idx)
        if key in seen:
            continue
        orb = _orbit(idx, gens)
        seen |= orb
        out.append((tuple(sorted(idx)), len(orb)))
    return out


def _classify(face: CellClass, reps: list[CellClass], by_key: dict):
    for j in by_key.get(face.key, ()):
        res = isometry.find_one(face.config, reps[j].config)
        if res is not None:
            return j, res[0]
    return None, None


def build_cell_complex(ring, n: int, max_dim: int | None = None, perfect_forms=None,
                       progress=None) -> VoronoiChainComplex:
    """Cells of all dimensions, top-down from the perfect cones.

    With ``max_dim`` only the levels top, top-1, ..., top-max_dim are built
    (the incidences from the lowest built level downward are not computed).
    """
    ring = get_ring(ring)
    if perfect_forms is None:
        perfect_forms = enumerate_perfect_forms(ring, n)
    top = n * n - 1
    bottom = n - 1 if max_dim is None else max(n - 1, top - max_dim)
    levels = {top: [CellClass(ring, n, P.min_vec_orbits.flats) for P in perfect_forms]}
    for c in levels[top]:
        c.compute_stabilizer()
    incidences = {}
    discarded = {}
    cx = VoronoiChainComplex(ring, n, levels, incidences, perfect_forms, discarded)
    for d in range(top, n - 1, -1):
        if d - 1 < bottom:
            break
        reps: list[CellClass] = []
        by_key: dict = {}
        inc = []
        dropped = 0
        for i, cell in enumerate(levels[d]):
            # faces in one Stab(cell)-orbit are equivalent, and for an orientable
            # cell each contributes the same signed coefficient
            known = perfect_forms[i].facet_orbits if d == top else None
            for idx, count in facet_orbits(cell, known):
                sub = [cell.support[k] for k in idx]
                if not meets_interior(ring, n, sub):
                    dropped += count
                    continue
                face = CellClass(ring, n, sub)
                if face.dim != d - 1:
                    raise ChainComplexError(f"facet of a {d}-cell has dimension {face.dim}")
                j, g = _classify(face, reps, by_key)
                if j is None:
                    reps.append(face)
                    by_key.setdefault(face.key, []).append(len(reps) - 1)
                    j, sgn = len(reps) - 1, 1
                else:
                    sgn = transporter_sign(face, reps[j], g)
                inc.append(Incidence(i, j, incidence_sign(cell, face) * sgn, count))
        if not reps:
            if d - 1 >= n - 1:
                raise ChainComplexError(f"no interior cells in dimension {d - 1}")
            break
        for c in reps:
            c.compute_stabilizer()
        levels[d - 1] = reps
        incidences[d] = inc
        discarded[d] = dropped
        if progress:
            progress(d - 1, reps)
        log.info("level %d: %d classes (%d orientable)", d - 1, len(reps),
                 sum(c.orientable for c in reps))
    low = min(levels)
    if max_dim is None and low != n - 1:
        raise ChainComplexError(f"lowest level is {low}, expected {n - 1}")
    if max_dim is None:
        # everything below n-1 must be empty: facets of bottom cells miss the interior
        for cell in levels[n - 1]:
            for _, idx in RationalCone(cell.qvecs, n * n).facets():
                if meets_interior(ring, n, [cell.support[k] for k in idx]):
                    raise ChainComplexError("interior cell below dimension n-1")
    return cx


def boundary_matrices(cx: VoronoiChainComplex) -> dict:
    """d -> SparseIntMatrix of the differential from orientable d-cells to
    orientable (d-1)-cells.  Verifies that consecutive differentials compose to 0."""
    out = {}
    for d in sorted(cx.levels):
        if d - 1 not in cx.levels:
            continue
        cols = cx.orientable_index(d)
        rows = cx.orientable_index(d - 1)
        trip = []
        for inc in cx.incidences.get(d, []):
            if inc.cell in cols and inc.face in rows:
                trip.append((rows[inc.face], cols[inc.cell], inc.sign * inc.count))
        out[d] = SparseIntMatrix(len(rows), len(cols), trip)
    for d in out:
        if d - 1 in out:
            prod = out[d - 1] @ out[d]
            if not prod.is_zero():
                raise ChainComplexError(f"boundary does not square to zero between degrees {d} and {d - 2}")
    return out
