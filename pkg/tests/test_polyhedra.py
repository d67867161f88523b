import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from vorhom import linalg
from vorhom.polyhedra import RationalCone, dual_description, face_support


def brute_facets(gens):
    """Facet normals by trying every (dim-1)-subset of generators."""
    dim = len(gens[0])
    out = set()
    for sub in itertools.combinations(gens, dim - 1):
        if linalg.rank(sub) != dim - 1:
            continue
        w = linalg.primitive(linalg.nullspace(sub, dim)[0])
        vals = [linalg.dot(w, g) for g in gens]
        if all(v >= 0 for v in vals):
            out.add(tuple(w))
        elif all(v <= 0 for v in vals):
            out.add(tuple(-x for x in w))
    return sorted(out)


def test_orthant():
    assert sorted(dual_description([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_square_pyramid():
    gens = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1]]
    assert sorted(dual_description(gens)) == [(0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1)]


def test_face_support():
    c = RationalCone([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1]], 3)
    assert face_support(c, (1, 0, 1)) == [[0, 1, 0], [1, 1, -1]]
    with pytest.raises(ValueError):
        c.support_indices((1, -1, 0))


def test_lower_dimensional_cone():
    c = RationalCone([[1, 0, 0], [0, 1, 0]], 3)
    assert c.dim == 2 and not c.full
    assert len(c.facet_normals) == 2
    assert c.contains([1, 1, 0]) and not c.contains([1, 1, 1]) and not c.contains([-1, 1, 0])


def _random_cone(rng, dim, m):
    while True:
        gens = [[rng.randint(-3, 3) for _ in range(dim)] for _ in range(m)]
        # push into the half space x_0 > 0 so the cone is pointed
        gens = [[abs(g[0]) + 1] + g[1:] for g in gens]
        if linalg.rank(gens) == dim:
            return gens


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(2, 4), extra=st.integers(0, 5))
def test_facets_match_brute_force(seed, dim, extra):
    gens = _random_cone(random.Random(seed), dim, dim + extra)
    assert sorted(dual_description(gens)) == brute_facets(gens)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(2, 4), extra=st.integers(0, 5))
def test_facet_properties(seed, dim, extra):
    rng = random.Random(seed)
    gens = _random_cone(rng, dim, dim + extra)
    c = RationalCone(gens, dim)
    for nrm, idx in c.facets():
        assert linalg.rank([gens[i] for i in idx]) == dim - 1
    # nonnegative combinations are inside; the Farkas side: anything outside violates a facet
    for _ in range(20):
        coef = [rng.randint(0, 3) for _ in gens]
        p = [sum(a * g[k] for a, g in zip(coef, gens)) for k in range(dim)]
        assert c.contains(p)
        q = [rng.randint(-5, 5) for _ in range(dim)]
        assert c.contains(q) == all(linalg.dot(nrm, q) >= 0 for nrm in c.facet_normals)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(2, 4), extra=st.integers(0, 4))
def test_double_dual(seed, dim, extra):
    gens = _random_cone(random.Random(seed), dim, dim + extra)
    normals = dual_description(gens)
    back = {tuple(x) for x in dual_description(normals)}
    # a generator is extreme iff the facets through it cut out a line
    extreme = {tuple(linalg.primitive(g)) for g in gens
               if linalg.rank([w for w in normals if linalg.dot(w, g) == 0]) == dim - 1}
    assert back == extreme


def test_rank2_gaussian_perfect_cone(perfect):
    P = perfect[("gaussian", 2)][0]
    assert P.cone.dim == 4 and len(P.cone.facet_normals) == 8
    assert sorted(P.cone.facet_normals) == brute_facets([list(g) for g in P.cone.local])
