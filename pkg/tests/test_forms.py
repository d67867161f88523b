import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vorhom import linalg
from vorhom.checks import random_unimodular
from vorhom.forms import (HermForm, NotPositiveDefinite, evaluate, hermitian_product, is_perfect,
                          min_and_vectors, minimal_vectors, q_map, quad_value, realify, short_vectors)
from vorhom.ring import EISENSTEIN, GAUSSIAN, QuadInt

D4 = ((2, (1, 1)), ((1, -1), 2))


def brute_min(A: HermForm, box: int = 2):
    """Minimum and full minimal-vector count by scanning a coefficient box."""
    R = A.ring
    best, count = None, 0
    coeffs = range(-box, box + 1)
    for flat in itertools.product(coeffs, repeat=2 * A.n):
        if not any(flat):
            continue
        v = tuple(R(flat[2 * j], flat[2 * j + 1]) for j in range(A.n))
        val = evaluate(A, v)
        if best is None or val < best:
            best, count = val, 1
        elif val == best:
            count += 1
    return best, count


def test_evaluate_examples():
    A = HermForm.from_pairs(GAUSSIAN, D4)
    R = GAUSSIAN
    assert evaluate(A, (R(1), R(0))) == 2
    # (1, -1): 2 + 2 - 2 Re(1+i) = 2
    assert evaluate(A, (R(1), R(-1))) == 2
    assert evaluate(A, (R(1), R(1))) == 6
    with pytest.raises(ValueError):
        evaluate(A, (R(1),))


def test_realify_rank_one():
    assert realify(HermForm.identity(GAUSSIAN, 1)) == [[2, 0], [0, 2]]
    assert realify(HermForm.identity(EISENSTEIN, 1)) == [[2, 1], [1, 2]]


@pytest.mark.parametrize("R", [GAUSSIAN, EISENSTEIN])
def test_evaluate_matches_realification(R):
    rng = random.Random(1)
    A = HermForm.identity(R, 3).transform(random_unimodular(R, 3, rng, steps=3, bound=1))
    G = realify(A)
    for _ in range(50):
        flat = [rng.randint(-4, 4) for _ in range(6)]
        v = tuple(R(flat[2 * j], flat[2 * j + 1]) for j in range(3))
        assert 2 * evaluate(A, v) == quad_value(G, flat)
        assert hermitian_product(A.entries, v, v) == R(evaluate(A, v))


def test_q_map_examples():
    R = GAUSSIAN
    assert q_map((R(1), R(1))) == (1, 1, 1, 0)
    assert q_map((R(0, 1), R(1))) == (1, 1, 0, 1)
    assert q_map((R(1), R(0))) == (1, 0, 0, 0)


@pytest.mark.parametrize("R,full", [(GAUSSIAN, 8), (EISENSTEIN, 12)])
def test_identity_minimal_vectors(R, full):
    mv = minimal_vectors(HermForm.identity(R, 2))
    assert mv.min_value == 1 and mv.full_count == full
    assert is_perfect(HermForm.identity(R, 2)) == (False, 2)


def test_d4_form_is_perfect():
    A = HermForm.from_pairs(GAUSSIAN, D4)
    mv = minimal_vectors(A)
    assert (mv.min_value, mv.full_count, len(mv.vectors)) == (2, 24, 6)
    assert is_perfect(A) == (True, 4)


def test_a2_tensor_form_not_perfect():
    A = HermForm.from_pairs(EISENSTEIN, ((2, 1), (1, 2)))
    assert minimal_vectors(A).full_count == 18
    assert is_perfect(A) == (False, 3)


@pytest.mark.parametrize("R,rows", [
    (GAUSSIAN, D4), (GAUSSIAN, ((3, (1, 1)), ((1, -1), 2))),
    (EISENSTEIN, ((2, 1), (1, 2))), (EISENSTEIN, ((3, (0, 1)), ((1, -1), 2))),
])
def test_minimal_vectors_against_box_scan(R, rows):
    A = HermForm.from_pairs(R, rows)
    mv = minimal_vectors(A)
    assert brute_min(A) == (mv.min_value, mv.full_count)


@pytest.mark.parametrize("R", [GAUSSIAN, EISENSTEIN])
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_minimum_invariant_under_unimodular(R, seed):
    rng = random.Random(seed)
    A = HermForm.from_pairs(R, D4 if R is GAUSSIAN else ((2, 1), (1, 2)))
    B = A.transform(random_unimodular(R, 2, rng))
    a, b = minimal_vectors(A), minimal_vectors(B)
    assert (a.min_value, a.full_count) == (b.min_value, b.full_count)
    assert linalg.det(A.gram) == linalg.det(B.gram)


def test_short_vectors_counts_z2():
    # x^2 + y^2 <= 2 has 8 nonzero solutions; one of each +-pair is returned
    vecs = short_vectors([[1, 0], [0, 1]], 2)
    assert len(vecs) == 4 and len({v for v in vecs} | {tuple(-x for x in v) for v in vecs}) == 8
    m, vecs = min_and_vectors([[2, 1], [1, 2]])
    assert m == 2 and len(vecs) == 3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_lll_unimodular_and_congruent(seed):
    rng = random.Random(seed)
    A = HermForm.identity(GAUSSIAN, 2).transform(random_unimodular(GAUSSIAN, 2, rng, steps=6))
    G = A.gram
    U, R = linalg.lll_gram(G)
    assert abs(linalg.det(U)) == 1
    n = len(G)
    UtGU = [[sum(U[a][i] * G[a][b] * U[b][j] for a in range(n) for b in range(n))
             for j in range(n)] for i in range(n)]
    assert UtGU == R
    # Lovasz with delta 3/4 implies b_1^2 <= 2^(n-1) * lambda_1^2
    m, _ = min_and_vectors(G)
    assert R[0][0] <= 2 ** (n - 1) * m


def test_not_positive_definite_rejected():
    with pytest.raises(NotPositiveDefinite):
        HermForm.from_pairs(GAUSSIAN, ((1, 2), (2, 1)))
    with pytest.raises(ValueError):
        HermForm.from_pairs(GAUSSIAN, ((1, (0, 1)), ((0, 1), 1)))


def test_json_round_trip():
    A = HermForm.from_pairs(EISENSTEIN, ((3, (0, 1)), ((1, -1), 2)), scale=Fraction(1, 2))
    B = HermForm.from_json(A.to_json())
    assert B == A and B.scale == A.scale


def test_transform_by_unit_scalar_is_identity():
    i = QuadInt(0, 1, -4)
    T = ((i, QuadInt(0, 0, -4)), (QuadInt(0, 0, -4), i))
    A = HermForm.from_pairs(GAUSSIAN, D4)
    assert A.transform(T) == A
