import pytest
from hypothesis import given, strategies as st

from vorhom.ring import (EISENSTEIN, GAUSSIAN, INERT, RAMIFIED, SPLIT, elements_of_norm,
                         get_ring, prime_factors, splitting_type, unit_normalize)

small = st.integers(-50, 50)
rings = st.sampled_from([GAUSSIAN, EISENSTEIN])


@given(rings, small, small, small, small)
def test_norm_multiplicative(R, a, b, c, d):
    x, y = R(a, b), R(c, d)
    assert (x * y).norm() == x.norm() * y.norm()


@given(rings, small, small)
def test_norm_is_x_times_conj(R, a, b):
    x = R(a, b)
    p = x * x.conj()
    assert p.b == 0 and p.a == x.norm()


def test_omega_relations():
    i = GAUSSIAN.omega
    assert i * i == GAUSSIAN(-1)
    r = EISENSTEIN.omega
    # rho^2 = rho - 1 and rho^6 = 1
    assert r * r == r - 1
    p = EISENSTEIN.one
    for _ in range(6):
        p = p * r
    assert p == EISENSTEIN.one


def test_units():
    assert len(GAUSSIAN.units) == 4
    assert len(EISENSTEIN.units) == 6
    for R in (GAUSSIAN, EISENSTEIN):
        assert all(R.is_unit(u) for u in R.units)
        assert not R.is_unit(R(1, 1))


def test_unit_normalize_examples():
    R = GAUSSIAN
    # i*(1, 0) -> (0+1i, 0); the representative is the lexicographically smallest
    v = (R(0, 1), R(0, 0))
    assert unit_normalize(v) == (R(-1, 0), R(0, 0))
    v = (R(0, 0), R(2, 3))
    assert unit_normalize(v) == (R(0, 0), R(-3, 2))


@given(rings, small, small, small, small)
def test_unit_normalize_is_orbit_invariant(R, a, b, c, d):
    v = (R(a, b), R(c, d))
    if a == b == c == d == 0:
        with pytest.raises(ValueError):
            unit_normalize(v)
        return
    rep = unit_normalize(v)
    assert unit_normalize(rep) == rep
    for u in R.units:
        assert unit_normalize(tuple(u * x for x in v)) == rep


def _brute_splitting(R, p):
    # p splits or ramifies iff some element has norm p
    if not any(True for _ in elements_of_norm(R, p)):
        return INERT
    return RAMIFIED if (-R.disc) % p == 0 else SPLIT


@pytest.mark.parametrize("R", [GAUSSIAN, EISENSTEIN])
def test_splitting_type_matches_brute_force(R):
    for p in range(2, 100):
        if prime_factors(p) == {p}:
            assert splitting_type(R, p) == _brute_splitting(R, p), p


@pytest.mark.parametrize("R,p,want", [
    (GAUSSIAN, 2, RAMIFIED), (GAUSSIAN, 3, INERT), (GAUSSIAN, 5, SPLIT),
    (EISENSTEIN, 2, INERT), (EISENSTEIN, 3, RAMIFIED), (EISENSTEIN, 7, SPLIT),
])
def test_splitting_type_examples(R, p, want):
    assert splitting_type(R, p) == want


def test_splitting_type_rejects_composite():
    with pytest.raises(ValueError):
        splitting_type(GAUSSIAN, 9)


def test_get_ring():
    assert get_ring("Gaussian") is GAUSSIAN
    assert get_ring(-3) is EISENSTEIN
    assert get_ring({"disc": -4}) is GAUSSIAN
    with pytest.raises(ValueError):
        get_ring("hurwitz")
    with pytest.raises(ValueError):
        get_ring(-7)


def test_division():
    R = EISENSTEIN
    x, y = R(3, 1), R(1, 1)
    q = (x * y) / y
    assert q == R(3, 1)
    with pytest.raises(ZeroDivisionError):
        x / R(0, 0)
