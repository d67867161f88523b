"""Acceptance gate.

Tier 1 (criteria 1-8) must pass within ten minutes on a desk machine.
Criterion 9 is the rank-4 run; it takes about an hour and only executes with
VORHOM_EXTENDED=1, printing progress as levels complete.

Expected values are written out here rather than read from the bundled data
file so the two cannot drift together.
"""
import os
import random
import time

import pytest

from oracles import textbook_snf
from vorhom import linalg
from vorhom.homology import SparseIntMatrix, smith_normal_form
from vorhom.ktheory import bq, facts_from_paper_values, k4_report
from vorhom.ring import QuadInt, get_ring, prime_factors
from vorhom.voronoi import invariant_key, is_equivalent

RESULTS: list[str] = []
T0 = time.time()

PERFECT = {("gaussian", 2): 1, ("eisenstein", 2): 1, ("gaussian", 3): 1, ("eisenstein", 3): 2}
CELLS = {
    ("gaussian", 2): ((1, 1, 1), (0, 0, 1)),
    ("eisenstein", 2): ((1, 1, 1), (0, 0, 1)),
    ("gaussian", 3): ((2, 3, 4, 5, 3, 1, 1), (0, 0, 1, 4, 3, 0, 1)),
    ("eisenstein", 3): ((1, 2, 3, 4, 3, 2, 2), (0, 0, 1, 2, 1, 1, 2)),
}


def report(k: int, ok: bool, detail: str):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail} [{time.time() - T0:.1f}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_perfect_form_counts(perfect):
    got = {key: len(v) for key, v in perfect.items()}
    report(1, got == PERFECT, str({f"{r}/{n}": k for (r, n), k in sorted(got.items())}))


def test_criterion_2_cell_tables(complexes):
    bad, rows = [], []
    for key, (want_all, want_or) in CELLS.items():
        n = key[1]
        counts = complexes[key].counts()
        ds = range(n - 1, n * n)
        got_all = tuple(counts.get(d, (0, 0))[0] for d in ds)
        got_or = tuple(counts.get(d, (0, 0))[1] for d in ds)
        rows.append(f"{key[0]} n={n} {got_all}/{got_or}")
        if (got_all, got_or) != (want_all, want_or):
            bad.append(key)
    report(2, not bad, "; ".join(rows))


def test_criterion_3_boundary_squared_zero(complexes):
    checked, bad = 0, []
    for key, cx in complexes.items():
        B = cx.boundary
        for d in B:
            if d - 1 in B and B[d].cols and B[d - 1].rows:
                checked += 1
                if not (B[d - 1] @ B[d]).is_zero():
                    bad.append((key, d))
    report(3, not bad and checked > 0, f"{checked} composites vanish" if not bad else f"nonzero at {bad}")


def test_criterion_4_homology(homology):
    bad = []
    for r in ("gaussian", "eisenstein"):
        for m, G in homology[(r, 2)].exact.items():
            if (G.rank, G.torsion) != ((1, ()) if m == 3 else (0, ())):
                bad.append(f"GL2 {r} H{m}={G}")
        h3 = homology[(r, 3)]
        for m, G in h3.exact.items():
            G = G.reduce(3)
            if (G.rank, G.torsion) != ((1, ()) if m in (4, 5, 8) else (0, ())):
                bad.append(f"GL3 {r} H{m}={G}")
        primes = {p for divs in h3.divisors.values() for d in divs for p in prime_factors(d)}
        if r == "eisenstein" and 9 not in h3.divisors[8]:
            bad.append(f"d8 divisors {h3.divisors[8]}")
        if r == "gaussian" and not primes <= {2, 3}:
            bad.append(f"gaussian divisor primes {primes}")
    report(4, not bad, "; ".join(bad) or "GL2 H3=Z; GL3 Z in 4,5,8 mod S_{p<=3}; d8 has 9 over Z[rho]")


def test_criterion_5_stabilizer_primes(complexes):
    primes, bad = set(), []
    for key, cx in complexes.items():
        for d, cells in cx.levels.items():
            for c in cells:
                ps = prime_factors(c.stabilizer_order)
                primes |= ps
                if not ps <= {2, 3}:
                    bad.append((key, d, c.stabilizer_order))
    report(5, not bad, f"stabilizer primes {sorted(primes)}" if not bad else str(bad))


def test_criterion_6_snf_fuzz():
    rng = random.Random(20240)
    bad = []
    for t in range(100):
        r, c = rng.randint(1, 20), rng.randint(1, 20)
        M = [[rng.randint(-10, 10) for _ in range(c)] for _ in range(r)]
        divs = smith_normal_form(M)
        if divs != textbook_snf(M):
            bad.append(f"{t}: oracle")
        if any(b % a for a, b in zip(divs, divs[1:])):
            bad.append(f"{t}: chain")
        d2, U, V = smith_normal_form(M, transforms=True)
        if d2 != divs or abs(linalg.det(U)) != 1 or abs(linalg.det(V)) != 1:
            bad.append(f"{t}: transforms")
        D = SparseIntMatrix.from_dense(U) @ SparseIntMatrix.from_dense(M) @ SparseIntMatrix.from_dense(V)
        if D.triplets != [(i, i, d) for i, d in enumerate(divs)]:
            bad.append(f"{t}: UMV")
    report(6, not bad, "100 matrices agree with the oracle" if not bad else "; ".join(bad[:5]))


def _unimodular(ring, n, rng):
    """Random element of GL_n(R): monomial matrix times elementary matrices."""
    disc = ring.disc
    T = [[QuadInt(0, 0, disc)] * n for _ in range(n)]
    for i, j in enumerate(rng.sample(range(n), n)):
        T[i][j] = QuadInt(*rng.choice(ring.unit_pairs), disc)
    T = tuple(tuple(r) for r in T)
    for _ in range(rng.randint(1, 6)):
        i, j = rng.sample(range(n), 2)
        E = [[QuadInt(int(a == b), 0, disc) for b in range(n)] for a in range(n)]
        E[i][j] = QuadInt(rng.randint(-2, 2), rng.randint(-2, 2), disc)
        T = linalg.qmatmul(T, tuple(tuple(r) for r in E))
    return T


def test_criterion_7_equivalence_invariance(perfect):
    rng = random.Random(77)
    forms = [P.representative.primitive() for key in sorted(perfect) for P in perfect[key]]
    bad = []
    for t in range(100):
        A = forms[t % len(forms)]
        T = _unimodular(A.ring, A.n, rng)
        assert get_ring(A.ring).is_unit(linalg.qdet(T))
        B = A.transform(T)
        if invariant_key(A) != invariant_key(B):
            bad.append(f"{t}: key filter rejected")
            continue
        S = is_equivalent(A, B)
        if S is None or A.transform(S).entries != B.entries:
            bad.append(f"{t}: no verified transporter")
    report(7, not bad, "100 transporters verified" if not bad else "; ".join(bad[:5]))


def test_criterion_8_ledger(homology):
    want = {"gaussian": "K4(Z[i]) is a finite abelian 3-group", "eisenstein": "K4(Z[rho]) is trivial"}
    bad, trees = [], []
    for r in ("gaussian", "eisenstein"):
        H = {n: homology[(r, n)] for n in (2, 3)}
        rep = k4_report(r, H, facts_from_paper_values(r))
        tree = rep.tree()
        trees.append(tree)
        if not rep.ledger.is_Z(bq(5)):
            bad.append(f"{r}: H5(BQ) not Z")
        if r == "gaussian" and rep.ledger.facts["K4"].statement != "K4(Z[i]) in S_{p<=3}":
            bad.append("K4(Z[i]) in S_{p<=3} not derived")
        if rep.conclusion != want[r] or "unknown" in tree:
            bad.append(f"{r}: {rep.conclusion}")
        weak = k4_report(r, H, facts_from_paper_values(r), disabled=("rognes-ostvaer",))
        # weaker: a superset of primes, never undetermined, never contradicting the full result
        if weak.conclusion == rep.conclusion or "undetermined" in weak.conclusion \
                or not weak.ledger.is_Z(bq(5)):
            bad.append(f"{r}: without Rognes-Ostvaer: {weak.conclusion}")
    print("\n".join(trees))
    report(8, not bad, "; ".join(bad) or "; ".join(want.values()))


@pytest.mark.extended
def test_criterion_9_rank4(tmp_path_factory):
    if os.environ.get("VORHOM_EXTENDED") != "1":
        line = "criterion 9: SKIP rank-4 tier not requested (set VORHOM_EXTENDED=1; about an hour)"
        RESULTS.append(line)
        pytest.skip(line)
    from vorhom.checks import check_rank4
    from vorhom.store import Cache

    def progress(msg):
        print(f"criterion 9 progress: {msg} [{time.time() - T0:.0f}s]", flush=True)

    cache = Cache(os.environ.get("VORHOM_CACHE") or tmp_path_factory.mktemp("rank4"))
    res = check_rank4(cache, progress)
    report(9, res.passed, res.detail)


def test_tier1_runtime():
    # runs last in this module; the fixtures above are included in the clock
    elapsed = time.time() - T0
    line = f"tier 1 wall time {elapsed:.0f}s (budget 600s)"
    RESULTS.append(line)
    assert elapsed < 600, line
