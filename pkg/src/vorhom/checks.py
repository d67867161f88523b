"""Tiered self-checks behind ``vorhom verify``.

Each check compares a computed quantity with a bundled reference value or an
independent oracle and returns a CheckResult.  The expected tables for n <= 3
live in ``data/paper_values.json`` next to the rank-4 values.
"""
from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass
from typing import Callable

from . import ktheory, linalg
from .forms import HermForm
from .homology import SparseIntMatrix, smith_normal_form
from .ring import QuadInt, get_ring, prime_factors
from .store import Cache, record_boundaries, record_cells, record_counts, record_homology
from .voronoi import PerfectFormClass, invariant_key, is_equivalent

RINGS = ("gaussian", "eisenstein")


@dataclass
class CheckResult:
    id: str
    name: str
    reference: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id} {self.name}: {self.detail} ({self.reference})"

    def to_json(self) -> dict:
        return asdict(self)


def expected(ring: str) -> dict:
    return ktheory.paper_values()["rings"][ring]


# -- random unimodular matrices ------------------------------------------------

def random_unimodular(ring, n: int, rng: random.Random, steps: int = 8, bound: int = 3):
    """Product of a signed permutation-by-units and a few elementary transvections."""
    ring = get_ring(ring)
    disc = ring.disc
    perm = list(range(n))
    rng.shuffle(perm)
    T = [[QuadInt(0, 0, disc) for _ in range(n)] for _ in range(n)]
    for i, j in enumerate(perm):
        T[i][j] = QuadInt(*rng.choice(ring.unit_pairs), disc)
    T = tuple(tuple(r) for r in T)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        x = QuadInt(rng.randint(-bound, bound), rng.randint(-bound, bound), disc)
        E = [[QuadInt(int(r == c), 0, disc) for c in range(n)] for r in range(n)]
        E[i][j] = x
        T = linalg.qmatmul(T, tuple(tuple(r) for r in E))
    return T


# -- individual checks -----------------------------------------------------------

def check_perfect_counts(cache: Cache) -> CheckResult:
    got, bad = {}, []
    for ring in RINGS:
        for n in (2, 3):
            rec = cache.perfect(ring, n)
            k = len(rec["perfect_forms"])
            want = expected(ring)["perfect_forms"][str(n)]
            got[f"{ring}/{n}"] = k
            if k != want:
                bad.append(f"{ring} n={n}: {k} != {want}")
    return CheckResult("C1", "perfect form class counts", "top-dimensional cell-count table entries",
                       not bad, "; ".join(bad) or str(got))


def _row(counts, ds, which):
    return [counts.get(d, (0, 0))[which] for d in ds]


def check_cell_tables(cache: Cache, ranks=(2, 3)) -> CheckResult:
    bad, shown = [], []
    for ring in RINGS:
        for n in ranks:
            tab = expected(ring)["cell_counts"][str(n)]
            counts = record_counts(cache.complex(ring, n))
            star, orient = _row(counts, tab["d"], 0), _row(counts, tab["d"], 1)
            shown.append(f"{ring} n={n}: {tuple(star)}/{tuple(orient)}")
            if star != tab["all"] or orient != tab["orientable"]:
                bad.append(f"{ring} n={n}: got {star}/{orient}, want {tab['all']}/{tab['orientable']}")
    return CheckResult("C2", "Voronoi cell tables", "cell-count tables for GL2 and GL3",
                       not bad, "; ".join(bad) or "; ".join(shown))


def check_dd_zero(cache: Cache) -> CheckResult:
    bad, n_mats = [], 0
    for ring in RINGS:
        for n in (2, 3):
            B = record_boundaries(cache.complex(ring, n))
            for d in B:
                if d - 1 in B and B[d - 1].cols and B[d].cols and B[d - 1].rows:
                    n_mats += 1
                    if not (B[d - 1] @ B[d]).is_zero():
                        bad.append(f"{ring} n={n} d={d}")
    return CheckResult("C3", "boundary of boundary vanishes", "chain complex axiom",
                       not bad, "; ".join(bad) or f"{n_mats} compositions are zero")


def check_homology(cache: Cache) -> CheckResult:
    bad = []
    for ring in RINGS:
        h2 = record_homology(cache.complex(ring, 2))
        for m, G in h2.exact.items():
            want = (1, ()) if m == 3 else (0, ())
            if (G.rank, G.torsion) != want:
                bad.append(f"GL2 {ring} H{m} = {G}")
        h3 = record_homology(cache.complex(ring, 3))
        for m, G in h3.groups.items():
            want_rank = 1 if m in (4, 5, 8) else 0
            if G.rank != want_rank or G.torsion:
                bad.append(f"GL3 {ring} H{m} = {G}")
        divs = {p for v in h3.divisors.values() for d in v for p in prime_factors(d)}
        if ring == "eisenstein" and 9 not in h3.divisors.get(8, []):
            bad.append(f"GL3 eisenstein d8 divisors {h3.divisors.get(8)} lack 9")
        if ring == "gaussian" and not divs <= {2, 3}:
            bad.append(f"GL3 gaussian divisor primes {sorted(divs)}")
    return CheckResult("C4", "Voronoi homology", "homology of GL2 and GL3 with Steinberg coefficients",
                       not bad, "; ".join(bad) or "GL2: H3=Z; GL3: Z in degrees 4,5,8 mod S_{p<=3}")


def check_stabilizer_primes(cache: Cache) -> CheckResult:
    primes, bad = set(), []
    for ring in RINGS:
        for n in (2, 3):
            for d, cells in cache.complex(ring, n)["levels"].items():
                for i, c in enumerate(cells):
                    ps = prime_factors(c["stabilizer_order"])
                    primes |= ps
                    if not ps <= {2, 3}:
                        bad.append(f"{ring} n={n} d={d} #{i}: {c['stabilizer_order']}")
    return CheckResult("C5", "stabilizer primes", "stabilizer orders for n <= 3",
                       not bad, "; ".join(bad) or f"primes {sorted(primes)}")


def _sympy_divisors(M) -> list[int]:
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors
    return [abs(int(x)) for x in invariant_factors(Matrix(M), domain=ZZ) if x != 0]


def check_snf(seed: int = 0, trials: int = 100) -> CheckResult:
    rng = random.Random(seed)
    bad = []
    for t in range(trials):
        r, c = rng.randint(1, 20), rng.randint(1, 20)
        M = [[rng.randint(-10, 10) for _ in range(c)] for _ in range(r)]
        ours = smith_normal_form(M)
        if ours != _sympy_divisors(M):
            bad.append(f"trial {t}: divisors differ")
            continue
        if any(b % a for a, b in zip(ours, ours[1:])):
            bad.append(f"trial {t}: not a divisor chain")
        divs, U, V = smith_normal_form(M, transforms=True)
        if abs(linalg.det(U)) != 1 or abs(linalg.det(V)) != 1:
            bad.append(f"trial {t}: transform not unimodular")
        D = SparseIntMatrix.from_dense(U) @ SparseIntMatrix.from_dense(M) @ SparseIntMatrix.from_dense(V)
        want = SparseIntMatrix(r, c, [(i, i, d) for i, d in enumerate(divs)])
        if D.triplets != want.triplets or divs != ours:
            bad.append(f"trial {t}: U M V is not the Smith form")
    return CheckResult("C6", "Smith normal form fuzz", "sympy invariant factors as oracle",
                       not bad, "; ".join(bad[:5]) or f"{trials} matrices agree")


def check_equivalence(cache: Cache, seed: int = 0, trials: int = 100) -> CheckResult:
    rng = random.Random(seed)
    forms = []
    for ring in RINGS:
        for n in (2, 3):
            for P in cache.perfect(ring, n)["perfect_forms"]:
                forms.append(HermForm.from_json(P["form"]).primitive())
    bad = []
    for t in range(trials):
        A = forms[t % len(forms)]
        T = random_unimodular(A.ring, A.n, rng)
        B = A.transform(T)
        if invariant_key(A) != invariant_key(B):
            bad.append(f"trial {t}: invariant key differs")
            continue
        S = is_equivalent(A, B)
        if S is None or A.transform(S).entries != B.entries:
            bad.append(f"trial {t}: no verified transporter")
    return CheckResult("C7", "equivalence invariance", "random unimodular transforms of perfect forms",
                       not bad, "; ".join(bad[:5]) or f"{trials} transporters verified")


K4_WANT = {"gaussian": "K4(Z[i]) is a finite abelian 3-group", "eisenstein": "K4(Z[rho]) is trivial"}


def check_ledger(cache: Cache) -> CheckResult:
    want = K4_WANT
    bad, notes = [], []
    for ring in RINGS:
        H = {n: record_homology(cache.complex(ring, n)) for n in (2, 3)}
        extra = ktheory.facts_from_paper_values(ring)
        rep = ktheory.k4_report(ring, H, extra)
        h5 = rep.ledger.group("H5.BQ")
        if h5 is None or not h5.reduce(3).is_Z():
            bad.append(f"{ring}: H5(BQ) = {h5}")
        if "K4" not in rep.ledger.facts:
            bad.append(f"{ring}: no K4 in S_{{p<=3}} fact")
        if rep.conclusion != want[ring]:
            bad.append(f"{ring}: {rep.conclusion}")
        if "unknown" in rep.tree():
            bad.append(f"{ring}: derivation tree has unknown premises")
        weak = ktheory.k4_report(ring, H, extra, disabled=("rognes-ostvaer",))
        if weak.conclusion == rep.conclusion or "undetermined" in weak.conclusion:
            bad.append(f"{ring}: disabling Rognes-Ostvaer gave {weak.conclusion}")
        notes.append(rep.conclusion)
    return CheckResult("C8", "K4 ledger", "H5(BQ) case analysis, Hurewicz bound, regularity",
                       not bad, "; ".join(bad) or "; ".join(notes))


# -- extended tier -----------------------------------------------------------------

def check_rank4(cache: Cache, progress: Callable | None = None) -> CheckResult:
    bad, shown = [], []
    for ring in RINGS:
        tab = expected(ring)["cell_counts"]["4"]
        if progress:
            progress(f"{ring} n=4: enumerating perfect forms")
        k = len(cache.perfect(ring, 4)["perfect_forms"])
        want = expected(ring)["perfect_forms"]["4"]
        if k != want:
            bad.append(f"{ring}: {k} perfect forms, want {want}")
        if progress:
            progress(f"{ring} n=4: {k} perfect forms; building cells")
        rec = cache.complex(ring, 4, progress=(lambda d, reps: progress(f"{ring} n=4: level {d}: "
                                                                          f"{len(reps)} classes"))
                            if progress else None)
        counts = record_counts(rec)
        star = _row(counts, tab["d"], 0)
        orient = _row(counts, tab["d"], 1)
        if star != tab["all"]:
            bad.append(f"{ring}: Sigma* {star}")
        if orient != tab["orientable"]:
            bad.append(f"{ring}: Sigma {orient}")
        lvl4 = rec["levels"]["4"]
        if ring == "gaussian":
            five = [c for c in lvl4 if c["stabilizer_order"] % 5 == 0]
            if len(lvl4) != 10 or len(five) != 1:
                bad.append(f"gaussian dim-4: {len(lvl4)} classes, {len(five)} with 5 | order")
            elif five[0].get("orientation_preserving_order") != 240 or \
                    five[0].get("orientation_preserving_abelianization") != [4]:
                bad.append(f"gaussian dim-4 5-cell: {five[0]}")
        elif any(c["orientable"] for c in lvl4):
            bad.append("eisenstein: orientable dim-4 classes present")
        # the ledger again, with the GL4 facts taken from this complex instead of the bundled table
        H = {n: record_homology(cache.complex(ring, n)) for n in (2, 3)}
        H[4] = record_homology(rec)
        rep = ktheory.k4_report(ring, H, cells={4: record_cells(rec)})
        g4 = [rep.ledger.facts.get(ktheory.st(m, 4)) for m in (1, 2)]
        if any(f is None or f.provenance.kind != "computed" for f in g4):
            bad.append(f"{ring}: H1/H2 of GL4 not derived from the complex")
        if rep.conclusion != K4_WANT[ring]:
            bad.append(f"{ring}: ledger from computed GL4 facts: {rep.conclusion}")
        shown.append(f"{ring}: {k} forms, Sigma* {star}, Sigma {orient}, {rep.conclusion} from computed GL4 facts")
    return CheckResult("C9", "rank-4 Voronoi complexes", "GL4 cell-count tables",
                       not bad, "; ".join(bad) or "; ".join(shown))


DEFAULT_CHECKS = (
    ("C1", check_perfect_counts), ("C2", check_cell_tables), ("C3", check_dd_zero),
    ("C4", check_homology), ("C5", check_stabilizer_primes), ("C6", lambda cache: check_snf()),
    ("C7", check_equivalence), ("C8", check_ledger),
)


def run_checks(cache: Cache, tier: str = "default", progress: Callable | None = None) -> list[CheckResult]:
    out = []
    for cid, fn in DEFAULT_CHECKS:
        t0 = time.time()
        try:
            res = fn(cache)
        except Exception as exc:  # a crash is a failed check, reported by name
            res = CheckResult(cid, fn.__name__, "", False, f"{type(exc).__name__}: {exc}")
        if progress:
            progress(f"{res.line()} [{time.time() - t0:.1f}s]")
        out.append(res)
    if tier == "extended":
        t0 = time.time()
        try:
            res = check_rank4(cache, progress)
        except Exception as exc:
            res = CheckResult("C9", "check_rank4", "", False, f"{type(exc).__name__}: {exc}")
        if progress:
            progress(f"{res.line()} [{time.time() - t0:.1f}s]")
        out.append(res)
    return out
