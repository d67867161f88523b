import pytest

from vorhom.homology import FGAbGroupModSerre, HomologyResult, Z, ZERO
from vorhom.ktheory import (AXIOM_FAMILIES, CITATIONS, ExactSequenceConstraint, LedgerFact,
                            LedgerInconsistency, Provenance, axioms, bernoulli_numbers, bq, deduce,
                            facts_from_homology, facts_from_paper_values, hurewicz_bound,
                            is_regular_prime, k4_report, quillen_sequences, regularity_check, st)

GI, GR = "K4(Z[i]) is a finite abelian 3-group", "K4(Z[rho]) is trivial"
AX = Provenance("axiom", "test")


def _H(homology, ring):
    return {n: homology[(ring, n)] for n in (2, 3)}


def _report(homology, ring, disabled=()):
    return k4_report(ring, _H(homology, ring), facts_from_paper_values(ring), disabled=disabled)


def test_every_axiom_family_is_cited():
    assert set(CITATIONS) == set(AXIOM_FAMILIES) and len(AXIOM_FAMILIES) == 9
    ids = {f.provenance.detail.split(":")[0] for f in axioms("gaussian")}
    assert ids == set(AXIOM_FAMILIES)
    with pytest.raises(ValueError):
        axioms("gaussian", disabled=("no-such-axiom",))


def test_quillen_sequence_shape():
    seqs = quillen_sequences()
    assert [s.name for s in seqs] == [f"quillen r={r}" for r in (2, 3, 4, 5)]
    # ... -> H5(BQ2) -> H5(BQ3) -> H2(GL3, St) -> H4(BQ2) -> ...
    t = seqs[1].terms
    i = t.index(bq(5, 2))
    assert t[i:i + 4] == [bq(5, 2), bq(5, 3), st(2, 3), bq(4, 2)]


def test_zero_sandwich_rule():
    led = deduce([LedgerFact("A", AX, group=ZERO), LedgerFact("C", AX, group=ZERO)],
                 [ExactSequenceConstraint("s", ["A", "B", "C"])])
    assert led.is_zero("B")
    assert led.facts["B"].provenance.premises == ("A", "C")


def test_isomorphism_rule():
    led = deduce([LedgerFact("B", AX, group=Z)], [ExactSequenceConstraint("s", ["0", "A", "B", "0"])])
    assert led.is_Z("A")


def test_rank_sandwich_needs_rank():
    terms = ["0", "X", "B", "C", "D", "0"]
    base = [LedgerFact(k, AX, group=Z) for k in "BCD"]
    led = deduce(base, [ExactSequenceConstraint("s", terms)])
    assert led.group("X") is None
    led = deduce(base + [LedgerFact("X:rank", AX, rank_at_least=1)], [ExactSequenceConstraint("s", terms)])
    assert led.is_Z("X")
    assert "R4" in led.facts["X"].provenance.detail


def test_quotient_of_z_rule():
    led = deduce([LedgerFact("A", AX, group=Z), LedgerFact("X:rank", AX, rank_at_least=1)],
                 [ExactSequenceConstraint("s", ["A", "X", "0"])])
    assert led.is_Z("X")


def test_inconsistency_is_reported():
    with pytest.raises(LedgerInconsistency):
        deduce([LedgerFact("A", AX, group=ZERO), LedgerFact("C", AX, group=ZERO),
                LedgerFact("B", AX, group=Z)], [ExactSequenceConstraint("s", ["A", "B", "C"])])
    # 0 -> Z -> Z^2 -> 0 has a nonzero rank sum
    with pytest.raises(LedgerInconsistency):
        deduce([LedgerFact("A", AX, group=Z), LedgerFact("B", AX, group=FGAbGroupModSerre(2))],
               [ExactSequenceConstraint("s", ["0", "A", "B", "0"])])


@pytest.mark.parametrize("ring", ["gaussian", "eisenstein"])
def test_steinberg_facts_from_computed_homology(homology, ring):
    facts = {f.id: f for f in facts_from_homology(ring, _H(homology, ring))}
    # H_m(GL3, St) = H_{m+2}(Vor): Vor homology is Z in degrees 4, 5, 8 only
    assert facts[st(2, 3)].group.is_Z() and facts[st(3, 3)].group.is_Z()
    assert facts[st(1, 3)].group.is_zero() and facts[st(0, 3)].group.is_zero()
    assert facts[st(6, 3)].group.is_Z()
    assert all(f.provenance.kind == "computed" for f in facts.values())


def _rank4(exact):
    # a GL4 result whose stabilizers involve 5, so it is only valid mod S_{p<=5}
    return {4: HomologyResult(4, 5, exact, {})}


def test_prime_five_excluded_on_e1_page():
    cells = {4: {3: [(48, ())], 4: [(480, (4,)), (24, (3,))], 5: [(20, ())]}}
    facts = {f.id: f for f in facts_from_homology("gaussian", _rank4({}), cells)}
    # m=1: E^1_{3,1} from order-48 stabilizers; m=2: the 5-cell enters with q=1, kernel Z/4
    assert facts[st(1, 4)].group.is_zero() and facts[st(2, 4)].group.is_zero()
    assert "E1 page" in facts[st(1, 4)].provenance.detail
    # m=3: the 5-cell enters E^1_{4,2}, which is not computed
    assert st(3, 4) not in facts
    # m=4: only E^1_{5,2} and E^1_{4,3} involve 5 | order, again with q >= 2
    assert st(4, 4) not in facts


def test_prime_five_blocks_facts():
    clean = {4: {3: [(48, ())], 4: [(480, (4,))]}}
    # 5-torsion in the Voronoi group itself
    five = _rank4({4: FGAbGroupModSerre(0, (5,), 1)})
    assert st(1, 4) not in {f.id for f in facts_from_homology("gaussian", five, clean)}
    # 5-torsion in the orientation kernel of a q=1 cell
    bad = {4: {3: [(48, ())], 4: [(480, (20,))]}}
    ids = {f.id for f in facts_from_homology("gaussian", _rank4({}), bad)}
    assert st(1, 4) in ids and st(2, 4) not in ids
    # without cell data nothing above the Serre bound is used
    assert facts_from_homology("gaussian", _rank4({})) == []


def test_paper_value_facts_are_tagged():
    facts = facts_from_paper_values("gaussian")
    assert {f.id for f in facts} == {st(1, 4), st(2, 4)}
    assert all(f.provenance.kind == "paper-table" and f.group.is_zero() for f in facts)


def test_hurewicz_bound():
    assert hurewicz_bound(4) == 3
    with pytest.raises(ValueError):
        hurewicz_bound(6)


def test_bernoulli_and_regular_primes():
    B = bernoulli_numbers(12)
    assert B[2] == pytest.approx(1 / 6) and B[12] == pytest.approx(-691 / 2730)
    odd_primes = [p for p in range(3, 60) if all(p % q for q in range(2, p))]
    # 37 and 59 are the irregular primes below 60
    assert [p for p in odd_primes if not is_regular_prime(p)] == [37, 59]
    with pytest.raises(ValueError):
        is_regular_prime(9)


@pytest.mark.parametrize("ring,p,split,theorem", [
    ("gaussian", 2, "ramified", "rognes-ostvaer"),
    ("gaussian", 3, "inert", None),
    ("eisenstein", 2, "inert", "rognes-ostvaer"),
    ("eisenstein", 3, "ramified", "regular-prime"),
])
def test_regularity(ring, p, split, theorem):
    r = regularity_check(ring, p)
    assert r.splitting == split and r.theorem == theorem
    with pytest.raises(ValueError):
        regularity_check(ring, 5)


@pytest.mark.parametrize("ring,want", [("gaussian", GI), ("eisenstein", GR)])
def test_k4_conclusion(homology, ring, want):
    rep = _report(homology, ring)
    assert rep.conclusion == want
    assert rep.ledger.is_Z(bq(5))
    tree = rep.tree()
    assert "unknown" not in tree and "R4 (rank sandwich)" in tree and "Hurewicz" in tree
    assert rep.to_json()["conclusion"] == want


def test_disabling_rognes_ostvaer_weakens(homology):
    assert _report(homology, "gaussian", ("rognes-ostvaer",)).conclusion == \
        "K4(Z[i]) is a finite group in S_{p<=3}"
    assert _report(homology, "eisenstein", ("rognes-ostvaer",)).conclusion == \
        "K4(Z[rho]) is a finite abelian 2-group"
    assert _report(homology, "eisenstein", ("regular-prime",)).conclusion == \
        "K4(Z[rho]) is a finite abelian 3-group"


@pytest.mark.parametrize("family", ["hspace-rank", "k3-input", "h4-bq2-bq3", "stability", "lee-szczarba"])
def test_missing_structural_axiom_is_undetermined(homology, family):
    assert _report(homology, "gaussian", (family,)).conclusion == "K4(Z[i]) undetermined"


@pytest.mark.parametrize("ring", ["gaussian", "eisenstein"])
@pytest.mark.parametrize("family", AXIOM_FAMILIES)
def test_removing_an_axiom_never_contradicts(homology, ring, family):
    full = _report(homology, ring)
    weak = _report(homology, ring, (family,))
    # every fact surviving in the weaker ledger agrees with the full one
    for fid, f in weak.ledger.facts.items():
        if f.group is not None and fid in full.ledger.facts:
            g = full.ledger.facts[fid].group
            assert g is not None and g.reduce(3) == f.group.reduce(3)
