"""Forward-chaining ledger from Voronoi homology to K_4.

Facts are finitely generated abelian groups modulo S_{p<=3}, rank lower
bounds, or plain statements.  Exact sequences come from Quillen's
localization sequence

    H_n(BQ_{r-1}) -> H_n(BQ_r) -> H_{n-r}(GL_r, St_r) -> H_{n-1}(BQ_{r-1}) -> ...

and a small fixed rule set is applied until nothing changes.
Deep external theorems enter as cited axioms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping

from sympy import primerange

from .homology import FGAbGroupModSerre, HomologyResult, Z, ZERO, serre_equal
from .ring import INERT, RAMIFIED, SPLIT, Ring, get_ring, prime_factors, splitting_type

SERRE = 3
ZERO_TERM = "0"

RING_LABEL = {-4: "Z[i]", -3: "Z[rho]"}

# class number and real places of Q(i), Q(sqrt(-3)); both have class number 1
FIELD_DATA = {
    -4: {"class_number": 1, "real_places": 0, "cyclotomic_conductor": 4},
    -3: {"class_number": 1, "real_places": 0, "cyclotomic_conductor": 3},
}


class LedgerInconsistency(RuntimeError):
    pass


@dataclass(frozen=True)
class Provenance:
    kind: str  # computed | axiom | deduced | paper-table
    detail: str
    premises: tuple = ()


@dataclass(frozen=True)
class LedgerFact:
    id: str
    provenance: Provenance
    group: FGAbGroupModSerre | None = None
    rank_at_least: int | None = None
    statement: str | None = None

    def describe(self) -> str:
        if self.statement is not None:
            return self.statement
        if self.group is not None:
            return f"{self.id} = {self.group}"
        if self.rank_at_least is not None:
            return f"rank {self.id.split(':')[0]} >= {self.rank_at_least}"
        return self.id

    def to_json(self) -> dict:
        out = {"id": self.id, "claim": self.describe(),
               "provenance": {"kind": self.provenance.kind, "detail": self.provenance.detail,
                              "premises": list(self.provenance.premises)}}
        if self.group is not None:
            out["group"] = self.group.to_json()
        return out


def rank_id(subject: str) -> str:
    return f"{subject}:rank"


def bq(n: int, r: int | None = None) -> str:
    return f"H{n}.BQ" if r is None else f"H{n}.BQ{r}"


def st(m: int, r: int) -> str:
    return f"H{m}.GL{r}.St" if m >= 0 else ZERO_TERM


def modS(G: FGAbGroupModSerre) -> FGAbGroupModSerre:
    return G.reduce(SERRE)


# -- axioms ---------------------------------------------------------------------

AXIOM_FAMILIES = (
    "bq1-vanishing",
    "h4-bq2-bq3",
    "stability",
    "hspace-rank",
    "k3-input",
    "lee-szczarba",
    "k4-finite-rank-zero",
    "rognes-ostvaer",
    "regular-prime",
)

CITATIONS = {
    "bq1-vanishing": "Quillen, Finite generation of the groups K_i of rings of algebraic integers, p. 212: "
                     "H_n(BQ_1) = 0 for n >= 3 for these two rings",
    "h4-bq2-bq3": "Staffeldt, On the K_3 of the Gaussian integers, proof of Thm I.1.1: "
                  "H_4(BQ_2) = H_4(BQ_3) = Z mod S_{p<=3}",
    "stability": "Quillen stability with Lee-Szczarba H_0 vanishing: H_5(BQ) = H_5(BQ_5)",
    "hspace-rank": "BQ is an H-space; H_*(BQ) (x) Q is the enveloping algebra of pi_*(BQ) (x) Q, "
                   "so the product of the classes from K_0 and K_3 gives rank H_5(BQ) >= 1",
    "k3-input": "Weibel, K-book / Handbook of K-theory, Thm 73 with Example 28: K_3(Z[i]) = Z + Z/24; "
                "K_0 = Z, K_1 = Z/2, K_2 = 0 (Bass-Tate)",
    "lee-szczarba": "Lee-Szczarba, On the homology and cohomology of congruence subgroups, "
                    "corollary to Thm 4.1: H_0(GL_n(L), St_n) = 0 for n >= 3, L Euclidean",
    "k4-finite-rank-zero": "Quillen (K_2n of a number ring is finitely generated) and "
                           "Borel (rank K_2n = 0 for n > 0)",
    "rognes-ostvaer": "Rognes-Ostvaer, two-primary algebraic K-theory of two-regular number fields: "
                      "K_2n(R) has trivial 2-part if R is the ring of integers of a 2-regular field",
    "regular-prime": "Weibel, Handbook of K-theory, Example 75: for a regular odd prime l there is no "
                     "l-torsion in K_2n(Z[zeta_l])",
}


def axioms(ring, disabled: Iterable[str] = ()) -> list[LedgerFact]:
    """The cited external inputs, as ledger facts."""
    ring = get_ring(ring)
    disabled = set(disabled)
    unknown = disabled - set(AXIOM_FAMILIES)
    if unknown:
        raise ValueError(f"unknown axiom families: {sorted(unknown)}")
    out: list[LedgerFact] = []

    def ax(family, fid, premises=(), **kw):
        if family not in disabled:
            out.append(LedgerFact(fid, Provenance("axiom", f"{family}: {CITATIONS[family]}", premises), **kw))

    for n in (3, 4, 5, 6):
        ax("bq1-vanishing", bq(n, 1), group=ZERO.reduce(SERRE))
    ax("h4-bq2-bq3", bq(4, 2), group=Z.reduce(SERRE))
    ax("h4-bq2-bq3", bq(4, 3), group=Z.reduce(SERRE))
    ax("stability", "stability:H5", statement="H5.BQ = H5.BQ5")
    ax("k3-input", "K3", group=FGAbGroupModSerre(1, (24,)).reduce(SERRE))
    if "k3-input" not in disabled:
        ax("hspace-rank", rank_id(bq(5)), premises=("K3",), rank_at_least=1)
    for n in (3, 4, 5):
        ax("lee-szczarba", st(0, n), group=ZERO.reduce(SERRE))
    ax("k4-finite-rank-zero", "K4:finite", statement="K4 is finitely generated of rank 0")
    ax("rognes-ostvaer", "rognes-ostvaer", statement="2-regular => K_2n has trivial 2-part")
    ax("regular-prime", "regular-prime", statement="l regular => no l-torsion in K_2n(Z[zeta_l])")
    return out


# -- exact sequences ------------------------------------------------------------

@dataclass
class ExactSequenceConstraint:
    name: str
    terms: list[str]


def quillen_sequences(max_r: int = 5, top: int = 6, bottom: int = 3) -> list[ExactSequenceConstraint]:
    out = []
    for r in range(2, max_r + 1):
        terms = [st(top + 1 - r, r)]
        for n in range(top, bottom - 1, -1):
            terms += [bq(n, r - 1), bq(n, r), st(n - r, r)]
        out.append(ExactSequenceConstraint(f"quillen r={r}", terms))
    return out


def stability_constraints(facts) -> list[ExactSequenceConstraint]:
    if "stability:H5" in facts:
        return [ExactSequenceConstraint("stability", [ZERO_TERM, bq(5, 5), bq(5), ZERO_TERM])]
    return []


# -- the engine -------------------------------------------------------------------

class Ledger:
    def __init__(self, facts: Iterable[LedgerFact] = ()):
        self.facts: dict[str, LedgerFact] = {}
        self.constraints: list[ExactSequenceConstraint] = []
        for f in facts:
            self.add(f)

    def add(self, fact: LedgerFact) -> bool:
        """Insert a fact; returns True if it is new information."""
        old = self.facts.get(fact.id)
        if old is None:
            self.facts[fact.id] = fact
            return True
        if fact.group is not None and old.group is not None:
            if not serre_equal(fact.group, old.group, SERRE):
                raise LedgerInconsistency(
                    f"{fact.id} derived as {old.group} and as {fact.group}\n"
                    f"first:\n{self.render(fact.id)}\nsecond: {fact.provenance}")
            return False
        if fact.rank_at_least is not None and old.rank_at_least is not None:
            if fact.rank_at_least > old.rank_at_least:
                self.facts[fact.id] = fact
                return True
        return False

    def group(self, fid: str) -> FGAbGroupModSerre | None:
        if fid == ZERO_TERM:
            return ZERO
        f = self.facts.get(fid)
        return None if f is None else f.group

    def is_zero(self, fid: str) -> bool:
        g = self.group(fid)
        return g is not None and modS(g).is_zero()

    def is_Z(self, fid: str) -> bool:
        g = self.group(fid)
        return g is not None and modS(g).is_Z()

    def rank_lb(self, fid: str) -> int:
        g = self.group(fid)
        if g is not None:
            return g.rank
        f = self.facts.get(rank_id(fid))
        return f.rank_at_least if f is not None else 0

    def _prem(self, *ids) -> tuple:
        out = []
        for i in ids:
            if i == ZERO_TERM:
                continue
            if i in self.facts:
                out.append(i)
            elif rank_id(i) in self.facts:
                out.append(rank_id(i))
        return tuple(out)

    def _deduce_group(self, fid, G, rule, premises, seq):
        return self.add(LedgerFact(fid, Provenance("deduced", f"{rule} on {seq}", premises), group=modS(G)))

    def _deduce_rank(self, fid, k, rule, premises, seq):
        if k <= 0 or self.group(fid) is not None or self.rank_lb(fid) >= k:
            return False
        return self.add(LedgerFact(rank_id(fid), Provenance("deduced", f"{rule} on {seq}", premises),
                                   rank_at_least=k))

    def step(self) -> bool:
        changed = False
        for c in self.constraints:
            t = c.terms
            L = len(t)
            for i in range(L):
                # R1/R2/R3: A -> B -> C with A = C = 0  =>  B = 0
                if i + 2 < L and self.group(t[i + 1]) is None:
                    a, b, cc = t[i], t[i + 1], t[i + 2]
                    if self.is_zero(a) and self.is_zero(cc):
                        rule = "R2" if a == ZERO_TERM else "R3" if cc == ZERO_TERM else "R1"
                        changed |= self._deduce_group(b, ZERO, rule, self._prem(a, cc), c.name)
                # R5: 0 -> A -> B -> 0  =>  A = B
                if i + 3 < L:
                    p, a, b, q = t[i:i + 4]
                    if self.is_zero(p) and self.is_zero(q):
                        ga, gb = self.group(a), self.group(b)
                        if ga is not None and gb is None and b != ZERO_TERM:
                            changed |= self._deduce_group(b, ga, "R5 (isomorphism)", self._prem(p, a, q), c.name)
                        elif gb is not None and ga is None and a != ZERO_TERM:
                            changed |= self._deduce_group(a, gb, "R5 (isomorphism)", self._prem(p, b, q), c.name)
                        changed |= self._deduce_rank(a, self.rank_lb(b), "RP (rank through isomorphism)",
                                                     self._prem(p, b, q), c.name)
                        changed |= self._deduce_rank(b, self.rank_lb(a), "RP (rank through isomorphism)",
                                                     self._prem(p, a, q), c.name)
                # RP: A -> X -> 0 gives rank A >= rank X
                if i + 2 < L:
                    a, x, e = t[i:i + 3]
                    if self.is_zero(e) and a != ZERO_TERM:
                        changed |= self._deduce_rank(a, self.rank_lb(x), "RP (rank through surjection)",
                                                     self._prem(x, e), c.name)
                    # R6: Z -> X -> 0 with rank X >= 1  =>  X = Z
                    if (self.is_zero(e) and self.is_Z(a) and self.group(x) is None
                            and self.rank_lb(x) >= 1):
                        changed |= self._deduce_group(x, Z, "R6 (rank-bounded quotient of Z)",
                                                      self._prem(a, x, e), c.name)
                # R4: A -> X -> B -> C -> D -> E, A = E = 0, B = C = D = Z, rank X >= 1  =>  X = Z
                if i + 5 < L:
                    a, x, b, cc, d, e = t[i:i + 6]
                    if (self.group(x) is None and self.is_zero(a) and self.is_zero(e)
                            and self.is_Z(b) and self.is_Z(cc) and self.is_Z(d)
                            and self.rank_lb(x) >= 1):
                        changed |= self._deduce_group(x, Z, "R4 (rank sandwich)",
                                                      self._prem(a, x, b, cc, d, e), c.name)
        return changed

    def run(self, max_steps: int = 100):
        for _ in range(max_steps):
            if not self.step():
                break
        self.check_rank_sums()

    def check_rank_sums(self):
        """Alternating rank sums vanish on fully known stretches between zeros."""
        for c in self.constraints:
            t = c.terms
            zeros = [i for i, x in enumerate(t) if self.is_zero(x)]
            for z0, z1 in zip(zeros, zeros[1:]):
                seg = t[z0 + 1:z1]
                if not seg or any(self.group(x) is None for x in seg):
                    continue
                s = sum((-1) ** k * self.group(x).rank for k, x in enumerate(seg))
                if s != 0:
                    raise LedgerInconsistency(f"alternating rank sum {s} on {seg} in {c.name}")

    def render(self, fid: str, indent: int = 0, seen=None) -> str:
        f = self.facts.get(fid)
        pad = "  " * indent
        if f is None:
            return f"{pad}{fid}: unknown\n"
        line = f"{pad}{f.describe()}  [{f.provenance.kind}: {f.provenance.detail}]\n"
        for p in f.provenance.premises:
            line += self.render(p, indent + 1)
        return line


def deduce(facts: Iterable[LedgerFact], constraints: Iterable[ExactSequenceConstraint] | None = None) -> Ledger:
    facts = list(facts)
    led = Ledger(facts)
    if constraints is None:
        constraints = quillen_sequences() + stability_constraints(led.facts)
    led.constraints = list(constraints)
    led.run()
    return led


# -- computed and bundled facts ---------------------------------------------------

def _e1_clean(cells: Mapping[int, list], vdeg: int, primes: set[int]) -> bool:
    """No p-torsion (p in primes) in any E^1_{d,q}, q >= 1, of total degree vdeg.

    H_q(Stab, Z_sigma) is killed by |Stab|, so only stabilizers divisible by
    some p matter. For q = 1 the odd part is a summand of the orientation
    kernel's abelianization, which is recorded per cell; higher q give up.
    """
    for d, data in cells.items():
        q = vdeg - d
        if q < 1:
            continue
        for order, kernel_ab in data:
            if not prime_factors(order) & primes:
                continue
            if q > 1 or any(prime_factors(t) & primes for t in kernel_ab):
                return False
    return True


def facts_from_homology(ring, results: Mapping[int, HomologyResult],
                        cells: Mapping[int, Mapping[int, list]] | None = None) -> list[LedgerFact]:
    """H_m(GL_n, St_n) facts from Voronoi homology, shifted by n - 1.

    A result valid only modulo a larger Serre class (torsion primes above 3 in
    some stabilizer) yields a fact in degree m only when the E^1 page rules
    those primes out: the exact Voronoi group has no such torsion and neither
    do the stabilizer terms of the same total degree. ``cells`` maps n to
    d -> [(stabilizer order, orientation-kernel abelianization)].
    """
    ring = get_ring(ring)
    out = []
    for n, h in sorted(results.items()):
        big = set(primerange(SERRE + 1, h.serre_bound + 1))
        if big and (cells is None or n not in cells):
            continue
        for m in range(0, 7):
            vdeg = m + n - 1
            G = h.exact.get(vdeg, ZERO)  # zero above the top cell dimension
            how = f"valid mod S_{{p<={h.serre_bound}}}"
            if big:
                if G.torsion_primes & big or not _e1_clean(cells[n], vdeg, big):
                    continue
                how = f"primes {sorted(big)} excluded on the E1 page"
            out.append(LedgerFact(st(m, n), Provenance(
                "computed", f"Voronoi complex of GL{n}({RING_LABEL[ring.disc]}), degree {vdeg}, {how}"),
                group=modS(G)))
    return out


def paper_values() -> dict:
    with resources.files("vorhom.data").joinpath("paper_values.json").open() as fh:
        return json.load(fh)


def facts_from_paper_values(ring) -> list[LedgerFact]:
    ring = get_ring(ring)
    data = paper_values()["rings"][ring.name]["steinberg_homology_mod_p3"]
    out = []
    for n, groups in data.items():
        for m, g in groups.items():
            out.append(LedgerFact(st(int(m), int(n)), Provenance(
                "paper-table", f"bundled published value for GL{n}({RING_LABEL[ring.disc]})"),
                group=FGAbGroupModSerre.from_json(g)))
    return out


# -- Hurewicz and regularity -------------------------------------------------------

HUREWICZ_ANNIHILATOR = {4: 144}


def hurewicz_bound(N: int = 4) -> int:
    """Largest prime dividing the constant annihilating the Hurewicz kernel in K_N."""
    if N not in HUREWICZ_ANNIHILATOR:
        raise ValueError(f"no Hurewicz constant available for K_{N}")
    return max(prime_factors(HUREWICZ_ANNIHILATOR[N]))


def bernoulli_numbers(m: int) -> list[Fraction]:
    """B_0..B_m (B_1 = +1/2 convention is irrelevant for even indices)."""
    out = []
    A = [Fraction(0)] * (m + 1)
    for k in range(m + 1):
        A[k] = Fraction(1, k + 1)
        for j in range(k, 0, -1):
            A[j - 1] = j * (A[j - 1] - A[j])
        out.append(A[0])
    return out


def is_regular_prime(l: int) -> bool:
    """Kummer's criterion: l divides no numerator of B_2, B_4, ..., B_{l-3}."""
    if l < 3 or prime_factors(l) != {l}:
        raise ValueError("need an odd prime")
    B = bernoulli_numbers(max(l - 3, 0))
    return all(B[k].numerator % l for k in range(2, l - 2, 2))


@dataclass
class RegularityReport:
    ring: str
    p: int
    splitting: str
    narrow_class_number_coprime: bool
    regular: bool
    theorem: str | None
    conclusion: str

    @property
    def applicable(self) -> bool:
        return self.theorem is not None


def regularity_check(ring, p: int) -> RegularityReport:
    """p-regularity of R and which vanishing theorem (if any) removes p from |K_4(R)|."""
    ring = get_ring(ring)
    if p not in (2, 3):
        raise ValueError("only p = 2, 3 are relevant")
    data = FIELD_DATA[ring.disc]
    split = splitting_type(ring, p)
    # class number 1 => the class group of R[1/p] is trivial; no real places => narrow = wide
    coprime = data["class_number"] == 1 and data["real_places"] == 0
    regular = split != SPLIT and coprime
    label = RING_LABEL[ring.disc]
    theorem = None
    if p == 2 and regular:
        theorem = "rognes-ostvaer"
        conclusion = f"{label} is 2-regular: trivial 2-part in K_2n"
    elif p == 3 and data["cyclotomic_conductor"] == 3 and is_regular_prime(3):
        theorem = "regular-prime"
        conclusion = f"{label} = Z[zeta_3] and 3 is a regular prime: no 3-torsion in K_2n"
    else:
        conclusion = "no applicable theorem"
    return RegularityReport(label, p, split, coprime, regular, theorem, conclusion)


# -- the final report --------------------------------------------------------------

@dataclass
class K4Report:
    ring: str
    conclusion: str
    ledger: Ledger
    regularity: list = field(default_factory=list)

    def tree(self) -> str:
        return self.ledger.render("K4:structure")

    def to_json(self) -> dict:
        return {
            "ring": self.ring,
            "conclusion": self.conclusion,
            "facts": [f.to_json() for _, f in sorted(self.ledger.facts.items())],
            "regularity": [r.__dict__ for r in self.regularity],
        }


def k4_report(ring, homology: Mapping[int, HomologyResult], extra_facts: Iterable[LedgerFact] = (),
              disabled: Iterable[str] = (), cells: Mapping[int, Mapping[int, list]] | None = None) -> K4Report:
    """Run the ledger and derive the structure of K_4(R).

    ``homology`` maps n to computed Voronoi homology; ``extra_facts`` supplies
    facts not computed here (e.g. the bundled rank-4 values).
    """
    ring = get_ring(ring)
    label = RING_LABEL[ring.disc]
    disabled = set(disabled)
    facts = axioms(ring, disabled) + facts_from_homology(ring, homology, cells)
    computed = {f.id for f in facts}
    facts += [f for f in extra_facts if f.id not in computed]
    led = deduce(facts)

    regs = [regularity_check(ring, 2), regularity_check(ring, 3)]
    h5 = bq(5)
    if led.is_Z(h5) and "K4:finite" in led.facts:
        b = hurewicz_bound(4)
        led.add(LedgerFact("K4", Provenance(
            "deduced", f"Hurewicz: kernel of K4 -> H5(BQ) annihilated by {HUREWICZ_ANNIHILATOR[4]}, "
                       f"image is a finite subgroup of Z mod S_{{p<={b}}}",
            (h5, "K4:finite")), group=FGAbGroupModSerre(0, (), b),
            statement=f"K4({label}) in S_{{p<={b}}}"))
        primes = {p for p in (2, 3) if p <= b}
        premises = ["K4"]
        for r in regs:
            if r.theorem and r.theorem in led.facts:
                primes.discard(r.p)
                rid = f"regularity:p={r.p}"
                led.add(LedgerFact(rid, Provenance("deduced", r.conclusion, (r.theorem,)),
                                   statement=f"no {r.p}-torsion in K4({label})"))
                premises.append(rid)
        if not primes:
            conclusion = f"K4({label}) is trivial"
        elif len(primes) == 1:
            conclusion = f"K4({label}) is a finite abelian {primes.pop()}-group"
        else:
            conclusion = f"K4({label}) is a finite group in S_{{p<={b}}}"
        led.add(LedgerFact("K4:structure", Provenance("deduced", "combine prime bounds", tuple(premises)),
                           statement=conclusion))
    else:
        conclusion = f"K4({label}) undetermined"
        led.add(LedgerFact("K4:structure", Provenance("deduced", "missing premises", ()),
                           statement=conclusion))
    return K4Report(label, conclusion, led, regs)
