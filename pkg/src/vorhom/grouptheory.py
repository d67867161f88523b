"""Finite matrix groups over Z[i] / Z[rho]: closure, abelian invariants,
orientation kernels and the q = 1 column of the equivariant spectral
sequence (modulo 2-groups)."""
from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Sequence

from . import linalg
from .homology import FGAbGroupModSerre, smith_normal_form
from .ring import Ring, get_ring

DEFAULT_LIMIT = 200_000


class GroupTooLarge(RuntimeError):
    pass


def _key(g):
    return tuple((x.a, x.b) for row in g for x in row)


def closure(generators: Sequence, limit: int = DEFAULT_LIMIT, mul: Callable | None = None,
            identity=None) -> list:
    """All elements of the group generated by ``generators``, in BFS order
    starting from the identity."""
    mul = mul or linalg.qmatmul
    if identity is None:
        g0 = generators[0]
        identity = linalg.qidentity(len(g0), g0[0][0].disc)
    elems = [identity]
    seen = {_hashable(identity)}
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for s in generators:
            y = mul(x, s)
            h = _hashable(y)
            if h not in seen:
                seen.add(h)
                elems.append(y)
                queue.append(y)
                if len(elems) > limit:
                    raise GroupTooLarge(f"group closure exceeded {limit} elements")
    return elems


def _hashable(g):
    if isinstance(g, tuple) and g and isinstance(g[0], tuple):
        return _key(g)
    return g


class FiniteMatrixGroup:
    def __init__(self, ring, n: int, generators: Sequence, elements: Sequence | None = None,
                 limit: int = DEFAULT_LIMIT):
        self.ring = get_ring(ring)
        self.n = n
        self.generators = list(generators)
        self.limit = limit
        self._elements = list(elements) if elements is not None else None
        self._keys = None

    @classmethod
    def from_elements(cls, ring, n: int, elements: Sequence) -> FiniteMatrixGroup:
        """Wrap a known complete element list; a generating set is extracted."""
        ring = get_ring(ring)
        elements = sorted(elements, key=_key)
        return cls(ring, n, generating_set(elements), elements)

    @property
    def elements(self) -> list:
        if self._elements is None:
            if not self.generators:
                self._elements = [linalg.qidentity(self.n, self.ring.disc)]
            else:
                self._elements = closure(self.generators, self.limit)
        return self._elements

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return self.order

    def __contains__(self, g) -> bool:
        if self._keys is None:
            self._keys = {_key(x) for x in self.elements}
        return _key(g) in self._keys

    def subgroup(self, predicate: Callable) -> FiniteMatrixGroup:
        elems = [g for g in self.elements if predicate(g)]
        return FiniteMatrixGroup(self.ring, self.n, generating_set(elems), elems, self.limit)

    def __repr__(self):
        return f"FiniteMatrixGroup(order={self.order}, n={self.n}, {self.ring.name})"


def generating_set(elements: Sequence) -> list:
    """Greedy generating set of the group whose full element list is given."""
    if not elements:
        return []
    n = len(elements[0])
    disc = elements[0][0][0].disc
    ident = linalg.qidentity(n, disc)
    # permutation representation on the element list makes closure cheap
    index = {_key(g): i for i, g in enumerate(elements)}
    gens: list = []
    reached = {index[_key(ident)]} if _key(ident) in index else set()
    perms: dict = {}

    def right_mult_perm(s):
        return [index[_key(linalg.qmatmul(g, s))] for g in elements]

    for g in elements:
        i = index[_key(g)]
        if i in reached:
            continue
        gens.append(g)
        perms[len(gens) - 1] = right_mult_perm(g)
        # BFS over reached set with all generator permutations
        start = index[_key(ident)]
        reached = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for p in perms.values():
                y = p[x]
                if y not in reached:
                    reached.add(y)
                    queue.append(y)
        if len(reached) == len(elements):
            break
    return gens


def abelian_invariants_from_cayley(n_elems: int, identity: int, gen_perms: list[list[int]]) -> list[int]:
    """Invariants of G^ab from the right Cayley graph of G.

    Each non-tree edge of a BFS tree closes a loop whose generator exponent
    vector is a relation; these loops generate all relations, so Z^k modulo
    their span is the abelianization.
    """
    k = len(gen_perms)
    word: dict[int, tuple] = {identity: (0,) * k}
    queue = deque([identity])
    relations = set()
    while queue:
        x = queue.popleft()
        for j, p in enumerate(gen_perms):
            y = p[x]
            e = list(word[x])
            e[j] += 1
            e = tuple(e)
            if y not in word:
                word[y] = e
                queue.append(y)
            elif word[y] != e:
                relations.add(tuple(a - b for a, b in zip(e, word[y])))
    if len(word) != n_elems:
        raise ValueError("generators do not reach every element")
    if k == 0:
        return []
    rel = sorted(relations) or [(0,) * k]
    divisors = smith_normal_form([list(r) for r in rel])
    inv = [d for d in divisors if d != 1]
    inv += [0] * (k - len(divisors))
    return sorted(inv, key=lambda d: (d == 0, d))


def abelianization(G: FiniteMatrixGroup) -> FGAbGroupModSerre:
    """G / [G, G] as torsion coefficients (G finite, so rank 0)."""
    elems = G.elements
    index = {_key(g): i for i, g in enumerate(elems)}
    gens = G.generators or generating_set(elems)
    mult = [[index[_key(linalg.qmatmul(g, s))] for g in elems] for s in gens]  # g*s
    ident = index[_key(linalg.qidentity(G.n, G.ring.disc))]
    invariants = abelian_invariants_from_cayley(len(elems), ident, mult)
    return FGAbGroupModSerre(rank=0, torsion=tuple(d for d in invariants if d > 1), serre_bound=1)


def _propagate_sign(stab: FiniteMatrixGroup, character: Callable) -> dict:
    """Values of a sign homomorphism on every element, from its values on the generators."""
    gens = [(g, character(g)) for g in stab.generators]
    ident = linalg.qidentity(stab.n, stab.ring.disc)
    sign = {_key(ident): 1}
    queue = deque([(ident, 1)])
    while queue:
        h, s = queue.popleft()
        for g, t in gens:
            x = linalg.qmatmul(h, g)
            k = _key(x)
            if k not in sign:
                sign[k] = s * t
                queue.append((x, s * t))
            elif sign[k] != s * t:
                raise ValueError("character is not a homomorphism")
    return sign


def orientation_preserving_subgroup(stab: FiniteMatrixGroup, character: Callable,
                                    homomorphism: bool = False) -> FiniteMatrixGroup:
    """Kernel of an orientation character (index 1 or 2).

    With homomorphism=True the character is only evaluated on generators and
    extended along the Cayley graph, which is much cheaper for large groups.
    """
    if homomorphism:
        sign = _propagate_sign(stab, character)
        elems = [g for g in stab.elements if sign[_key(g)] == 1]
        odd = [g for g in stab.generators if sign[_key(g)] == -1]
        if not odd:
            return FiniteMatrixGroup(stab.ring, stab.n, stab.generators, elems, stab.limit)
        # Schreier generators for the transversal {1, t}
        t = odd[0]
        t_inv = linalg.qsimplify(linalg.qinverse(t))
        gens = {}
        for s in stab.generators:
            if sign[_key(s)] == 1:
                cands = (s, linalg.qmatmul(linalg.qmatmul(t, s), t_inv))
            else:
                cands = (linalg.qmatmul(s, t_inv), linalg.qmatmul(t, s))
            for g in cands:
                g = linalg.qsimplify(g)
                gens.setdefault(_key(g), g)
        gens.pop(_key(linalg.qidentity(stab.n, stab.ring.disc)), None)
        sub = FiniteMatrixGroup(stab.ring, stab.n, list(gens.values()), elems, stab.limit)
    else:
        sub = stab.subgroup(lambda g: character(g) == 1)
    if stab.order % sub.order or stab.order // sub.order not in (1, 2):
        raise ValueError("orientation character has index other than 1 or 2")
    return sub


def e1_term_h1(stab: FiniteMatrixGroup, character: Callable) -> FGAbGroupModSerre:
    """H_1(stab, Z_orientation) modulo 2-groups, via the orientation kernel."""
    ab = abelianization(orientation_preserving_subgroup(stab, character))
    return ab.reduce(2)


def permutation_matrix(perm: Sequence[int], ring) -> tuple:
    ring = get_ring(ring)
    n = len(perm)
    return tuple(tuple(ring(int(perm[j] == i)) for j in range(n)) for i in range(n))
