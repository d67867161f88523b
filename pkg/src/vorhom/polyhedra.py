"""Exact dual description of rational polyhedral cones.

Facets of cone(g_1, ..., g_m) are the extreme rays of the dual cone
{y : y.g_i >= 0}; we get them with the double description method in
integer arithmetic, using the combinatorial adjacency test.
Cones that are not full dimensional are first moved into coordinates on
their linear span.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg


def _scale_int(v) -> tuple[int, ...]:
    return linalg.primitive(v)


def _extreme_rays_of_dual(gens: list[tuple[int, ...]], k: int) -> list[tuple[int, ...]]:
    """Extreme rays of {y in Q^k : y.g >= 0 for g in gens}; gens span Q^k."""
    m = len(gens)
    # initial simplex from k independent generators
    order: list[int] = []
    chart = linalg.SpanChart(gens)
    order = list(chart.basis_index)
    if len(order) != k:
        raise ValueError("generators do not span the ambient space")
    B = [gens[i] for i in order]
    Binv = linalg.inverse(B)  # columns are the initial rays
    rays = []
    tight = []
    for j in range(k):
        r = _scale_int([Binv[i][j] for i in range(k)])
        rays.append(r)
        mask = 0
        for t, i in enumerate(order):
            if t != j:
                mask |= 1 << i
        tight.append(mask)
    rest = [i for i in range(m) if i not in set(order)]
    for i in rest:
        g = gens[i]
        vals = [linalg.dot(r, g) for r in rays]
        pos = [t for t, v in enumerate(vals) if v > 0]
        neg = [t for t, v in enumerate(vals) if v < 0]
        zer = [t for t, v in enumerate(vals) if v == 0]
        bit = 1 << i
        new_rays, new_tight = [], []
        for t in pos:
            new_rays.append(rays[t])
            new_tight.append(tight[t])
        for t in zer:
            new_rays.append(rays[t])
            new_tight.append(tight[t] | bit)
        if neg:
            for p in pos:
                for q in neg:
                    common = tight[p] & tight[q]
                    if bin(common).count("1") < k - 2:
                        continue
                    adjacent = True
                    for s in range(len(rays)):
                        if s != p and s != q and (tight[s] & common) == common:
                            adjacent = False
                            break
                    if not adjacent:
                        continue
                    vp, vq = vals[p], vals[q]
                    r = [vp * a - vq * b for a, b in zip(rays[q], rays[p])]
                    new_rays.append(_scale_int(r))
                    new_tight.append(common | bit)
        rays, tight = new_rays, new_tight
    return sorted(set(rays))


@dataclass
class RationalCone:
    """Cone spanned by rational generators in Q^ambient_dim.

    When the generators do not span the ambient space, ``facet_normals`` are
    expressed in coordinates on the span (with respect to ``chart``).
    """
    generators: list
    ambient_dim: int

    def __post_init__(self):
        if not self.generators:
            raise ValueError("cone needs at least one generator")
        self.chart = linalg.SpanChart(self.generators)
        self.dim = self.chart.dim
        self.full = self.dim == self.ambient_dim
        if self.full:
            self.local = [tuple(_scale_int(g)) for g in self.generators]
        else:
            self.local = [_scale_int(self.chart.coords(g)) for g in self.generators]
        self._normals = None

    @property
    def facet_normals(self) -> list[tuple[int, ...]]:
        if self._normals is None:
            if self.dim == 1:
                self._normals = [(1,)]
            else:
                self._normals = _extreme_rays_of_dual(self.local, self.dim)
        return self._normals

    def pairing(self, normal, i: int):
        return linalg.dot(normal, self.local[i])

    def support_indices(self, normal) -> list[int]:
        vals = [self.pairing(normal, i) for i in range(len(self.local))]
        if any(v < 0 for v in vals):
            raise ValueError("normal is not a supporting functional of the cone")
        return [i for i, v in enumerate(vals) if v == 0]

    def facets(self) -> list[tuple[tuple[int, ...], list[int]]]:
        """(normal, indices of generators on the facet) for every facet."""
        return [(nrm, self.support_indices(nrm)) for nrm in self.facet_normals]

    def contains(self, point) -> bool:
        """Membership test for a point of the ambient space."""
        if not self.chart.contains(point):
            return False
        loc = point if self.full else self.chart.coords(point)
        return all(linalg.dot(nrm, loc) >= 0 for nrm in self.facet_normals)

    def to_json(self) -> str:
        return json.dumps({
            "ambient_dim": self.ambient_dim,
            "generators": [list(map(int, _scale_int(g))) for g in self.generators],
            "facet_normals": [list(n) for n in self.facet_normals],
        })


def dual_description(generators: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Facet normals of the cone spanned by ``generators`` (integer, content 1,
    sorted).  For lower dimensional cones, normals live on the span."""
    gens = [list(g) for g in generators]
    return RationalCone(gens, len(gens[0])).facet_normals


def face_support(cone: RationalCone, normal) -> list:
    return [cone.generators[i] for i in cone.support_indices(normal)]
