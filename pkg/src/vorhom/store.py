"""Serialized complex records and the on-disk cache.

A record holds everything the reporting commands need: perfect forms, cell
classes per level, boundary matrices and homology.  Records are plain JSON
and are written with sorted keys so that equal records are equal bytes.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .homology import HomologyResult, FGAbGroupModSerre, SparseIntMatrix, homology_of_complex
from .forms import HermForm
from .ring import get_ring
from .voronoi import (VoronoiChainComplex, build_cell_complex, enumerate_perfect_forms,
                      make_perfect_class)

FORMAT_VERSION = 3
DEFAULT_CACHE = ".vorhom-cache"


class CacheMiss(LookupError):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cache_dir(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get("VORHOM_CACHE") or DEFAULT_CACHE)


def cache_key(kind: str, ring, n: int, max_dim: int | None = None) -> str:
    ring = get_ring(ring)
    md = "" if max_dim is None else f"-d{max_dim}"
    return f"{kind}-{ring.name}-n{n}{md}-v{FORMAT_VERSION}.json"


def perfect_record(ring, n: int, forms) -> dict:
    ring = get_ring(ring)
    return {
        "format_version": FORMAT_VERSION,
        "ring": ring.name,
        "rank": n,
        "perfect_forms": [P.to_json() for P in forms],
    }


def complex_record(cx: VoronoiChainComplex, max_dim: int | None = None) -> dict:
    rec = perfect_record(cx.ring, cx.n, cx.perfect_forms)
    rec["max_dim"] = max_dim
    rec["levels"] = {str(d): [c.to_json() for c in cells] for d, cells in sorted(cx.levels.items())}
    rec["incidences"] = {str(d): [[i.cell, i.face, i.sign, i.count] for i in inc]
                         for d, inc in sorted(cx.incidences.items())}
    rec["discarded_faces"] = {str(d): k for d, k in sorted(cx.discarded.items())}
    if max_dim is None:
        rec["boundaries"] = {str(d): B.to_json() for d, B in sorted(cx.boundary.items())}
        rec["homology"] = homology_of_complex(cx).to_json()
    else:
        rec["boundaries"] = {}
        rec["homology"] = None
    return rec


def record_counts(rec: dict) -> dict:
    """d -> (|Sigma_d*|, |Sigma_d|)."""
    return {int(d): (len(cells), sum(1 for c in cells if c["orientable"]))
            for d, cells in rec["levels"].items()}


def record_boundaries(rec: dict) -> dict:
    return {int(d): SparseIntMatrix.from_json(B) for d, B in rec["boundaries"].items()}


def record_cells(rec: dict) -> dict:
    """d -> [(stabilizer order, orientation-kernel abelianization)] for every class."""
    return {int(d): [(c["stabilizer_order"], tuple(c.get("orientation_preserving_abelianization", ())))
                     for c in cells] for d, cells in rec["levels"].items()}


def record_homology(rec: dict) -> HomologyResult | None:
    h = rec.get("homology")
    if h is None:
        return None
    return HomologyResult(
        h["n"], h["serre_bound"],
        {int(m): FGAbGroupModSerre.from_json(G) for m, G in h["voronoi"].items()},
        {int(d): v for d, v in h["divisors"].items()})


class Cache:
    def __init__(self, root: str | Path | None = None, enabled: bool = True, cache_only: bool = False):
        self.root = cache_dir(str(root) if root else None)
        self.enabled = enabled
        self.cache_only = cache_only

    def _path(self, key: str) -> Path:
        return self.root / key

    def load(self, key: str) -> dict | None:
        p = self._path(key)
        if not self.enabled or not p.exists():
            return None
        with p.open() as fh:
            rec = json.load(fh)
        if rec.get("format_version") != FORMAT_VERSION:
            return None
        return rec

    def save(self, key: str, rec: dict):
        if not self.enabled:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = self._path(key + ".tmp")
        tmp.write_text(dumps(rec))
        tmp.replace(self._path(key))

    def get_or_build(self, key: str, build):
        rec = self.load(key)
        if rec is not None:
            return rec
        if self.cache_only:
            raise CacheMiss(f"{key} not in cache {self.root}")
        rec = build()
        self.save(key, rec)
        return rec

    def perfect(self, ring, n: int) -> dict:
        return self.get_or_build(cache_key("perfect", ring, n),
                                 lambda: perfect_record(ring, n, enumerate_perfect_forms(ring, n)))

    def complex(self, ring, n: int, max_dim: int | None = None, progress=None) -> dict:
        def build():
            # reuse the cached enumeration; only minimal vectors are recomputed
            forms = []
            for P in self.perfect(ring, n)["perfect_forms"]:
                cls = make_perfect_class(HermForm.from_json(P["form"]))
                cls.facet_orbits = [tuple(idx) for idx in P.get("facet_orbits", ())] or None
                forms.append(cls)
            cx = build_cell_complex(ring, n, max_dim=max_dim, perfect_forms=forms, progress=progress)
            return complex_record(cx, max_dim)
        return self.get_or_build(cache_key("complex", ring, n, max_dim), build)
