"""``vorhom`` command line.

Exit codes: 0 success, 2 invalid input, 3 resource or cache limit,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from importlib import resources

from . import checks, ktheory
from .grouptheory import GroupTooLarge
from .homology import SparseIntMatrix, smith_normal_form
from .ring import get_ring, prime_factors
from .store import Cache, CacheMiss, dumps, record_cells, record_counts, record_homology
from .voronoi import ResourceLimitExceeded

EXIT_OK, EXIT_INPUT, EXIT_LIMIT, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("vorhom")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    ring: str | None = None
    rank: int | None = None
    max_dim: int | None = None
    jobs: int = 1
    cache_dir: str | None = None
    fmt: str = "table"
    deterministic: bool = False
    cache_only: bool = False
    use_cache: bool = True

    def __post_init__(self):
        if self.deterministic:
            self.jobs = 1
        if self.jobs < 1:
            raise InputError("--jobs must be positive")
        if self.ring is not None:
            try:
                self.ring = get_ring(self.ring).name
            except (KeyError, ValueError) as exc:
                raise InputError(f"unknown ring {self.ring!r}") from exc
        if self.rank is not None and not 1 <= self.rank <= 6:
            raise InputError("--rank must be between 1 and 6")

    def cache(self) -> Cache:
        return Cache(self.cache_dir, enabled=self.use_cache, cache_only=self.cache_only)


# -- rendering -------------------------------------------------------------------

def render_table(headers: list, rows: list) -> str:
    cells = [[str(h) for h in headers]] + [[str(x) for x in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_csv(headers: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


def emit(cfg: RunConfig, obj, headers: list | None = None, rows: list | None = None, text: str | None = None):
    if cfg.fmt == "json":
        sys.stdout.write(dumps(obj))
    elif cfg.fmt == "csv" and headers is not None:
        sys.stdout.write(render_csv(headers, rows))
    elif text is not None:
        sys.stdout.write(text)
    elif headers is not None:
        sys.stdout.write(render_table(headers, rows))
    else:
        sys.stdout.write(dumps(obj))


def _progress(d, reps):
    log.info("level %d: %d classes (%d orientable)", d, len(reps), sum(bool(c.orientable) for c in reps))


def _need(cfg: RunConfig, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise InputError(f"--{n.replace('_', '-')} is required")


def _complex(cfg: RunConfig) -> dict:
    _need(cfg, "ring", "rank")
    return cfg.cache().complex(cfg.ring, cfg.rank, cfg.max_dim, progress=_progress)


# -- subcommands -------------------------------------------------------------------

def cmd_perfect(cfg: RunConfig, args) -> int:
    _need(cfg, "ring", "rank")
    rec = cfg.cache().perfect(cfg.ring, cfg.rank)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(rec))
    rows = []
    for i, P in enumerate(rec["perfect_forms"]):
        rows.append([i, P["min_value"], P["full_count"], len(P["min_vectors"]),
                     P["automorphism_group_order"], " ".join(map(str, P["neighbors"]))])
    emit(cfg, rec, ["class", "min", "min vectors", "orbits", "|Aut|", "neighbors"], rows)
    return EXIT_OK


def cmd_complex(cfg: RunConfig, args) -> int:
    rec = _complex(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(rec))
    counts = record_counts(rec)
    rows = [[d, a, b] for d, (a, b) in sorted(counts.items())]
    emit(cfg, rec, ["d", "Sigma_d*", "Sigma_d"], rows)
    return EXIT_OK


def cmd_homology(cfg: RunConfig, args) -> int:
    if cfg.max_dim is not None:
        raise InputError("homology needs the full complex; drop --max-dim")
    rec = _complex(cfg)
    h = record_homology(rec)
    if args.serre_bound is not None:
        if args.serre_bound < 2:
            raise InputError("--serre-bound must be at least 2")
        if args.serre_bound < h.serre_bound:
            log.warning("stabilizer primes go up to %d; statements mod S_{p<=%d} are not justified",
                        h.serre_bound, args.serre_bound)
        h.serre_bound = args.serre_bound
    rows = []
    for m in sorted(h.exact):
        rows.append([m, m - h.n + 1, str(h.exact[m]), str(h.groups[m]), " ".join(map(str, h.divisors.get(m + 1, [])))])
    emit(cfg, h.to_json(), ["Vor degree", "St degree", "exact", f"mod S_p<={h.serre_bound}", "divisors in"], rows)
    return EXIT_OK


def cmd_stabilizers(cfg: RunConfig, args) -> int:
    rec = _complex(cfg)
    rows, out = [], []
    for d in sorted(rec["levels"], key=int):
        if args.dim is not None and int(d) != args.dim:
            continue
        for i, c in enumerate(rec["levels"][d]):
            primes = sorted(prime_factors(c["stabilizer_order"]))
            kernel = c["orientation_preserving_order"]
            ab = c["orientation_preserving_abelianization"]
            index = c["stabilizer_order"] // kernel
            row = [int(d), i, len(c["support"]), c["stabilizer_order"], " ".join(map(str, primes)),
                   "yes" if c["orientable"] else "no", index, " + ".join(f"Z/{t}" for t in ab) or "0"]
            rows.append(row)
            out.append({"dim": int(d), "index": i, "support_size": len(c["support"]),
                        "stabilizer_order": c["stabilizer_order"], "primes": primes,
                        "orientable": c["orientable"], "orientation_index": index,
                        "orientation_kernel_abelianization": ab})
    emit(cfg, {"ring": rec["ring"], "rank": rec["rank"], "cells": out},
         ["d", "class", "|support|", "|Stab|", "primes", "orientable", "index", "H1(kernel)"], rows)
    return EXIT_OK


def _load_matrix(path: str) -> SparseIntMatrix:
    try:
        with (sys.stdin if path == "-" else open(path)) as fh:
            data = json.load(fh)
        M = SparseIntMatrix.from_json(data)
    except (OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"cannot read matrix from {path}: {exc}") from exc
    if any(not isinstance(v, int) for _, _, v in M.triplets):
        raise InputError("matrix entries must be integers")
    return M


def cmd_snf(cfg: RunConfig, args) -> int:
    path = args.infile or args.matrix
    if path is None:
        raise InputError("give a matrix file with --in (or - for stdin)")
    M = _load_matrix(path)
    if args.transforms:
        divs, U, V = smith_normal_form(M, transforms=True)
        obj = {"rows": M.rows, "cols": M.cols, "divisors": divs, "U": U, "V": V}
    else:
        divs = smith_normal_form(M)
        obj = {"rows": M.rows, "cols": M.cols, "divisors": divs}
    obj["rank"] = len(divs)
    text = f"{M.rows}x{M.cols}, rank {len(divs)}\nelementary divisors: {' '.join(map(str, divs))}\n"
    if args.transforms:
        text += "U = " + json.dumps(U) + "\nV = " + json.dumps(V) + "\n"
    emit(cfg, obj, text=text)
    return EXIT_OK


def _disabled_axioms(args) -> set[str]:
    disabled = set(args.disable or ())
    if args.axioms:
        try:
            with open(args.axioms) as fh:
                spec = json.load(fh)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read axiom file: {exc}") from exc
        if isinstance(spec, list):
            disabled |= set(ktheory.AXIOM_FAMILIES) - set(spec)
        elif isinstance(spec, dict):
            disabled |= set(spec.get("disabled", ()))
        else:
            raise InputError("axiom file must be a list of enabled families or {\"disabled\": [...]}")
    unknown = disabled - set(ktheory.AXIOM_FAMILIES)
    if unknown:
        raise InputError(f"unknown axiom families {sorted(unknown)}; known: {', '.join(ktheory.AXIOM_FAMILIES)}")
    return disabled


def cmd_ktheory(cfg: RunConfig, args) -> int:
    _need(cfg, "ring")
    disabled = _disabled_axioms(args)
    cache = cfg.cache()
    H = {n: record_homology(cache.complex(cfg.ring, n, progress=_progress)) for n in (2, 3)}
    extra, cells = [], None
    if args.paper_values:
        extra = ktheory.facts_from_paper_values(cfg.ring)
    else:
        # rank-4 facts only from an already cached computation
        try:
            rec4 = Cache(cfg.cache_dir, cache_only=True, enabled=cfg.use_cache).complex(cfg.ring, 4)
            H[4] = record_homology(rec4)
            cells = {4: record_cells(rec4)}
        except CacheMiss:
            log.warning("no cached rank-4 complex; pass --paper-values to use the bundled values")
    rep = ktheory.k4_report(cfg.ring, H, extra, disabled, cells)
    text = rep.conclusion + "\n"
    if args.report:
        text += "\nderivation:\n" + rep.tree()
        text += "\nregularity:\n" + "".join(
            f"  p={r.p}: {r.splitting}, regular={r.regular}: {r.conclusion}\n" for r in rep.regularity)
    emit(cfg, rep.to_json(), text=text)
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    rec = _complex(cfg)
    counts = record_counts(rec)
    ds = sorted(counts)
    headers = ["d"] + ds
    rows = [["Sigma_d*"] + [counts[d][0] for d in ds], ["Sigma_d"] + [counts[d][1] for d in ds]]
    h = record_homology(rec)
    obj = {"ring": rec["ring"], "rank": rec["rank"], "perfect_forms": len(rec["perfect_forms"]),
           "cells": {str(d): {"all": a, "orientable": b} for d, (a, b) in counts.items()},
           "homology": h.to_json() if h else None}
    if cfg.fmt == "table":
        text = (f"GL{rec['rank']}({ktheory.RING_LABEL[get_ring(rec['ring']).disc]}): "
                f"{len(rec['perfect_forms'])} perfect form class(es)\n\n" + render_table(headers, rows))
        if h is not None:
            text += f"\nhomology (torsion primes <= {h.serre_bound} ignored on the right):\n"
            hrows = [[m, m - h.n + 1, str(h.exact[m]), str(h.groups[m])] for m in sorted(h.exact)]
            text += render_table(["H_m(Vor)", "H_m(GL,St)", "exact", "mod S"], hrows)
        sys.stdout.write(text)
    else:
        emit(cfg, obj, headers, rows)
    return EXIT_OK


def verify_schema() -> dict:
    with resources.files("vorhom.data").joinpath("verify_schema.json").open() as fh:
        return json.load(fh)


def cmd_verify(cfg: RunConfig, args) -> int:
    import jsonschema

    cache = cfg.cache()
    quiet = cfg.fmt == "json"
    progress = lambda msg: print(msg, flush=True)  # noqa: E731
    if quiet:
        progress = lambda msg: print(msg, file=sys.stderr, flush=True)  # noqa: E731
    results = checks.run_checks(cache, args.tier, progress)
    passed = all(r.passed for r in results)
    obj = {"tier": args.tier, "passed": passed, "checks": [r.to_json() for r in results]}
    if quiet:
        jsonschema.validate(obj, verify_schema())
        sys.stdout.write(dumps(obj))
    else:
        failed = [r.id for r in results if not r.passed]
        sys.stdout.write("all checks passed\n" if passed else f"FAILED: {', '.join(failed)}\n")
    return EXIT_OK if passed else EXIT_VERIFY


# -- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", help="gaussian (Z[i]) or eisenstein (Z[rho])")
    common.add_argument("--rank", type=int, help="n for GL_n")
    common.add_argument("--max-dim", type=int, help="build only the top max-dim+1 levels")
    common.add_argument("--jobs", type=int, default=1, help="worker cap (the computation is serial)")
    common.add_argument("--cache-dir", help="cache location (default $VORHOM_CACHE or .vorhom-cache)")
    common.add_argument("--cache-only", action="store_true", help="fail with exit 3 on a cache miss")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--format", dest="fmt", choices=("table", "json", "csv"), default="table")
    common.add_argument("--deterministic", action="store_true", help="force --jobs 1")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="vorhom", description="Voronoi complexes for GL_n over Z[i] and Z[rho]")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("perfect", parents=[common], help="enumerate perfect form classes")
    sp.add_argument("--out", help="also write the perfect forms to this file")
    sp = sub.add_parser("complex", parents=[common], help="build the cell complex")
    sp.add_argument("--out", help="also write the complex record to this file")
    sp = sub.add_parser("homology", parents=[common], help="homology of the Voronoi complex")
    sp.add_argument("--serre-bound", type=int, help="report torsion modulo S_{p<=K} (default: stabilizer bound)")
    sp = sub.add_parser("stabilizers", parents=[common], help="cell stabilizer orders")
    sp.add_argument("--dim", type=int)
    sp = sub.add_parser("snf", parents=[common], help="Smith normal form of an integer matrix")
    sp.add_argument("matrix", nargs="?", help="JSON file (dense list of rows or {rows, cols, triplets}); - for stdin")
    sp.add_argument("--in", dest="infile", help="same as the positional matrix argument")
    sp.add_argument("--transforms", action="store_true")
    sp = sub.add_parser("ktheory", parents=[common], help="K4 deduction ledger")
    sp.add_argument("--report", action="store_true", help="print the derivation tree")
    sp.add_argument("--axioms", help="JSON list of enabled axiom families, or {\"disabled\": [...]}")
    sp.add_argument("--disable", action="append", help="disable one axiom family (repeatable)")
    sp.add_argument("--paper-values", action="store_true", help="use the bundled rank-4 values")
    sub.add_parser("report", parents=[common], help="cell tables and homology")
    sp = sub.add_parser("verify", parents=[common], help="run the tiered self-checks")
    sp.add_argument("--tier", choices=("default", "extended"), default="default")
    return p


COMMANDS = {
    "perfect": cmd_perfect, "complex": cmd_complex, "homology": cmd_homology,
    "stabilizers": cmd_stabilizers, "snf": cmd_snf, "ktheory": cmd_ktheory,
    "report": cmd_report, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig(args.ring, args.rank, args.max_dim, args.jobs, args.cache_dir, args.fmt,
                        args.deterministic, args.cache_only, not args.no_cache)
        return COMMANDS[args.command](cfg, args)
    except InputError as exc:
        print(f"vorhom: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CacheMiss as exc:
        print(f"vorhom: cache miss: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ResourceLimitExceeded, GroupTooLarge, MemoryError) as exc:
        print(f"vorhom: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
