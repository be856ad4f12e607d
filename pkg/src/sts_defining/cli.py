"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 domain error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import catalog as catalog_mod
from .coloring import PALETTE, PreconditionViolated, format_partial, is_proper, pattern
from .defining import (
    DEFAULT_BUDGET,
    BudgetExhausted,
    DefiningSetRecord,
    NotDefining,
    classify_strength,
    is_defining,
    is_minimal_defining,
    run_search,
    unique_extension,
)
from .designs import (
    BUILTIN_NAMES,
    NotADesign,
    TripleSystem,
    UnknownName,
    bose,
    builtin,
    cyclic_sts,
    parse_text,
    skolem,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_BUDGET = 0, 1, 2, 3

SPECTRA_SYSTEMS = {7: ["sts7"], 9: ["sts9"], 13: ["sts13-1", "sts13-2"]}


class UsageError(Exception):
    pass


@dataclass
class RunResult:
    command: dict
    inputs_digest: str
    records: list[DefiningSetRecord] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "records": [r.to_json() for r in self.records],
            "timings": self.timings,
            "budget": self.budget,
            "status": self.status,
        }
        out.update(self.extra)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


def strip_timings(doc: dict) -> dict:
    """The deterministic part of a RunResult document."""
    return {k: v for k, v in doc.items() if k != "timings"}


def _digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def _load_catalog(path: str | None) -> catalog_mod.Catalog:
    return _cached_catalog(str(path or catalog_mod.default_path()))


@lru_cache(maxsize=4)
def _cached_catalog(path: str) -> catalog_mod.Catalog:
    return catalog_mod.load_catalog(path)


def resolve_system(ref: str, catalog_path: str | None = None) -> tuple[TripleSystem, str]:
    """``sts9`` | ``cat:40`` | path to a text-format file."""
    if ref in BUILTIN_NAMES:
        return builtin(ref), ref
    if ref.startswith("cat:"):
        try:
            sid = int(ref[4:])
        except ValueError:
            raise UsageError(f"bad catalog reference {ref!r}") from None
        cat = _load_catalog(catalog_path)
        try:
            return cat[sid], ref
        except KeyError as exc:
            raise UsageError(str(exc)) from None
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"{ref!r} is neither a builtin ({', '.join(BUILTIN_NAMES)}), cat:<id>, nor a file")
    return parse_text(path.read_text()), ref


def _parse_triple(text: str) -> tuple[int, int, int]:
    parts = [int(x) for x in text.replace(" ", "").split(",") if x]
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated integers, got {text!r}")
    return (parts[0], parts[1], parts[2])


def parse_partial(text: str, v: int) -> dict[int, int]:
    """``R..G.Y`` (dots uncolored) or ``0:R,3:G``."""
    text = text.strip()
    if ":" in text:
        out = {}
        for item in text.split(","):
            p, c = item.split(":")
            out[int(p)] = PALETTE.index(c.strip().upper())
        return out
    if len(text) != v:
        raise UsageError(f"partial coloring has length {len(text)}, system has {v} points")
    return {i: PALETTE.index(ch.upper()) for i, ch in enumerate(text) if ch not in ".-_"}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------


def cmd_construct(args: argparse.Namespace) -> int:
    if args.cyclic:
        v, *bases = args.cyclic
        system = cyclic_sts(int(v), [_parse_triple(b) for b in bases])
    elif args.bose is not None:
        system = bose(args.bose)
    elif args.skolem is not None:
        system = skolem(args.skolem)
    else:
        system = builtin(args.builtin)
    text = system.to_text()
    summary = f"v={system.v} b={system.b} r={system.r}"
    if args.out:
        Path(args.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    system, name = resolve_system(args.system, args.catalog)
    kind = "minimum" if args.mode == "min" else "largest-minimal"
    pat = _parse_triple(args.pattern) if args.pattern else None
    result = RunResult(
        command={"name": "search", "system": name, "mode": kind, "pattern": list(pat) if pat else None},
        inputs_digest=_digest(system.to_text()),
        budget={"limit": args.budget, "unit": "lattice cells"},
    )
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        record, used = run_search(system, kind, pat, args.budget, args.jobs, system_id=name)
        result.records.append(record)
        result.budget["used"] = used
    except BudgetExhausted as exc:
        result.status = "budget-exhausted"
        result.budget["used"] = exc.proven << system.v
        result.extra["partial"] = {"best_bound": exc.best, "representatives_done": exc.proven, "representatives_total": exc.total}
        code = EXIT_BUDGET
    result.timings = {"seconds": round(time.perf_counter() - t0, 3), "jobs": args.jobs}
    _emit(result.dumps(), args.out)
    return code


def default_tables_path() -> Path:
    return Path(str(resources.files("sts_defining") / "data" / "reference_tables.json"))


@dataclass
class RowCheck:
    row: int
    system_id: str
    kind: str
    checks: dict[str, bool | None]

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.checks.values())


def verify_rows(rows: Sequence[DefiningSetRecord], catalog_path: str | None = None) -> list[RowCheck]:
    cache: dict[str, TripleSystem] = {}
    out = []
    for i, rec in enumerate(rows, start=1):
        if rec.system_id not in cache:
            cache[rec.system_id] = resolve_system(rec.system_id, catalog_path)[0]
        system = cache[rec.system_id]
        checks: dict[str, bool | None] = {}
        checks["proper"] = is_proper(system, rec.witness)
        checks["defining"] = is_defining(system, rec.partial)
        checks["minimal"] = checks["defining"] and is_minimal_defining(system, rec.partial)
        if checks["defining"]:
            checks["witness"] = tuple(unique_extension(system, rec.partial)) == tuple(rec.witness)
            checks["strength"] = None if rec.strength is None else classify_strength(system, rec.partial) == rec.strength
        else:
            checks["witness"] = False
            checks["strength"] = None if rec.strength is None else False
        checks["pattern"] = tuple(rec.pattern) == pattern(rec.witness)
        out.append(RowCheck(i, rec.system_id, rec.kind, checks))
    return out


def load_rows(path: str | Path) -> list[DefiningSetRecord]:
    data = json.loads(Path(path).read_text())
    return [DefiningSetRecord.from_json(obj) for obj in data]


def cmd_verify(args: argparse.Namespace) -> int:
    rows = load_rows(args.tables or default_tables_path())
    results = verify_rows(rows, args.catalog)
    names = ["proper", "defining", "minimal", "witness", "strength", "pattern"]
    print(f"{'row':>4} {'system':<10} {'kind':<16} " + " ".join(f"{n:<8}" for n in names))
    for r in results:
        cells = ["-" if r.checks[n] is None else ("ok" if r.checks[n] else "FAIL") for n in names]
        print(f"{r.row:>4} {r.system_id:<10} {r.kind:<16} " + " ".join(f"{c:<8}" for c in cells))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} rows pass")
    return EXIT_OK if not failed else EXIT_DOMAIN


def cmd_spectra(args: argparse.Namespace) -> int:
    if args.v in SPECTRA_SYSTEMS:
        refs = SPECTRA_SYSTEMS[args.v]
        systems = [(r, builtin(r)) for r in refs]
        digest = _digest(*(s.to_text() for _, s in systems))
    elif args.v == 15:
        cat = _load_catalog(args.catalog)
        ids = list(cat.ids()) if not args.ids else [int(x) for x in args.ids.split(",")]
        systems = [(f"cat:{i}", cat[i]) for i in ids]
        digest = _digest(cat.source_digest, *map(str, ids))
    else:
        raise UsageError("exact spectra are available for v in {7, 9, 13, 15}")
    result = RunResult(
        command={"name": "spectra", "v": args.v, "systems": [n for n, _ in systems]},
        inputs_digest=digest,
        budget={"limit": args.budget, "unit": "lattice cells", "used": 0},
    )
    t0 = time.perf_counter()
    per = []
    code = EXIT_OK
    try:
        for name, system in systems:
            pair = []
            for kind in ("minimum", "largest-minimal"):
                rec, used = run_search(system, kind, None, args.budget, args.jobs, system_id=name)
                result.records.append(rec)
                result.budget["used"] += used
                pair.append(rec.size)
            per.append({"system_id": name, "d": pair[0], "D": pair[1]})
    except BudgetExhausted as exc:
        result.status = "budget-exhausted"
        result.extra["partial"] = {"best_bound": exc.best, "representatives_done": exc.proven, "representatives_total": exc.total}
        code = EXIT_BUDGET
    if per:
        ds = sorted({p["d"] for p in per})
        bigs = sorted({p["D"] for p in per})
        result.extra["spectra"] = {
            "v": args.v,
            "spec_d": ds,
            "spec_D": bigs,
            "d": ds[0],
            "D": bigs[-1],
            "complete": code == EXIT_OK,
            "per_system": per,
        }
    result.timings = {"seconds": round(time.perf_counter() - t0, 3), "jobs": args.jobs}
    _emit(result.dumps(), args.out)
    return code


def cmd_catalog_check(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    cat = _load_catalog(args.catalog)
    ok = catalog_mod.verify_pairwise_nonisomorphic(cat)
    doc = {
        "entries": len(cat),
        "source_digest": cat.source_digest,
        "pairwise_nonisomorphic": ok,
        "pasch_distribution": {str(k): v for k, v in catalog_mod.pasch_distribution(cat).items()},
        "seconds": round(time.perf_counter() - t0, 3),
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_classify(args: argparse.Namespace) -> int:
    system, name = resolve_system(args.system, args.catalog)
    partial = parse_partial(args.partial, system.v)
    if not is_defining(system, partial):
        print(json.dumps({"system": name, "set": format_partial(partial, system.v), "defining": False}))
        return EXIT_DOMAIN
    doc = {
        "system": name,
        "set": format_partial(partial, system.v),
        "defining": True,
        "minimal": is_minimal_defining(system, partial),
        "strength": classify_strength(system, partial),
        "witness": "".join(PALETTE[c] for c in unique_extension(system, partial)),
    }
    print(json.dumps(doc))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="lattice cells examined before giving up")
    p.add_argument("--catalog", default=None, help="STS(15) catalog JSON (default: embedded, or $STS_CATALOG)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sts-defining", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("construct", help="build a triple system and write it in text format")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--cyclic", nargs="+", metavar=("V", "BASE"), help="v followed by base blocks like 0,1,3")
    g.add_argument("--bose", type=int, metavar="N")
    g.add_argument("--skolem", type=int, metavar="N")
    g.add_argument("--builtin", choices=BUILTIN_NAMES)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("search", help="minimum or largest minimal defining set")
    p.add_argument("system", help="builtin name, cat:<id>, or a text-format file")
    p.add_argument("--mode", choices=("min", "largest-minimal"), default="min")
    p.add_argument("--pattern", help="restrict to one color pattern, e.g. 5,4,4")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="check rows of reference defining sets")
    p.add_argument("tables", nargs="?", default=None)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectra", help="d and D spectra for one order")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--ids", help="comma-separated catalog ids (v=15 only)")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("catalog-check", help="validate the STS(15) catalog")
    _common(p)
    p.set_defaults(func=cmd_catalog_check)

    p = sub.add_parser("classify", help="strong / weak / not defining for a partial coloring")
    p.add_argument("system")
    p.add_argument("partial", help="e.g. R..G.Y... or 0:R,3:G")
    _common(p)
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotADesign, UnknownName, NotDefining, PreconditionViolated, catalog_mod.ParseError, catalog_mod.WrongCount, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
