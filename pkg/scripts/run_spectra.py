"""d and D for every system of one order, with per-pattern breakdowns.

    python scripts/run_spectra.py --v 15 --out spectra15.json   # ~40 min, one core
"""

from __future__ import annotations

import argparse
import json
import logging
import time
from pathlib import Path

from sts_defining.catalog import load_catalog
from sts_defining.defining import _search
from sts_defining.designs import builtin

SMALL = {7: ["sts7"], 9: ["sts9"], 13: ["sts13-1", "sts13-2"]}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--v", type=int, required=True, choices=(7, 9, 13, 15))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    if args.v == 15:
        cat = load_catalog()
        systems = [(f"cat:{i}", cat[i]) for i in cat.ids()]
    else:
        systems = [(n, builtin(n)) for n in SMALL[args.v]]

    rows = []
    for name, s in systems:
        t0 = time.perf_counter()
        lo = _search(s, "minimum", None, None, args.jobs)
        hi = _search(s, "largest-minimal", None, None, args.jobs)
        rows.append({
            "system_id": name,
            "d": lo.size,
            "D": hi.size,
            "d_by_pattern": {",".join(map(str, p)): k for p, k in lo.per_pattern.items()},
            "D_by_pattern": {",".join(map(str, p)): k for p, k in hi.per_pattern.items()},
        })
        logging.info("%s d=%d D=%d (%.1fs)", name, lo.size, hi.size, time.perf_counter() - t0)

    doc = {
        "v": args.v,
        "spec_d": sorted({r["d"] for r in rows}),
        "spec_D": sorted({r["D"] for r in rows}),
        "systems": rows,
    }
    text = json.dumps(doc, indent=1)
    if args.out:
        args.out.write_text(text)
    else:
        print(text)


if __name__ == "__main__":
    main()
