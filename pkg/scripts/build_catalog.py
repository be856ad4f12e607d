"""Regenerate src/sts_defining/data/sts15_catalog.json.

Three cached stages (pass --cache DIR to keep them between runs):

1. classes.json   the 80 isomorphism classes of STS(15), found by closing a
                  few random seeds plus bose(2) under cycle switching (~1 min);
2. dvals.json     exhaustive d and D for every class (~30-60 min, one core);
3. assignment     ids 1..80 matched to classes, then relabelled so that each
                  id's two reference rows are proper colorings whose capitals
                  are minimal defining sets.

Hard matching constraints: d equal to the size of the id's minimum row; D at
least the size of its largest-minimal row (a printed row only certifies a
lower bound); the known pattern sets of ids 1, 7, 79, 80; existence of the
relabelling.  Among perfect matchings over compatible pairs the cheapest is
taken (scipy's linear_sum_assignment).  Costs, in decreasing weight: the class
lies outside the id block expected from its sub-STS(7) count (15 / 7 / 3 / 1 / 0
for ids 1 / 2 / 3-7 / 8-23 / 24-80); D differs from the printed size; distance
between the id's position in its block and the class's rank by descending
Pasch count.  Compatibility is tested in widening stages and cached; if ids
stay unmatched, every id competing for their classes is tested in full.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import time
from itertools import combinations
from pathlib import Path

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment

from sts_defining.catalog import dump_catalog, parse_catalog, verify_pairwise_nonisomorphic
from sts_defining.coloring import coloring_array, parse_coloring, pattern_set
from sts_defining.defining import is_minimal_defining, run_search
from sts_defining.designs import (
    TripleSystem,
    are_isomorphic,
    bose,
    from_blocks,
    pasch_configurations,
    point_fingerprints,
    subsystems7,
)

log = logging.getLogger("build_catalog")

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "sts_defining" / "data"
V = 15

ID_BLOCKS = [(15, [1]), (7, [2]), (3, list(range(3, 8))), (1, list(range(8, 24))), (0, list(range(24, 81)))]
KNOWN_PATTERNS = {
    1: {(5, 5, 5)},
    7: {(6, 5, 4), (5, 5, 5)},
    79: {(6, 6, 3), (6, 5, 4), (5, 5, 5)},
    80: {(6, 6, 3), (6, 5, 4), (5, 5, 5)},
}


# -- stage 1 ---------------------------------------------------------------------


def random_sts(v: int, rng: random.Random) -> TripleSystem:
    """Stinson's hill-climbing."""
    free = {x: set(range(v)) - {x} for x in range(v)}
    blocks: set[tuple[int, int, int]] = set()
    owner: dict[tuple[int, int], tuple[int, int, int]] = {}
    while len(blocks) < v * (v - 1) // 6:
        x = rng.choice([p for p in range(v) if free[p]])
        y, z = rng.sample(sorted(free[x]), 2)
        key = (min(y, z), max(y, z))
        if key in owner:
            old = owner[key]
            blocks.discard(old)
            for a, b in combinations(old, 2):
                del owner[(a, b)]
                free[a].add(b)
                free[b].add(a)
        blk = tuple(sorted((x, y, z)))
        blocks.add(blk)  # type: ignore[arg-type]
        for a, b in combinations(blk, 2):
            owner[(a, b)] = blk  # type: ignore[assignment]
            free[a].discard(b)
            free[b].discard(a)
    return from_blocks(v, blocks)


def cycle_switches(s: TripleSystem) -> list[TripleSystem]:
    out = []
    for a, b in combinations(range(s.v), 2):
        c = s.third(a, b)
        rest = [x for x in range(s.v) if x not in (a, b, c)]
        seen: set[int] = set()
        for start in rest:
            if start in seen:
                continue
            cyc = []
            x, use_a = start, True
            while True:
                seen.add(x)
                y = s.third(a if use_a else b, x)
                cyc.append((x, y, use_a))
                x, use_a = y, not use_a
                if x == start and use_a:
                    break
            if len(cyc) == len(rest):
                continue  # the whole cycle just swaps a and b
            blocks = set(s.blocks)
            for x, y, ua in cyc:
                blocks.discard(tuple(sorted((a if ua else b, x, y))))
                blocks.add(tuple(sorted((b if ua else a, x, y))))
            out.append(from_blocks(s.v, blocks))
    return out


def generate_classes(seed: int = 1, seeds: int = 20) -> list[TripleSystem]:
    rng = random.Random(seed)
    classes: list[tuple[tuple, TripleSystem, list]] = []

    def add(s: TripleSystem) -> bool:
        fp = point_fingerprints(s)
        key = tuple(sorted(fp))
        for key2, s2, fp2 in classes:
            if key2 == key and are_isomorphic(s, s2, fp, fp2) is not None:
                return False
        classes.append((key, s, fp))
        return True

    add(bose(2))
    for _ in range(seeds):
        add(random_sts(V, rng))
    frontier = list(range(len(classes)))
    while frontier:
        i = frontier.pop()
        for s2 in cycle_switches(classes[i][1]):
            if add(s2):
                frontier.append(len(classes) - 1)
        log.info("classes %d, frontier %d", len(classes), len(frontier))
    return [c[1] for c in classes]


# -- stage 3 ---------------------------------------------------------------------


def row_parts(row: str) -> tuple[tuple[int, ...], dict[int, int]]:
    col = parse_coloring(row)
    return col, {i: col[i] for i, ch in enumerate(row) if ch.isupper()}


@njit(cache=True)
def _proper_labellings(partners, bad):  # pragma: no cover - compiled
    """All psi (label -> point) with blocks {0, 2i-1, 2i}, as rows of an array.

    ``partners[p]`` lists the 7 pairs completing blocks through p, and
    ``bad[a, b]`` is a bitmask of labels c for which {a, b, c} is monochromatic
    in some reference row.
    """
    out = []
    psi = np.full(V, -1, np.int64)
    phi = np.full(V, -1, np.int64)
    choice = np.zeros(8, np.int64)  # per level: next (pair, orientation) code to try
    used = np.zeros(7, np.bool_)
    for root in range(V):
        psi[0] = root
        phi[root] = 0
        i = 1
        choice[1] = 0
        while i >= 1:
            if i == 8:
                out.append(psi.copy())
                i -= 1
                k = (choice[i] - 1) >> 1
                u, w = psi[2 * i - 1], psi[2 * i]
                phi[u] = -1
                phi[w] = -1
                used[k] = False
                continue
            placed = False
            while choice[i] < 14:
                code = choice[i]
                choice[i] += 1
                k = code >> 1
                if used[k]:
                    continue
                u, w = partners[root, k, 0], partners[root, k, 1]
                if code & 1:
                    u, w = w, u
                phi[u] = 2 * i - 1
                phi[w] = 2 * i
                good = True
                for t in range(2):
                    p = u if t == 0 else w
                    lp = phi[p]
                    for j in range(7):
                        lq = phi[partners[p, j, 0]]
                        lr = phi[partners[p, j, 1]]
                        if lq >= 0 and lr >= 0 and (bad[lp, lq] >> lr) & 1:
                            good = False
                            break
                    if not good:
                        break
                if good:
                    psi[2 * i - 1] = u
                    psi[2 * i] = w
                    used[k] = True
                    placed = True
                    break
                phi[u] = -1
                phi[w] = -1
            if placed:
                i += 1
                if i < 8:
                    choice[i] = 0
            else:
                i -= 1
                if i >= 1:
                    k = (choice[i] - 1) >> 1
                    u, w = psi[2 * i - 1], psi[2 * i]
                    phi[u] = -1
                    phi[w] = -1
                    used[k] = False
        phi[root] = -1
    return out


def labellings(x: TripleSystem, cols: list[tuple[int, ...]]):
    """Maps label -> point with blocks {0, 2i-1, 2i}, keeping every ``cols`` proper."""
    bad = np.array(
        [[sum(1 << c for c in range(V) if any(col[a] == col[b] == col[c] for col in cols)) for b in range(V)]
         for a in range(V)],
        dtype=np.int64,
    )
    partners = np.array(
        [[[q for q in x.blocks[bi] if q != p] for bi in x.blocks_through[p]] for p in range(V)], dtype=np.int64
    )
    for psi in _proper_labellings(partners, bad):
        yield psi.tolist()


def relabelled(x: TripleSystem, psi: list[int]) -> TripleSystem:
    phi = [0] * V
    for label, point in enumerate(psi):
        phi[point] = label
    return x.relabel(phi)


class _Agreement:
    """``table[x, c]``: which proper colorings of x give point x color c."""

    def __init__(self, x: TripleSystem):
        cols = coloring_array(x)
        self.table = np.stack([[cols[:, p] == c for c in range(3)] for p in range(x.v)])  # (v, 3, N)

    def minimal_defining(self, part: dict[int, int]) -> bool:
        rows = self.table[list(part), list(part.values())]
        if np.count_nonzero(np.logical_and.reduce(rows, axis=0)) != 1:
            return False
        for k in range(len(rows)):
            rest = np.delete(rows, k, axis=0)
            if np.count_nonzero(np.logical_and.reduce(rest, axis=0)) == 1:
                return False
        return True


def find_labelling(x: TripleSystem, rows: list[str]) -> list[int] | None:
    parts = [row_parts(r) for r in rows]
    agree = None
    for psi in labellings(x, [c for c, _ in parts]):
        agree = agree or _Agreement(x)
        # test in x's own labels; relabelling only the winner is much cheaper
        if all(agree.minimal_defining({psi[p]: c for p, c in part.items()}) for _, part in parts):
            y = relabelled(x, psi)
            assert all(is_minimal_defining(y, part) for _, part in parts)
            return psi
    return None


def assign(
    classes: list[TripleSystem],
    dvals: dict[int, tuple[int, int]],
    rows: dict[int, dict[str, str]],
    compat_path: Path,
) -> tuple[list[TripleSystem], dict[int, int]]:
    """Minimum-cost perfect matching of ids to classes over compatible pairs."""
    inv = {i: (len(subsystems7(s)), len(pasch_configurations(s))) for i, s in enumerate(classes)}
    home = {sid: subs for subs, ids in ID_BLOCKS for sid in ids}
    # position of each id inside its block, and of each class by descending Pasch count
    id_rank = {sid: k for _, ids in ID_BLOCKS for k, sid in enumerate(ids)}
    class_rank: dict[int, int] = {}
    for subs, _ in ID_BLOCKS:
        pool = sorted((c for c in inv if inv[c][0] == subs), key=lambda c: (-inv[c][1], c))
        class_rank.update({c: k for k, c in enumerate(pool)})
    sizes = {
        sid: tuple(sum(ch.isupper() for ch in r[k]) for k in ("minimum", "largest-minimal"))
        for sid, r in rows.items()
    }
    pats: dict[int, set] = {}

    def hard(sid: int, ci: int) -> bool:
        d, big = sizes[sid]
        if dvals[ci][0] != d or dvals[ci][1] < big:
            return False
        if sid in KNOWN_PATTERNS:
            if ci not in pats:
                pats[ci] = set(pattern_set(classes[ci]))
            return pats[ci] == KNOWN_PATTERNS[sid]
        return True

    def cost(sid: int, ci: int) -> float:
        return (
            1e6 * (inv[ci][0] != home[sid])
            + 1e4 * (dvals[ci][1] != sizes[sid][1])
            + abs(id_rank[sid] - class_rank[ci])
        )

    compat: dict[str, list[int] | None] = json.loads(compat_path.read_text()) if compat_path.exists() else {}

    def test(sid: int, ci: int) -> bool:
        key = f"{sid}:{ci}"
        if key not in compat:
            t0 = time.time()
            want = [rows[sid]["minimum"], rows[sid]["largest-minimal"]]
            psi = find_labelling(classes[ci], want)
            compat[key] = psi
            compat_path.write_text(json.dumps(compat))
            log.info("id %d vs class %d: %s (%.1fs)", sid, ci, psi is not None, time.time() - t0)
        return compat[key] is not None

    ids = list(range(1, 81))
    # widen the candidate sets in stages: same block and same D, same block, anything
    stages = [
        lambda sid, ci: inv[ci][0] == home[sid] and dvals[ci][1] == sizes[sid][1],
        lambda sid, ci: inv[ci][0] == home[sid],
        lambda sid, ci: True,
    ]
    big = 1e12

    def match() -> tuple[np.ndarray, np.ndarray, set[int]]:
        m = np.full((80, 80), big)
        for key, psi in compat.items():
            sid, ci = map(int, key.split(":"))
            if psi is not None and hard(sid, ci):
                m[sid - 1, ci] = cost(sid, ci)
        r, c = linear_sum_assignment(m)
        left = {int(i) + 1 for i, j in zip(r, c) if m[i, j] >= big}
        log.info("matching: %d ids unmatched %s", len(left), sorted(left))
        return r, c, left

    unmatched = set(ids)
    for stage in stages:
        for sid in ids:
            if sid not in unmatched:
                continue
            for ci in sorted(inv, key=lambda c: cost(sid, c)):
                if hard(sid, ci) and stage(sid, ci):
                    test(sid, ci)
        r, c, unmatched = match()
        if not unmatched:
            break

    # augmenting: ids that compete for an unmatched id's classes get all their pairs tested
    done: set[int] = set()
    while unmatched:
        wanted = {int(k.split(":")[1]) for k, v in compat.items() if v and int(k.split(":")[0]) in unmatched}
        rivals = {int(k.split(":")[0]) for k, v in compat.items() if v and int(k.split(":")[1]) in wanted}
        todo = rivals - done
        if not todo:
            break
        for sid in sorted(todo):
            for ci in sorted(inv, key=lambda c: cost(sid, c)):
                if hard(sid, ci):
                    test(sid, ci)
        done |= todo
        r, c, unmatched = match()
    if unmatched:
        raise RuntimeError(f"no consistent assignment for ids {sorted(unmatched)}")
    chosen = {int(i) + 1: int(j) for i, j in zip(r, c)}
    for sid in ids:
        ci = chosen[sid]
        if inv[ci][0] != home[sid] or dvals[ci][1] != sizes[sid][1]:
            log.warning("id %d -> class %d: sub-STS(7)s %d, D %d (printed %d)", sid, ci, inv[ci][0], dvals[ci][1], sizes[sid][1])
    systems = []
    for sid in ids:
        psi = compat[f"{sid}:{chosen[sid]}"]
        assert psi is not None
        systems.append(relabelled(classes[chosen[sid]], psi))
    return systems, chosen


def load_rows() -> dict[int, dict[str, str]]:
    rows: dict[int, dict[str, str]] = {}
    for rec in json.loads((DATA / "reference_tables.json").read_text()):
        if rec["v"] != V:
            continue
        caps = {e["point"] for e in rec["set"]}
        text = "".join(ch if i in caps else ch.lower() for i, ch in enumerate(rec["witness"]))
        rows.setdefault(int(rec["system_id"].split(":")[1]), {})[rec["kind"]] = text
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cache", type=Path, default=Path("catalog_cache"))
    ap.add_argument("--out", type=Path, default=DATA / "sts15_catalog.json")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    args.cache.mkdir(parents=True, exist_ok=True)

    cpath = args.cache / "classes.json"
    if cpath.exists():
        classes = [from_blocks(V, b) for b in json.loads(cpath.read_text())]
    else:
        classes = generate_classes()
        cpath.write_text(json.dumps([[list(b) for b in s.blocks] for s in classes]))
    log.info("%d classes", len(classes))

    dpath = args.cache / "dvals.json"
    dvals: dict[int, tuple[int, int]] = {}
    if dpath.exists():
        dvals = {int(k): tuple(v) for k, v in json.loads(dpath.read_text()).items()}  # type: ignore[misc]
    for i, s in enumerate(classes):
        if i in dvals:
            continue
        lo, _ = run_search(s, "minimum", budget=None, jobs=args.jobs)
        hi, _ = run_search(s, "largest-minimal", budget=None, jobs=args.jobs)
        dvals[i] = (lo.size, hi.size)
        log.info("class %d: d=%d D=%d", i, lo.size, hi.size)
        dpath.write_text(json.dumps({str(k): list(v) for k, v in sorted(dvals.items())}))

    systems, chosen = assign(classes, dvals, load_rows(), args.cache / "compat.json")
    text = dump_catalog(systems)
    cat = parse_catalog(text.encode())
    assert verify_pairwise_nonisomorphic(cat)
    args.out.write_text(text)
    (args.cache / "assignment.json").write_text(json.dumps({str(k): v for k, v in sorted(chosen.items())}))
    log.info("wrote %s (sha256 %s)", args.out, cat.source_digest)


if __name__ == "__main__":
    main()
