"""Defining sets of weak 3-colorings.

A partial coloring ``S`` is *defining* when exactly one proper 3-coloring
agrees with it.  For a fixed proper coloring ``c`` that is the same as saying
``S`` meets the difference set ``{x : c(x) != c'(x)}`` of every other proper
coloring ``c'``.  The exhaustive searches below use that reformulation: every
subset of the point set is a bitmask, the subsets missing some difference set
form a down-closed family, and one superset-sum pass over the ``2^v`` lattice
classifies all subsets at once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .coloring import (
    ColorPattern,
    Coloring,
    PartialColoring,
    PreconditionViolated,
    canonical_palette,
    chromatic_number,
    coloring_array,
    format_coloring,
    is_proper,
    pattern,
)
from .designs import TripleSystem

log = logging.getLogger(__name__)

Kind = Literal["minimum", "largest-minimal"]
Strength = Literal["strong", "weak"]

ALL = 0b111
MAX_LATTICE_V = 22
DEFAULT_BUDGET = 10**11


class NotDefining(ValueError):
    pass


class NotThreeChromatic(PreconditionViolated):
    pass


class BudgetExhausted(RuntimeError):
    """Search stopped early.

    ``best`` is the best size certified so far (an upper bound for a minimum
    search, a lower bound for a largest-minimal search) and ``proven`` the
    number of coloring representatives that were fully examined.
    """

    def __init__(self, message: str, best: int | None, proven: int, total: int):
        super().__init__(message)
        self.best = best
        self.proven = proven
        self.total = total


@dataclass(frozen=True)
class DefiningSetRecord:
    system_id: str
    v: int
    pattern: ColorPattern
    partial: PartialColoring = field(hash=False)
    kind: Kind
    strength: Strength
    witness: Coloring

    @property
    def size(self) -> int:
        return len(self.partial)

    def to_json(self) -> dict:
        # key order is part of the output contract
        return {
            "system_id": self.system_id,
            "v": self.v,
            "pattern": list(self.pattern),
            "set": [{"point": p, "color": "RGY"[c]} for p, c in sorted(self.partial.items())],
            "size": self.size,
            "kind": self.kind,
            "strength": self.strength,
            "witness": format_coloring(self.witness),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "DefiningSetRecord":
        partial = {int(e["point"]): "RGY".index(e["color"].upper()) for e in obj["set"]}
        witness = tuple("RGY".index(ch) for ch in obj["witness"].upper())
        return cls(
            system_id=str(obj["system_id"]),
            v=int(obj["v"]),
            pattern=tuple(obj["pattern"]),  # type: ignore[arg-type]
            partial=partial,
            kind=obj["kind"],
            strength=obj["strength"],
            witness=witness,
        )


# -- extension counting and forcing ---------------------------------------------


def _propagate(sys: TripleSystem, cand: list[int], queue: list[int]) -> bool:
    """Forcing closure.  ``cand[p]`` is a 3-bit candidate mask.

    A block whose other two points are fixed to the same color forbids that
    color on its third point.  Returns False on a contradiction.
    """
    while queue:
        p = queue.pop()
        cp = cand[p]
        for bi in sys.blocks_through[p]:
            x, y = (q for q in sys.blocks[bi] if q != p)
            # p is fixed; if a partner is fixed to the same color the remaining
            # point loses that color
            for a, z in ((x, y), (y, x)):
                if cand[a] == cp:
                    before = cand[z]
                    after = before & ~cp
                    if after == before:
                        continue
                    if not after:
                        return False
                    cand[z] = after
                    if after & (after - 1) == 0:
                        queue.append(z)
    return True


def _initial_candidates(
    sys: TripleSystem, partial: Mapping[int, int]
) -> tuple[list[int], bool]:
    cand = [ALL] * sys.v
    for p, c in partial.items():
        if not 0 <= p < sys.v:
            raise ValueError(f"point {p} outside 0..{sys.v - 1}")
        cand[p] = 1 << c
    ok = _propagate(sys, cand, [p for p in partial])
    return cand, ok


def count_extensions(sys: TripleSystem, partial: Mapping[int, int], cap: int) -> int:
    """Number of proper colorings agreeing with ``partial``, saturating at ``cap``."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    for a, b, c in sys.blocks:
        if a in partial and b in partial and c in partial:
            if partial[a] == partial[b] == partial[c]:
                return 0
    cand, ok = _initial_candidates(sys, partial)
    if not ok:
        return 0
    total = 0

    def rec(cand: list[int]) -> None:
        nonlocal total
        best, best_n = -1, 4
        for p, m in enumerate(cand):
            n = bin(m).count("1")
            if 1 < n < best_n:
                best, best_n = p, n
                if n == 2:
                    break
        if best < 0:
            total += 1
            return
        m = cand[best]
        for c in range(3):
            if total >= cap:
                return
            if m >> c & 1:
                nxt = cand.copy()
                nxt[best] = 1 << c
                if _propagate(sys, nxt, [best]):
                    rec(nxt)

    rec(cand)
    return min(total, cap)


def is_defining(sys: TripleSystem, partial: Mapping[int, int]) -> bool:
    return count_extensions(sys, partial, 2) == 1


def is_minimal_defining(sys: TripleSystem, partial: Mapping[int, int]) -> bool:
    if not is_defining(sys, partial):
        return False
    for p in partial:
        rest = {q: c for q, c in partial.items() if q != p}
        if is_defining(sys, rest):
            return False
    return True


def unique_extension(sys: TripleSystem, partial: Mapping[int, int]) -> Coloring:
    """The witness coloring of a defining partial coloring."""
    cand, ok = _initial_candidates(sys, partial)
    found: list[Coloring] = []

    def rec(cand: list[int]) -> None:
        if len(found) > 1:
            return
        for p, m in enumerate(cand):
            if m & (m - 1):
                for c in range(3):
                    if m >> c & 1:
                        nxt = cand.copy()
                        nxt[p] = 1 << c
                        if _propagate(sys, nxt, [p]):
                            rec(nxt)
                return
        found.append(tuple(m.bit_length() - 1 for m in cand))

    if ok:
        rec(cand)
    if len(found) != 1:
        raise NotDefining(f"partial coloring has {len(found)}+ extensions")
    return found[0]


def forcing_closure(sys: TripleSystem, partial: Mapping[int, int]) -> list[int] | None:
    """Candidate masks after forcing alone, or None on a contradiction."""
    cand, ok = _initial_candidates(sys, partial)
    return cand if ok else None


def classify_strength(sys: TripleSystem, partial: Mapping[int, int]) -> Strength:
    """``strong`` iff forcing alone colors every point.

    Forcing here is only the weak-coloring rule (two same-colored points of a
    block forbid that color on the third); no lookahead or case analysis.
    """
    if not is_defining(sys, partial):
        raise NotDefining("strength is only defined for defining sets")
    cand = forcing_closure(sys, partial)
    assert cand is not None
    return "strong" if all(m & (m - 1) == 0 for m in cand) else "weak"


def _is_strong_defining(sys: TripleSystem, partial: Mapping[int, int]) -> bool:
    cand = forcing_closure(sys, partial)
    if cand is None or any(m & (m - 1) for m in cand):
        return False
    return is_proper(sys, [m.bit_length() - 1 for m in cand])


def strong_lower_bound_check(sys: TripleSystem, max_size: int = 5, budget: int | None = None) -> bool:
    """True iff no strong defining set has at most ``max_size`` points.

    Scans every subset of that size or less with every color assignment whose
    colors appear in first-appearance order (one per palette orbit).
    """
    from itertools import combinations, product

    _require_three_chromatic(sys)
    nodes = 0
    for k in range(max_size + 1):
        for pts in combinations(range(sys.v), k):
            for cols in product(range(3), repeat=k):
                if canonical_palette(cols) != cols:
                    continue
                nodes += 1
                if budget is not None and nodes > budget:
                    raise BudgetExhausted("strong-set scan ran out of budget", None, nodes, -1)
                if _is_strong_defining(sys, dict(zip(pts, cols))):
                    log.debug("strong defining set of size %d: %s %s", k, pts, cols)
                    return False
    return True


# -- exhaustive search ------------------------------------------------------------


def _require_three_chromatic(sys: TripleSystem) -> None:
    chi = chromatic_number(sys)
    if chi != 3:
        raise NotThreeChromatic(f"system is {chi}-chromatic; defining sets need chi = 3")


def _popcounts(v: int) -> np.ndarray:
    idx = np.arange(1 << v, dtype=np.uint32)
    pc = np.zeros(1 << v, dtype=np.uint8)
    for i in range(v):
        pc += ((idx >> i) & 1).astype(np.uint8)
    return pc


@dataclass
class LatticeTables:
    """Per-coloring classification of all ``2^v`` point subsets."""

    defining: np.ndarray
    minimal: np.ndarray


def color_planes(colorings: np.ndarray) -> np.ndarray:
    """Each coloring as two point bitmasks (bit 0 and bit 1 of the color)."""
    weights = (1 << np.arange(colorings.shape[1], dtype=np.int64))
    lo = ((colorings & 1).astype(np.int64) @ weights).astype(np.uint32)
    hi = ((colorings >> 1 & 1).astype(np.int64) @ weights).astype(np.uint32)
    return np.stack([lo, hi], axis=1)


def lattice_tables(planes: np.ndarray, index: int, v: int, want_minimal: bool = True) -> LatticeTables:
    """Classify every subset S (as bitmask) for the coloring ``planes[index]``.

    ``planes`` (see :func:`color_planes`) must cover every proper coloring.
    """
    size = 1 << v
    full = size - 1
    lo, hi = planes[index]
    masks = (planes[:, 0] ^ lo) | (planes[:, 1] ^ hi)
    masks = masks[masks != 0]
    # S fails to define the coloring iff S avoids some difference set
    nondef = np.zeros(size, dtype=bool)
    nondef[full ^ masks] = True
    for i in range(v):
        view = nondef.reshape(-1, 2, 1 << i)
        view[:, 0, :] |= view[:, 1, :]
    defining = ~nondef
    if not want_minimal:
        return LatticeTables(defining, np.zeros(0, dtype=bool))
    # minimal: defining, and dropping any single member breaks it
    minimal = defining.copy()
    for i in range(v):
        view_min = minimal.reshape(-1, 2, 1 << i)
        view_min[:, 1, :] &= nondef.reshape(-1, 2, 1 << i)[:, 0, :]
    return LatticeTables(defining, minimal)


def _mask_points(mask: int, v: int) -> tuple[int, ...]:
    return tuple(p for p in range(v) if mask >> p & 1)


def _candidate_key(points: tuple[int, ...], col: Sequence[int]) -> tuple:
    # least point set first, then least color string on it (palette-normalised)
    colors = canonical_palette([col[p] for p in points])
    return (points, colors)


def _witness_from(points: tuple[int, ...], col: Sequence[int]) -> tuple[PartialColoring, Coloring]:
    rename: dict[int, int] = {}
    for p in points:
        rename.setdefault(col[p], len(rename))
    for c in range(3):
        rename.setdefault(c, len(rename))
    witness = tuple(rename[c] for c in col)
    return {p: witness[p] for p in points}, witness


@dataclass
class SearchOutcome:
    size: int
    partial: PartialColoring
    witness: Coloring
    representatives: int
    per_pattern: dict[ColorPattern, int]


def _best_in_tables(
    table: np.ndarray, popcount: np.ndarray, mode: Kind
) -> tuple[int, np.ndarray] | None:
    sizes = popcount[table]
    if sizes.size == 0:
        return None
    best = int(sizes.min()) if mode == "minimum" else int(sizes.max())
    return best, np.flatnonzero(table & (popcount == best))


def _search_chunk(
    colorings: np.ndarray, reps: np.ndarray, v: int, mode: Kind
) -> list[tuple[int, tuple, int, ColorPattern]]:
    """Best (size, key, rep index, pattern) per representative in ``reps``."""
    popcount = _popcounts(v)
    planes = color_planes(colorings)
    out = []
    for ri in reps:
        col = colorings[ri].tolist()
        tables = lattice_tables(planes, int(ri), v, want_minimal=(mode == "largest-minimal"))
        table = tables.defining if mode == "minimum" else tables.minimal
        found = _best_in_tables(table, popcount, mode)
        assert found is not None  # V itself is always defining
        size, masks = found
        key = min(_candidate_key(_mask_points(int(m), v), col) for m in masks)
        out.append((size, key, int(ri), pattern(col)))
    return out


def _search(
    sys: TripleSystem,
    mode: Kind,
    pattern_filter: ColorPattern | None,
    budget: int | None,
    jobs: int,
) -> SearchOutcome:
    _require_three_chromatic(sys)
    v = sys.v
    if v > MAX_LATTICE_V:
        raise ValueError(f"exhaustive search is limited to v <= {MAX_LATTICE_V}")
    colorings = coloring_array(sys)
    reps = np.flatnonzero(palette_canonical_mask(colorings))
    if pattern_filter is not None:
        pf = tuple(pattern_filter)
        reps = np.array([r for r in reps if pattern(colorings[r]) == pf], dtype=np.int64)
        if reps.size == 0:
            raise ValueError(f"no proper coloring has pattern {pf}")
    # budget unit: one subset-lattice cell examined
    cost = 1 << v
    affordable = len(reps) if budget is None else min(len(reps), budget // cost)
    todo = reps[:affordable]
    results = _run_chunks(colorings, todo, v, mode, jobs)
    if affordable < len(reps):
        best = None
        if results:
            sizes = [r[0] for r in results]
            best = min(sizes) if mode == "minimum" else max(sizes)
        raise BudgetExhausted(
            f"budget covers {affordable} of {len(reps)} coloring representatives",
            best,
            affordable,
            len(reps),
        )
    per_pattern: dict[ColorPattern, int] = {}
    for size, _key, _ri, pat in results:
        if pat not in per_pattern:
            per_pattern[pat] = size
        elif mode == "minimum":
            per_pattern[pat] = min(per_pattern[pat], size)
        else:
            per_pattern[pat] = max(per_pattern[pat], size)
    if mode == "minimum":
        size, key, ri, _ = min(results, key=lambda r: (r[0], r[1]))
    else:
        size, key, ri, _ = min(results, key=lambda r: (-r[0], r[1]))
    partial, witness = _witness_from(key[0], colorings[ri].tolist())
    return SearchOutcome(size, partial, witness, len(reps), dict(sorted(per_pattern.items())))


def palette_canonical_mask(colorings: np.ndarray) -> np.ndarray:
    """Rows whose colors appear in first-appearance order (R first, then G)."""
    nonzero = colorings != 0
    first = np.argmax(nonzero, axis=1)
    first_val = colorings[np.arange(len(colorings)), first]
    return (colorings[:, 0] == 0) & ((first_val == 1) | ~nonzero.any(axis=1))


def _chunk_worker(args: tuple) -> list:
    return _search_chunk(*args)


def _run_chunks(colorings: np.ndarray, reps: np.ndarray, v: int, mode: Kind, jobs: int) -> list:
    if jobs <= 1 or len(reps) < 2:
        return _search_chunk(colorings, reps, v, mode)
    from concurrent.futures import ProcessPoolExecutor

    chunks = [c for c in np.array_split(reps, jobs * 4) if len(c)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(_chunk_worker, [(colorings, c, v, mode) for c in chunks])
        # chunks come back in submission order, so the concatenation is stable
        return [r for part in parts for r in part]


def _record(sys: TripleSystem, system_id: str, kind: Kind, out: SearchOutcome) -> DefiningSetRecord:
    return DefiningSetRecord(
        system_id=system_id,
        v=sys.v,
        pattern=pattern(out.witness),
        partial=out.partial,
        kind=kind,
        strength=classify_strength(sys, out.partial),
        witness=out.witness,
    )


def min_defining(
    sys: TripleSystem,
    pattern_filter: ColorPattern | None = None,
    budget: int | None = DEFAULT_BUDGET,
    jobs: int = 1,
    system_id: str = "",
) -> DefiningSetRecord:
    """Smallest defining set over all proper colorings (optionally one pattern)."""
    out = _search(sys, "minimum", pattern_filter, budget, jobs)
    return _record(sys, system_id, "minimum", out)


def largest_minimal_defining(
    sys: TripleSystem,
    pattern_filter: ColorPattern | None = None,
    budget: int | None = DEFAULT_BUDGET,
    jobs: int = 1,
    system_id: str = "",
) -> DefiningSetRecord:
    """Largest minimal defining set over all proper colorings."""
    out = _search(sys, "largest-minimal", pattern_filter, budget, jobs)
    return _record(sys, system_id, "largest-minimal", out)


def run_search(
    sys: TripleSystem,
    kind: Kind,
    pattern_filter: ColorPattern | None = None,
    budget: int | None = DEFAULT_BUDGET,
    jobs: int = 1,
    system_id: str = "",
) -> tuple[DefiningSetRecord, int]:
    """Record plus lattice cells spent (the budget unit)."""
    out = _search(sys, kind, pattern_filter, budget, jobs)
    return _record(sys, system_id, kind, out), out.representatives << sys.v


def per_pattern_sizes(
    sys: TripleSystem, mode: Kind, budget: int | None = DEFAULT_BUDGET, jobs: int = 1
) -> dict[ColorPattern, int]:
    """d_p (or the largest minimal size) for every pattern that occurs."""
    return _search(sys, mode, None, budget, jobs).per_pattern


@dataclass(frozen=True)
class Spectra:
    spec_d: frozenset[int]
    spec_big_d: frozenset[int]
    d: int
    big_d: int
    per_system: tuple[tuple[int, int], ...]


def spectra(
    systems: Iterable[TripleSystem], budget: int | None = DEFAULT_BUDGET, jobs: int = 1
) -> Spectra:
    per = []
    vs = set()
    for sys in systems:
        vs.add(sys.v)
        lo = _search(sys, "minimum", None, budget, jobs).size
        hi = _search(sys, "largest-minimal", None, budget, jobs).size
        per.append((lo, hi))
    if len(vs) != 1:
        raise ValueError("spectra need systems of a single order")
    ds = frozenset(p[0] for p in per)
    bigs = frozenset(p[1] for p in per)
    return Spectra(ds, bigs, min(ds), max(bigs), tuple(per))


# -- brute-force oracle (small v only) ------------------------------------------------


def naive_search(sys: TripleSystem, mode: Kind) -> tuple[int, PartialColoring, Coloring]:
    """Unpruned reference: every proper coloring, every subset, direct counting.

    Independent of the lattice route: for each subset it projects all proper
    colorings onto that subset and counts how many share each projection.
    """
    v = sys.v
    colorings = coloring_array(sys).astype(np.int64)
    n = len(colorings)
    defining = np.zeros((1 << v, n), dtype=bool)
    for s in range(1 << v):
        pts = [p for p in range(v) if s >> p & 1]
        codes = colorings[:, pts] @ (3 ** np.arange(len(pts), dtype=np.int64))
        _, inverse, counts = np.unique(codes, return_inverse=True, return_counts=True)
        defining[s] = counts[inverse] == 1
    best: tuple | None = None
    for s in range(1 << v):
        pts = tuple(p for p in range(v) if s >> p & 1)
        ok = defining[s].copy()
        if mode == "largest-minimal":
            for p in pts:
                ok &= ~defining[s & ~(1 << p)]
        for ci in np.flatnonzero(ok):
            colors = tuple(int(colorings[ci, p]) for p in pts)
            key = (len(pts) if mode == "minimum" else -len(pts), pts, colors)
            if best is None or key < best[0]:
                best = (key, int(ci))
    assert best is not None
    (_, pts, colors), ci = best
    return len(pts), dict(zip(pts, colors)), tuple(int(c) for c in colorings[ci])


# -- the two infinite families ----------------------------------------------------------


def bose_level_coloring(n: int) -> Coloring:
    """Color each point of bose(n) by its level (R, G, Y)."""
    return tuple(p % 3 for p in range(6 * n + 3))


def skolem_level_coloring(n: int) -> Coloring:
    """Level coloring of skolem(n) with the extra point colored R."""
    return tuple(p % 3 for p in range(6 * n)) + (0,)


def skolem_defining_set(n: int) -> PartialColoring:
    """Levels 0 and 1 entirely, level 2 for q < n, and the extra point (R)."""
    col = skolem_level_coloring(n)
    pts = [3 * q + i for q in range(2 * n) for i in (0, 1)]
    pts += [3 * q + 2 for q in range(n)]
    pts.append(6 * n)
    return {p: col[p] for p in sorted(pts)}


def bose_full_partial(n: int) -> PartialColoring:
    return dict(enumerate(bose_level_coloring(n)))
