"""Weak 3-colorings of Steiner triple systems.

A coloring is a tuple of ints indexed by point, with 0, 1, 2 standing for the
palette R, G, Y.  A coloring is *proper* when no block is monochromatic.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from .designs import TripleSystem

PALETTE = "RGY"

Coloring = tuple[int, ...]
ColorPattern = tuple[int, int, int]
PartialColoring = dict[int, int]


class PreconditionViolated(ValueError):
    pass


def parse_coloring(text: str) -> Coloring:
    """``"RGGY"`` -> ``(0, 1, 1, 2)``; case-insensitive."""
    try:
        return tuple(PALETTE.index(ch) for ch in text.upper())
    except ValueError:
        raise ValueError(f"coloring {text!r} uses characters outside {PALETTE}") from None


def format_coloring(col: Sequence[int]) -> str:
    return "".join(PALETTE[c] for c in col)


def format_partial(partial: Mapping[int, int], v: int) -> str:
    """Capitals for colored points, ``.`` elsewhere."""
    return "".join(PALETTE[partial[p]] if p in partial else "." for p in range(v))


def is_proper(sys: TripleSystem, col: Sequence[int]) -> bool:
    return all(not (col[a] == col[b] == col[c]) for a, b, c in sys.blocks)


def pattern(col: Sequence[int]) -> ColorPattern:
    counts = sorted((sum(1 for c in col if c == k) for k in range(3)), reverse=True)
    return (counts[0], counts[1], counts[2])


def canonical_palette(col: Sequence[int]) -> Coloring:
    """Lexicographically least palette image: colors renamed by first appearance."""
    rename: dict[int, int] = {}
    for c in col:
        if c not in rename:
            rename[c] = len(rename)
    return tuple(rename[c] for c in col)


def palette_images(col: Sequence[int]) -> list[Coloring]:
    """The six images of ``col`` under palette permutations (with repeats)."""
    from itertools import permutations

    return [tuple(p[c] for c in col) for p in permutations(range(3))]


def _closing_blocks(sys: TripleSystem) -> list[list[tuple[int, int]]]:
    """For each point p, the (x, y) pairs of blocks whose largest point is p."""
    closing: list[list[tuple[int, int]]] = [[] for _ in range(sys.v)]
    for a, b, c in sys.blocks:
        closing[c].append((a, b))
    return closing


def enumerate_colorings(
    sys: TripleSystem, up_to_color_permutation: bool = False, colors: int = 3
) -> Iterator[Coloring]:
    """Yield proper colorings in lexicographic order (points 0.., colors R<G<Y).

    With ``up_to_color_permutation`` only palette-canonical representatives
    are yielded: the first point is R and the first non-R point is G.
    """
    v = sys.v
    closing = _closing_blocks(sys)
    col = [0] * v

    def rec(p: int, used: int) -> Iterator[Coloring]:
        if p == v:
            yield tuple(col)
            return
        limit = min(colors, used + 1) if up_to_color_permutation else colors
        for c in range(limit):
            if any(col[x] == c and col[y] == c for x, y in closing[p]):
                continue
            col[p] = c
            yield from rec(p + 1, max(used, c + 1))

    yield from rec(0, 0)


def coloring_array(sys: TripleSystem, up_to_color_permutation: bool = False) -> np.ndarray:
    """All proper 3-colorings as an ``(N, v)`` uint8 array, lexicographic order.

    Same rows as :func:`enumerate_colorings`, built level by level with numpy.
    """
    v = sys.v
    closing = _closing_blocks(sys)
    cur = np.zeros((1, 0), dtype=np.uint8)
    used = np.zeros(1, dtype=np.uint8)  # number of distinct colors so far (canonical mode)
    for p in range(v):
        n = cur.shape[0]
        nxt = np.repeat(cur, 3, axis=0)
        newcol = np.tile(np.arange(3, dtype=np.uint8), n)
        ok = np.ones(n * 3, dtype=bool)
        for x, y in closing[p]:
            ok &= ~((nxt[:, x] == newcol) & (nxt[:, y] == newcol))
        if up_to_color_permutation:
            rep_used = np.repeat(used, 3)
            ok &= newcol <= rep_used
            used = np.maximum(rep_used, newcol + 1)[ok]
        cur = np.concatenate([nxt, newcol[:, None]], axis=1)[ok]
    return cur


def count_by_brute_force(sys: TripleSystem) -> int:
    """Proper 3-colorings counted over all 3^v assignments (test oracle)."""
    return sum(1 for col in product(range(3), repeat=sys.v) if is_proper(sys, col))


def pattern_set(sys: TripleSystem) -> set[ColorPattern]:
    arr = coloring_array(sys, up_to_color_permutation=True)
    counts = np.stack([(arr == k).sum(axis=1) for k in range(3)], axis=1)
    counts = -np.sort(-counts, axis=1)
    return {tuple(int(x) for x in row) for row in np.unique(counts, axis=0)}  # type: ignore[misc]


def _has_coloring(sys: TripleSystem, m: int) -> bool:
    return next(enumerate_colorings(sys, up_to_color_permutation=True, colors=m), None) is not None


def chromatic_number(sys: TripleSystem) -> int:
    m = 1
    while not _has_coloring(sys, m):
        m += 1
    return m


def partition_of(col: Sequence[int]) -> frozenset[frozenset[int]]:
    classes: dict[int, set[int]] = {}
    for p, c in enumerate(col):
        classes.setdefault(c, set()).add(p)
    return frozenset(frozenset(s) for s in classes.values())


def is_uniquely_colorable(sys: TripleSystem) -> bool:
    """True iff every proper chi-coloring induces the same partition of V."""
    chi = chromatic_number(sys)
    partitions = set()
    for col in enumerate_colorings(sys, up_to_color_permutation=True, colors=chi):
        partitions.add(partition_of(col))
        if len(partitions) > 1:
            return False
    return len(partitions) == 1


def max_class_size(sys: TripleSystem) -> int:
    """Largest c1 over all proper 3-colorings."""
    arr = coloring_array(sys, up_to_color_permutation=True)
    return int(max((arr == k).sum(axis=1).max() for k in range(3)))


def check_lemma_c1(sys: TripleSystem) -> bool:
    """Every proper 3-coloring has largest class at most r = (v-1)/2."""
    if sys.v <= 7:
        raise PreconditionViolated(f"the c1 <= r bound needs v > 7, got v={sys.v}")
    return max_class_size(sys) <= sys.r
