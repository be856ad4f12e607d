"""Steiner triple systems: validation, constructions and isomorphism testing.

Points are always ``0..v-1``.  A system is stored canonically (each block
sorted ascending, block list sorted lexicographically) so two systems on the
same labelling compare equal exactly when their block sets agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

Block = tuple[int, int, int]


class NotADesign(ValueError):
    """Raised when a block list is not a Steiner triple system."""


class UnknownName(KeyError):
    """Raised for an unrecognised built-in system name."""


def is_admissible(v: int) -> bool:
    # v = 1 is the empty system (one point, no blocks)
    return v >= 1 and v % 6 in (1, 3)


@dataclass(frozen=True, eq=False)
class TripleSystem:
    v: int
    blocks: tuple[Block, ...]
    pair_index: dict[tuple[int, int], int] = field(repr=False, compare=False)
    blocks_through: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def r(self) -> int:
        return (self.v - 1) // 2

    def third(self, x: int, y: int) -> int:
        """The point completing the block through ``x`` and ``y``."""
        blk = self.blocks[self.pair_index[(x, y) if x < y else (y, x)]]
        return blk[0] + blk[1] + blk[2] - x - y

    def block_set(self) -> frozenset[Block]:
        return frozenset(self.blocks)

    def relabel(self, perm: Sequence[int]) -> "TripleSystem":
        """Image of the system under the point map ``x -> perm[x]``."""
        return from_blocks(self.v, [[perm[p] for p in blk] for blk in self.blocks])

    def to_text(self) -> str:
        lines = [f"{self.v} {self.b}"]
        lines += [f"{a} {b} {c}" for a, b, c in self.blocks]
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TripleSystem):
            return NotImplemented
        return self.v == other.v and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash((self.v, self.blocks))


def from_blocks(v: int, blocks: Iterable[Sequence[int]]) -> TripleSystem:
    """Validate ``blocks`` as an STS(v) and return it in canonical order."""
    if not is_admissible(v):
        raise NotADesign(f"v={v} is not admissible (need v = 1, 3 mod 6)")
    canon: list[Block] = []
    for raw in blocks:
        pts = tuple(int(p) for p in raw)
        if len(pts) != 3:
            raise NotADesign(f"block {list(raw)} does not have 3 points")
        if len(set(pts)) != 3:
            raise NotADesign(f"block {list(raw)} repeats a point")
        if any(p < 0 or p >= v for p in pts):
            raise NotADesign(f"block {list(raw)} has a point outside 0..{v - 1}")
        canon.append(tuple(sorted(pts)))  # type: ignore[arg-type]
    canon.sort()
    expected = v * (v - 1) // 6
    if len(canon) != expected:
        raise NotADesign(f"expected {expected} blocks for v={v}, got {len(canon)}")
    pair_index: dict[tuple[int, int], int] = {}
    for i, (a, b, c) in enumerate(canon):
        for pair in ((a, b), (a, c), (b, c)):
            if pair in pair_index:
                raise NotADesign(f"pair {pair} is covered more than once")
            pair_index[pair] = i
    # the block count plus no repeated pair already forces full coverage
    through: list[list[int]] = [[] for _ in range(v)]
    for i, blk in enumerate(canon):
        for p in blk:
            through[p].append(i)
    return TripleSystem(
        v=v,
        blocks=tuple(canon),
        pair_index=pair_index,
        blocks_through=tuple(tuple(t) for t in through),
    )


def parse_text(text: str) -> TripleSystem:
    """Inverse of :meth:`TripleSystem.to_text`."""
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise NotADesign("first line must be 'v b'")
    v, b = int(rows[0][0]), int(rows[0][1])
    if len(rows) - 1 != b:
        raise NotADesign(f"header announces {b} blocks, found {len(rows) - 1}")
    return from_blocks(v, [[int(x) for x in row] for row in rows[1:]])


def cyclic_sts(v: int, base_blocks: Sequence[Sequence[int]]) -> TripleSystem:
    """Develop base blocks under ``i -> i + 1 (mod v)``.

    Short orbits (e.g. {0, 5, 10} mod 15) collapse naturally in the set.
    """
    dev = {
        tuple(sorted((p + i) % v for p in base))
        for base in base_blocks
        for i in range(v)
    }
    return from_blocks(v, sorted(dev))


# -- quasigroups ------------------------------------------------------------


@dataclass(frozen=True)
class Quasigroup:
    order: int
    table: tuple[tuple[int, ...], ...]

    def op(self, x: int, y: int) -> int:
        return self.table[x][y]

    def is_latin(self) -> bool:
        full = set(range(self.order))
        rows_ok = all(set(row) == full for row in self.table)
        cols_ok = all({row[j] for row in self.table} == full for j in range(self.order))
        return rows_ok and cols_ok

    def is_commutative(self) -> bool:
        n = self.order
        return all(self.table[x][y] == self.table[y][x] for x in range(n) for y in range(n))

    def is_idempotent(self) -> bool:
        return all(self.table[x][x] == x for x in range(self.order))

    def is_half_idempotent(self) -> bool:
        if self.order % 2:
            return False
        n = self.order // 2
        return all(self.table[x][x] == x for x in range(n)) and all(
            self.table[n + k][n + k] == k for k in range(n)
        )


def idempotent_quasigroup(n: int) -> Quasigroup:
    """Commutative idempotent quasigroup of order ``2n+1``: x*y = (x+y)(n+1)."""
    m = 2 * n + 1
    return Quasigroup(m, tuple(tuple((x + y) * (n + 1) % m for y in range(m)) for x in range(m)))


def half_idempotent_quasigroup(n: int) -> Quasigroup:
    """Commutative half-idempotent quasigroup of order ``2n`` built from Z_2n."""
    m = 2 * n

    def op(x: int, y: int) -> int:
        s = (x + y) % m
        return s // 2 if s % 2 == 0 else n + (s - 1) // 2

    return Quasigroup(m, tuple(tuple(op(x, y) for y in range(m)) for x in range(m)))


def _pt(q: int, level: int) -> int:
    return 3 * q + level


def bose(n: int) -> TripleSystem:
    """Bose construction of an STS(6n+3); point (q, level) is ``3q + level``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    quasi = idempotent_quasigroup(n)
    m = quasi.order
    blocks = [[_pt(x, 0), _pt(x, 1), _pt(x, 2)] for x in range(m)]
    for x, y in combinations(range(m), 2):
        for i in range(3):
            blocks.append([_pt(x, i), _pt(y, i), _pt(quasi.op(x, y), (i + 1) % 3)])
    return from_blocks(3 * m, blocks)


def skolem(n: int) -> TripleSystem:
    """Skolem construction of an STS(6n+1); the extra point is ``6n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    quasi = half_idempotent_quasigroup(n)
    inf = 6 * n
    blocks = [[_pt(x, 0), _pt(x, 1), _pt(x, 2)] for x in range(n)]
    for x in range(n):
        for i in range(3):
            blocks.append([inf, _pt(x + n, i), _pt(x, (i + 1) % 3)])
    for x, y in combinations(range(2 * n), 2):
        for i in range(3):
            blocks.append([_pt(x, i), _pt(y, i), _pt(quasi.op(x, y), (i + 1) % 3)])
    return from_blocks(6 * n + 1, blocks)


# -- the small systems listed explicitly ------------------------------------

STS9_BLOCKS = [
    (0, 1, 2), (0, 3, 6), (0, 4, 8), (0, 5, 7), (3, 4, 5), (1, 4, 7),
    (1, 5, 6), (1, 3, 8), (6, 7, 8), (2, 5, 8), (2, 3, 7), (2, 4, 6),
]
STS13_REMOVED = [(0, 1, 4), (0, 2, 7), (2, 4, 9), (1, 7, 9)]
STS13_ADDED = [(2, 7, 9), (1, 4, 9), (0, 1, 7), (0, 2, 4)]

BUILTIN_NAMES = ("sts7", "sts9", "sts13-1", "sts13-2")


def builtin(name: str) -> TripleSystem:
    if name == "sts7":
        return cyclic_sts(7, [[0, 1, 3]])
    if name == "sts9":
        return from_blocks(9, STS9_BLOCKS)
    if name == "sts13-1":
        return cyclic_sts(13, [[0, 1, 4], [0, 2, 7]])
    if name == "sts13-2":
        base = builtin("sts13-1")
        removed = set(STS13_REMOVED)
        kept = [blk for blk in base.blocks if blk not in removed]
        return from_blocks(13, kept + STS13_ADDED)
    raise UnknownName(name)


# -- isomorphism --------------------------------------------------------------


def pasch_configurations(sys: TripleSystem) -> list[tuple[int, int, int, int]]:
    """All Pasch configurations as sorted 4-tuples of block indices.

    Two disjoint-free blocks {a,b,c}, {a,d,e} through a common point extend to
    a Pasch exactly when third(b,d) == third(c,e) (or the crossed pairing).
    """
    found: set[tuple[int, int, int, int]] = set()
    third, idx = sys.third, sys.pair_index
    for a in range(sys.v):
        through = sys.blocks_through[a]
        for i, j in combinations(through, 2):
            b, c = (p for p in sys.blocks[i] if p != a)
            d, e = (p for p in sys.blocks[j] if p != a)
            for (x, y), (z, w) in (((b, d), (c, e)), ((b, e), (c, d))):
                f = third(x, y)
                if f == third(z, w) and f != a:
                    k1 = idx[(x, y) if x < y else (y, x)]
                    k2 = idx[(z, w) if z < w else (w, z)]
                    found.add(tuple(sorted((i, j, k1, k2))))  # type: ignore[arg-type]
    return sorted(found)


def point_fingerprints(sys: TripleSystem) -> list[tuple[int, ...]]:
    """Isomorphism-invariant label per point.

    Combines the point's degree in the block-intersection graph (constant for
    an STS, kept for generality), the number of Pasch configurations it lies
    in, and the number of sub-STS(7)s through it.
    """
    v = sys.v
    pasch = [0] * v
    for conf in pasch_configurations(sys):
        pts = {p for k in conf for p in sys.blocks[k]}
        for p in pts:
            pasch[p] += 1
    fano = [0] * v
    for sub in subsystems7(sys):
        for p in sub:
            fano[p] += 1
    inter_deg = [
        sum(len(set(sys.blocks[k]) & set(sys.blocks[m])) == 1 for m in range(sys.b) if m != k)
        for k in range(sys.b)
    ]
    out = []
    for p in range(v):
        degs = tuple(sorted(inter_deg[k] for k in sys.blocks_through[p]))
        out.append((pasch[p], fano[p]) + degs)
    return out


def subsystems7(sys: TripleSystem) -> list[tuple[int, ...]]:
    """Point sets of all sub-STS(7)s (closures of three non-collinear points)."""
    found: set[tuple[int, ...]] = set()
    for blk in sys.blocks:
        a, b, c = blk
        for d in range(sys.v):
            if d in blk:
                continue
            pts = {a, b, c, d, sys.third(a, d), sys.third(b, d), sys.third(c, d)}
            if len(pts) == 7 and all(sys.third(x, y) in pts for x, y in combinations(pts, 2)):
                found.add(tuple(sorted(pts)))
    return sorted(found)


def invariant(sys: TripleSystem) -> tuple:
    """Whole-system fingerprint: sorted multiset of point fingerprints."""
    return (sys.v, tuple(sorted(point_fingerprints(sys))))


def are_isomorphic(
    a: TripleSystem,
    b: TripleSystem,
    fp_a: list[tuple[int, ...]] | None = None,
    fp_b: list[tuple[int, ...]] | None = None,
) -> list[int] | None:
    """Lexicographically least bijection ``f`` with f(a) = b, or ``None``.

    Points of ``a`` are assigned images in order 0, 1, ... with candidates
    tried ascending.  Whenever two mapped points determine a third, its image
    is forced, which keeps the search tiny for Steiner triple systems.
    Fingerprints only restrict candidates, never the answer.
    """
    if a.v != b.v or a.b != b.b:
        return None
    v = a.v
    if fp_a is None:
        fp_a = point_fingerprints(a)
    if fp_b is None:
        fp_b = point_fingerprints(b)
    if sorted(fp_a) != sorted(fp_b):
        return None
    fmap = [-1] * v
    used = [False] * v

    def assign(x: int, y: int, trail: list[int]) -> bool:
        # Set fmap[x] = y and close under the third-point operation.
        stack = [(x, y)]
        while stack:
            p, q = stack.pop()
            if fmap[p] != -1:
                if fmap[p] != q:
                    return False
                continue
            if used[q] or fp_a[p] != fp_b[q]:
                return False
            fmap[p] = q
            used[q] = True
            trail.append(p)
            for s in range(v):
                if s != p and fmap[s] != -1:
                    stack.append((a.third(p, s), b.third(q, fmap[s])))
        return True

    def undo(trail: list[int]) -> None:
        for p in trail:
            used[fmap[p]] = False
            fmap[p] = -1

    def search(x: int) -> bool:
        while x < v and fmap[x] != -1:
            x += 1
        if x == v:
            return True
        for y in range(v):
            if used[y] or fp_a[x] != fp_b[y]:
                continue
            trail: list[int] = []
            if assign(x, y, trail) and search(x + 1):
                return True
            undo(trail)
        return False

    if not search(0):
        return None
    return fmap
