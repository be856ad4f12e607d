"""The eighty non-isomorphic STS(15)s, indexed 1..80 in the standard listing order."""

from __future__ import annotations

import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .designs import NotADesign, TripleSystem, are_isomorphic, from_blocks, pasch_configurations, point_fingerprints

CATALOG_SIZE = 80
ENV_VAR = "STS_CATALOG"


class ParseError(ValueError):
    pass


class WrongCount(ValueError):
    pass


@dataclass(frozen=True)
class Catalog:
    entries: tuple[TripleSystem, ...]
    source_digest: str

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, system_id: int) -> TripleSystem:
        if not 1 <= system_id <= len(self.entries):
            raise KeyError(f"catalog ids run 1..{len(self.entries)}, got {system_id}")
        return self.entries[system_id - 1]

    def ids(self) -> range:
        return range(1, len(self.entries) + 1)


def default_path() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("sts_defining") / "data" / "sts15_catalog.json"))


def parse_catalog(raw: bytes, expected: int | None = CATALOG_SIZE) -> Catalog:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("catalog must be a JSON array")
    if expected is not None and len(data) != expected:
        raise WrongCount(f"catalog holds {len(data)} systems, expected {expected}")
    entries = []
    for pos, obj in enumerate(data, start=1):
        try:
            sid, blocks = obj["id"], obj["blocks"]
        except (TypeError, KeyError) as exc:
            raise ParseError(f"entry {pos} lacks 'id'/'blocks'") from exc
        if sid != pos:
            raise ParseError(f"entry {pos} carries id {sid}; ids must follow file order")
        try:
            entries.append(from_blocks(15, blocks))
        except NotADesign as exc:
            raise NotADesign(f"catalog #{sid}: {exc}") from exc
    return Catalog(tuple(entries), hashlib.sha256(raw).hexdigest())


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load and validate a catalog file (the embedded copy by default)."""
    return parse_catalog(Path(path or default_path()).read_bytes())


def dump_catalog(systems: list[TripleSystem]) -> str:
    """Serialise in the catalog format, one entry per line."""
    lines = [
        json.dumps({"id": i, "blocks": [list(b) for b in s.blocks]}, separators=(",", ":"))
        for i, s in enumerate(systems, start=1)
    ]
    return "[\n" + ",\n".join(lines) + "\n]\n"


def fingerprints(cat: Catalog) -> list[list[tuple[int, ...]]]:
    return [point_fingerprints(s) for s in cat.entries]


def verify_pairwise_nonisomorphic(cat: Catalog, budget: int | None = None) -> bool:
    """Fingerprint partition first, exact isomorphism test only on collisions."""
    fps = fingerprints(cat)
    buckets: dict[tuple, list[int]] = {}
    for i, fp in enumerate(fps):
        buckets.setdefault(tuple(sorted(fp)), []).append(i)
    tests = 0
    for members in buckets.values():
        for k, i in enumerate(members):
            for j in members[k + 1 :]:
                tests += 1
                if budget is not None and tests > budget:
                    from .defining import BudgetExhausted

                    raise BudgetExhausted("isomorphism budget exhausted", None, tests, -1)
                if are_isomorphic(cat.entries[i], cat.entries[j], fps[i], fps[j]) is not None:
                    return False
    return True


def identify(sys: TripleSystem, cat: Catalog) -> int | None:
    """Catalog id of the entry isomorphic to ``sys``, if any."""
    if sys.v != 15:
        return None
    fp = point_fingerprints(sys)
    hits = [
        sid
        for sid, entry in zip(cat.ids(), cat.entries)
        if are_isomorphic(sys, entry, fp) is not None
    ]
    assert len(hits) <= 1, f"catalog entries {hits} are isomorphic"
    return hits[0] if hits else None


def pasch_distribution(cat: Catalog) -> dict[int, int]:
    """Pasch-configuration count -> number of catalog systems with that count."""
    counts = Counter(len(pasch_configurations(s)) for s in cat.entries)
    return dict(sorted(counts.items()))
