from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sts_defining.coloring import coloring_array, is_proper, parse_coloring, pattern
from sts_defining.defining import (
    BudgetExhausted,
    DefiningSetRecord,
    NotDefining,
    NotThreeChromatic,
    bose_full_partial,
    bose_level_coloring,
    classify_strength,
    count_extensions,
    is_defining,
    is_minimal_defining,
    largest_minimal_defining,
    min_defining,
    naive_search,
    per_pattern_sizes,
    run_search,
    skolem_defining_set,
    skolem_level_coloring,
    strong_lower_bound_check,
    unique_extension,
)
from sts_defining.designs import bose, builtin, from_blocks, skolem

from test_coloring import N7


def capitals(row: str) -> dict[int, int]:
    col = parse_coloring(row)
    return {i: col[i] for i, ch in enumerate(row) if ch.isupper()}


def test_count_extensions_examples():
    s7 = builtin("sts7")
    assert count_extensions(s7, capitals("RRRGGRy"), 10) == 1
    assert unique_extension(s7, capitals("RRRGGRy")) == parse_coloring("RRRGGRY")
    assert count_extensions(s7, {}, 10**6) == N7
    assert count_extensions(s7, {}, 5) == 5


def test_full_coloring_is_defining_but_not_minimal():
    s7 = builtin("sts7")
    full = dict(enumerate(parse_coloring("RRRGGRY")))
    assert count_extensions(s7, full, 3) == 1
    assert classify_strength(s7, full) == "strong"
    assert not is_minimal_defining(s7, full)


def test_monochromatic_partial_has_no_extension():
    s7 = builtin("sts7")
    a, b, c = s7.blocks[0]
    assert count_extensions(s7, {a: 0, b: 0, c: 0}, 5) == 0


def test_non_defining():
    s7 = builtin("sts7")
    assert not is_defining(s7, {})
    assert not is_minimal_defining(s7, {0: 0})
    with pytest.raises(NotDefining):
        classify_strength(s7, {})
    with pytest.raises(NotDefining):
        unique_extension(s7, {0: 0})


def test_sts13_variant_largest_row():
    s = builtin("sts13-2")
    part = capitals("RGRRGRGYRYGyy")
    assert len(part) == 11 and is_defining(s, part) and is_minimal_defining(s, part)


@pytest.mark.parametrize(
    "name, d, big_d",
    [("sts7", 6, 6), ("sts9", 7, 9), ("sts13-1", 6, 11), ("sts13-2", 6, 11)],
)
def test_small_order_numbers(name, d, big_d):
    s = builtin(name)
    lo = min_defining(s, system_id=name)
    hi = largest_minimal_defining(s, system_id=name)
    assert lo.size == d and hi.size == big_d
    for rec in (lo, hi):
        assert is_minimal_defining(s, rec.partial)
        assert unique_extension(s, rec.partial) == rec.witness
        assert rec.pattern == pattern(rec.witness)


def test_sts9_per_pattern():
    assert per_pattern_sizes(builtin("sts9"), "minimum") == {(3, 3, 3): 7, (4, 3, 2): 7, (4, 4, 1): 8}


def test_pattern_filter():
    rec = min_defining(builtin("sts13-1"), pattern_filter=(5, 4, 4))
    assert rec.size == 6 and rec.pattern == (5, 4, 4)
    with pytest.raises(ValueError):
        min_defining(builtin("sts13-1"), pattern_filter=(7, 3, 3))


@pytest.mark.parametrize("name", ["sts7", "sts9"])
@pytest.mark.parametrize("mode", ["minimum", "largest-minimal"])
def test_oracle_agreement(name, mode):
    s = builtin(name)
    size, partial, witness = naive_search(s, mode)
    rec, _ = run_search(s, mode)
    assert (rec.size, rec.partial, rec.witness) == (size, partial, witness)


def test_jobs_do_not_change_records():
    s = builtin("sts9")
    for mode in ("minimum", "largest-minimal"):
        a, _ = run_search(s, mode, jobs=1)
        b, _ = run_search(s, mode, jobs=3)
        assert a.to_json() == b.to_json()


def test_budget_exhaustion_reports_bound():
    with pytest.raises(BudgetExhausted) as info:
        min_defining(builtin("sts9"), budget=10 * (1 << 9))
    assert info.value.proven == 10 and info.value.best is not None and info.value.best >= 7


def test_two_chromatic_rejected():
    with pytest.raises(NotThreeChromatic):
        min_defining(from_blocks(3, [[0, 1, 2]]))


@pytest.mark.parametrize("name", ["sts7", "sts9"])
def test_no_small_strong_defining_set(name):
    assert strong_lower_bound_check(builtin(name))


def test_strong_scan_budget():
    with pytest.raises(BudgetExhausted):
        strong_lower_bound_check(builtin("sts9"), budget=100)


@pytest.mark.parametrize("n", [1, 2])
def test_bose_level_coloring(n):
    s = bose(n)
    col = bose_level_coloring(n)
    assert is_proper(s, col)
    assert pattern(col) == (2 * n + 1,) * 3
    assert is_minimal_defining(s, bose_full_partial(n))


@pytest.mark.parametrize("n", [1, 2])
def test_skolem_defining_set(n):
    s = skolem(n)
    part = skolem_defining_set(n)
    assert len(part) == 5 * n + 1
    assert is_proper(s, skolem_level_coloring(n))
    assert is_minimal_defining(s, part)
    assert unique_extension(s, part) == skolem_level_coloring(n)


def test_record_json_round_trip():
    rec = min_defining(builtin("sts9"), system_id="sts9")
    doc = rec.to_json()
    assert list(doc) == ["system_id", "v", "pattern", "set", "size", "kind", "strength", "witness"]
    again = DefiningSetRecord.from_json(json.loads(json.dumps(doc)))
    assert again == rec and again.partial == rec.partial


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["sts7", "sts9", "sts13-1"]), st.data())
def test_defining_is_monotone(name, data):
    s = builtin(name)
    cols = coloring_array(s)
    col = cols[data.draw(st.integers(0, len(cols) - 1))].tolist()
    pts = data.draw(st.sets(st.integers(0, s.v - 1)))
    extra = data.draw(st.sets(st.integers(0, s.v - 1)))
    small = {p: col[p] for p in pts}
    big = {p: col[p] for p in pts | extra}
    if is_defining(s, small):
        assert is_defining(s, big)
        assert unique_extension(s, big) == tuple(col)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["sts7", "sts9"]), st.data())
def test_count_matches_filtering(name, data):
    s = builtin(name)
    cols = coloring_array(s)
    col = cols[data.draw(st.integers(0, len(cols) - 1))].tolist()
    pts = sorted(data.draw(st.sets(st.integers(0, s.v - 1))))
    expected = int((cols[:, pts] == [col[p] for p in pts]).all(axis=1).sum()) if pts else len(cols)
    assert count_extensions(s, {p: col[p] for p in pts}, 10**6) == expected


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["sts7", "sts9", "sts13-2"]), st.randoms(use_true_random=False), st.data())
def test_defining_is_relabel_and_palette_equivariant(name, rnd, data):
    s = builtin(name)
    cols = coloring_array(s)
    col = cols[data.draw(st.integers(0, len(cols) - 1))].tolist()
    pts = data.draw(st.sets(st.integers(0, s.v - 1)))
    part = {p: col[p] for p in pts}
    perm = list(range(s.v))
    rnd.shuffle(perm)
    swap = data.draw(st.permutations([0, 1, 2]))
    moved = {perm[p]: swap[c] for p, c in part.items()}
    assert is_defining(s, part) == is_defining(s.relabel(perm), moved)
