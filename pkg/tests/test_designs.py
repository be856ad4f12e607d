from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sts_defining.designs import (
    NotADesign,
    UnknownName,
    are_isomorphic,
    bose,
    builtin,
    cyclic_sts,
    from_blocks,
    half_idempotent_quasigroup,
    idempotent_quasigroup,
    is_admissible,
    parse_text,
    pasch_configurations,
    skolem,
    subsystems7,
)

SMALL = ["sts7", "sts9", "sts13-1", "sts13-2"]


def _pairs_covered_once(sys):
    seen = {}
    for blk in sys.blocks:
        a, b, c = blk
        for pair in ((a, b), (a, c), (b, c)):
            seen[pair] = seen.get(pair, 0) + 1
    return len(seen) == sys.v * (sys.v - 1) // 2 and set(seen.values()) == {1}


@pytest.mark.parametrize("name", SMALL)
def test_builtins_are_valid(name):
    s = builtin(name)
    assert s.b == s.v * (s.v - 1) // 6
    assert _pairs_covered_once(s)
    assert all(len(s.blocks_through[x]) == s.r for x in range(s.v))


def test_sts7_is_the_cyclic_development():
    assert builtin("sts7") == cyclic_sts(7, [[0, 1, 3]])
    assert builtin("sts7").b == 7


def test_sts13_variant_contains_swapped_block():
    one, two = builtin("sts13-1"), builtin("sts13-2")
    assert (2, 7, 9) in two.block_set()
    assert (2, 7, 9) not in one.block_set()
    assert are_isomorphic(one, two) is None
    assert len(pasch_configurations(one)) != len(pasch_configurations(two))


def test_unknown_builtin():
    with pytest.raises(UnknownName):
        builtin("sts11")


def test_third_point_lookup():
    s = builtin("sts9")
    for a, b, c in s.blocks:
        assert s.third(a, b) == c and s.third(c, a) == b


@pytest.mark.parametrize(
    "v, blocks",
    [
        (7, [(0, 1, 3)]),  # too few blocks
        (8, []),  # inadmissible
        (7, [(0, 1, 2), (0, 1, 3), (0, 4, 5), (0, 6, 2), (1, 4, 6), (1, 5, 2), (3, 4, 2)]),  # repeated pair
        (7, [(0, 1, 1)] * 7),
        (7, [(0, 1, 9)] * 7),
        (7, [(0, 1)] * 7),
    ],
)
def test_from_blocks_rejects(v, blocks):
    with pytest.raises(NotADesign):
        from_blocks(v, blocks)


def test_cyclic_bad_base_rejected():
    with pytest.raises(NotADesign):
        cyclic_sts(7, [[0, 1, 2]])


def test_cyclic_sts13():
    s = cyclic_sts(13, [[0, 1, 4], [0, 2, 7]])
    assert s == builtin("sts13-1")


@pytest.mark.parametrize("name", SMALL)
def test_text_round_trip(name):
    s = builtin(name)
    assert parse_text(s.to_text()) == s


@pytest.mark.parametrize("v", [1, 3, 7, 9, 13, 15, 19, 21])
def test_admissible(v):
    assert is_admissible(v)


@pytest.mark.parametrize("v", [2, 4, 5, 6, 8, 10, 11, 12, 14])
def test_inadmissible(v):
    assert not is_admissible(v)


@given(st.integers(min_value=1, max_value=8))
def test_idempotent_quasigroup_laws(n):
    q = idempotent_quasigroup(n)
    assert q.is_latin() and q.is_commutative() and q.is_idempotent()


@given(st.integers(min_value=1, max_value=8))
def test_half_idempotent_quasigroup_laws(n):
    q = half_idempotent_quasigroup(n)
    assert q.is_latin() and q.is_commutative() and q.is_half_idempotent()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bose_parameters(n):
    s = bose(n)
    assert s.v == 6 * n + 3 and s.b == s.v * (s.v - 1) // 6
    assert _pairs_covered_once(s)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_skolem_parameters(n):
    s = skolem(n)
    assert s.v == 6 * n + 1 and s.b == s.v * (s.v - 1) // 6
    assert _pairs_covered_once(s)


def test_small_family_members_match_builtins():
    assert are_isomorphic(bose(1), builtin("sts9")) is not None
    assert are_isomorphic(skolem(1), builtin("sts7")) is not None


def test_bose2_is_anti_pasch():
    s = bose(2)
    assert pasch_configurations(s) == []
    assert subsystems7(s) == []


def test_isomorphism_returns_a_valid_map():
    s = builtin("sts13-2")
    perm = list(range(13))
    random.Random(5).shuffle(perm)
    t = s.relabel(perm)
    phi = are_isomorphic(s, t)
    assert phi is not None
    assert s.relabel(phi) == t


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SMALL), st.randoms(use_true_random=False))
def test_isomorphism_reflexive_and_symmetric(name, rnd):
    s = builtin(name)
    perm = list(range(s.v))
    rnd.shuffle(perm)
    t = s.relabel(perm)
    assert are_isomorphic(s, s) is not None
    assert are_isomorphic(s, t) is not None
    assert are_isomorphic(t, s) is not None


def test_isomorphism_rejects_different_orders():
    assert are_isomorphic(builtin("sts7"), builtin("sts9")) is None
