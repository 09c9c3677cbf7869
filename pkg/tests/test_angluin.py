import pytest
from hypothesis import given, settings, strategies as st

from listident import (AllEmpty, BruteForcePsi, CanonicalCollection, ExplicitCollection,
                       assign_telltales, check_k_angluin, find_unfoolable_root, proper_subset,
                       psi_bruteforce, psi_canonical, truncate_canonical)
from listident.angluin import BruteForceMinimal, Explicit, psi_oracle
from listident.errors import ConditionNotSatisfied, ConditionSatisfied, UndecidableFamily

from oracles import psi_closed, psi_naive


def test_truncated_c1_root():
    coll, _ = truncate_canonical(1, 2)
    cap = len(coll.universe) - 1
    assert not psi_bruteforce(coll, 1, 1, cap).holds
    assert psi_bruteforce(coll, 1, 2, cap).holds


def test_uncapped_search_finds_whole_language():
    # without a cap the full universe is a tell-tale on any finite truncation
    coll, _ = truncate_canonical(1, 2)
    v = psi_bruteforce(coll, 1, 1)
    assert v.holds and v.telltale == coll.universe


def test_capped_negative_is_flagged_inexact():
    coll, _ = truncate_canonical(1, 2)
    assert not psi_bruteforce(coll, 1, 1, 4).exact


def test_pair_telltale(pair):
    v = psi_bruteforce(pair, 1, 1)
    assert v.holds and v.telltale == frozenset({2})


def test_psi_canonical_examples():
    assert not psi_canonical(2, frozenset(), 2)
    assert psi_canonical(2, frozenset(), 3)
    assert psi_canonical(2, frozenset({0, 5}), 1)
    assert not psi_canonical(None, frozenset({0, 5}), 9)
    assert not psi_canonical(3, frozenset({0, 1, 2}), 0)


def test_psi_canonical_example_against_truncation():
    # F = {0, 5} inside C_2 on the universe -2..5
    universe = frozenset(range(-2, 6))
    sets = [frozenset()] + [frozenset({x}) for x in universe] + [
        frozenset({x, y}) for x in universe for y in universe if x < y]
    coll = ExplicitCollection([universe - f for f in sets], universe)
    i = sets.index(frozenset({0, 5})) + 1
    assert psi_bruteforce(coll, i, 1, len(universe) - 2).holds


def test_check_k_angluin_examples():
    c3 = CanonicalCollection(3)
    assert check_k_angluin(c3, 3) == check_k_angluin(c3, 3).__class__(False, 1)
    assert check_k_angluin(c3, 4).holds
    assert check_k_angluin(ExplicitCollection([{1}, {2}]), 1).holds


def test_check_k_angluin_unbounded():
    cinf = CanonicalCollection(None)
    assert all(not check_k_angluin(cinf, k).holds for k in range(1, 9))


def test_assign_telltales_examples(pair, chain3):
    assert isinstance(assign_telltales(CanonicalCollection(1), 2), AllEmpty)
    t = assign_telltales(pair, 1)
    assert t.telltale(1, 1) == {2} and t.telltale(2, 1) == frozenset()
    t = assign_telltales(chain3, 2)
    assert t.telltale(1, 2) == frozenset()
    assert t.telltale(2, 1) == {2}
    assert t.telltale(3, 1) == frozenset()
    assert isinstance(t, BruteForceMinimal)
    assert t.table(2)[(1, 2)] == frozenset()


def test_assign_telltales_requires_condition():
    with pytest.raises(ConditionNotSatisfied):
        assign_telltales(CanonicalCollection(2), 2)


def test_explicit_table_reuses_lower_level():
    t = Explicit({(1, 1): {2}})
    assert t.telltale(1, 3) == {2}
    assert t.telltale(2, 3) == frozenset()
    assert not t.all_empty


def test_find_unfoolable_root(chain3):
    assert find_unfoolable_root(CanonicalCollection(2), 2) == 1
    assert find_unfoolable_root(CanonicalCollection(1), 1) == 1
    with pytest.raises(ConditionSatisfied):
        find_unfoolable_root(CanonicalCollection(2), 3)
    assert find_unfoolable_root(chain3, 0) == 1
    with pytest.raises(ConditionSatisfied):
        find_unfoolable_root(chain3, 1)


def test_oracle_refuses_abstract_family():
    from listident.langs import Collection
    with pytest.raises(UndecidableFamily):
        psi_oracle(Collection())
    with pytest.raises(UndecidableFamily):
        BruteForcePsi(CanonicalCollection(1))


@pytest.mark.parametrize("k_max,bound", [(1, 1), (1, 2), (2, 2), (3, 2)])
def test_truncations_match_closed_form(k_max, bound):
    coll, sets = truncate_canonical(k_max, bound)
    psi = BruteForcePsi(coll, len(coll.universe) - k_max)
    for i, f in enumerate(sets, start=1):
        for j in range(0, k_max + 2):
            assert psi.holds(i, j) == psi_closed(k_max, f, j), (f, j)


families = st.lists(st.frozensets(st.integers(0, 4), min_size=1), min_size=1, max_size=6)


@given(families, st.integers(0, 3), st.integers(0, 5))
@settings(max_examples=150, deadline=None)
def test_bruteforce_matches_naive(langs, k, cap):
    coll = ExplicitCollection(langs)
    psi = BruteForcePsi(coll, cap)
    for i in range(1, len(langs) + 1):
        v = psi.verdict(i, k)
        assert v.holds == psi_naive(tuple(langs), i - 1, k, cap)
        if v.holds:
            # the certificate really works
            assert v.telltale <= langs[i - 1]
            for j, lj in enumerate(langs, start=1):
                if lj < langs[i - 1] and v.telltale <= lj:
                    assert k > 1 and psi.holds(j, k - 1)
        elif k >= 1:
            chain = v.chain
            assert len(chain) == k + 1
            assert all(proper_subset(coll.language(b), coll.language(a))
                       for a, b in zip(chain, chain[1:]))


@given(families, st.integers(1, 3))
@settings(max_examples=100, deadline=None)
def test_psi_monotone_in_level(langs, k):
    psi = BruteForcePsi(ExplicitCollection(langs))
    for i in range(1, len(langs) + 1):
        if psi.holds(i, k):
            assert psi.holds(i, k + 1)
