import pytest
from hypothesis import given, settings, strategies as st

from listident import (AllEmpty, CanonicalCollection, ExplicitCollection, check_k_angluin,
                       peel_relation, stratify, truncate_canonical, verify_stratum_identifiable)
from listident.angluin import Explicit
from listident.errors import ConditionNotSatisfied
from listident.stratify import SizeStratum, check_partition, stratify_generic


def test_peel_relation_examples(pair):
    coll, _ = truncate_canonical(1, 1)
    assert peel_relation(coll, coll.indices(), 2, AllEmpty()) == {(1, 2), (1, 3), (1, 4)}
    assert peel_relation(pair, [1, 2], 1, Explicit({(1, 1): {2}})) == set()
    flat = ExplicitCollection([{1}, {2}, {3}])
    assert peel_relation(flat, [1, 2, 3], 1, AllEmpty()) == set()


def test_stratify_c2(c2):
    st_ = stratify(c2, 3)
    assert [s.size for s in st_.strata] == [0, 1, 2]
    assert [s.level for s in st_.strata] == [3, 2, 1]
    assert st_.empty_levels == []


def test_stratify_c1_two_levels(c1):
    st_ = stratify(c1, 2)
    assert [s.size for s in st_.strata] == [0, 1]


def test_stratify_wider_k_leaves_empty_levels(c1):
    st_ = stratify(c1, 4)
    assert st_.empty_levels == [2, 1]


def test_stratify_pair(pair):
    st_ = stratify(pair, 1)
    assert len(st_.strata) == 1 and st_.strata[0].indices == {1, 2}


def test_stratify_requires_condition(c2):
    with pytest.raises(ConditionNotSatisfied):
        stratify(c2, 2)
    with pytest.raises(ConditionNotSatisfied):
        stratify(CanonicalCollection(None), 5)


def test_verify_examples(c2):
    assert verify_stratum_identifiable(c2, SizeStratum(c2, 2, 1), limit=300)
    assert verify_stratum_identifiable(c2, {1}, telltales=AllEmpty())
    assert not verify_stratum_identifiable(c2, {1, 2}, telltales=AllEmpty())


def test_partition_first_indices(c2):
    st_ = stratify(c2, 3)
    assert check_partition(st_, range(1, 1001)) == (True, True)


@pytest.mark.parametrize("k_max,bound", [(1, 2), (2, 2)])
def test_generic_peel_agrees_with_closed_form(k_max, bound):
    coll, sets = truncate_canonical(k_max, bound)
    generic = stratify_generic(coll, k_max + 1, AllEmpty())
    for s in generic.strata:
        assert {len(sets[i - 1]) for i in s.indices} == {k_max + 1 - s.level}


def test_to_dict(c2):
    d = stratify(c2, 3).to_dict()
    assert d["k"] == 3 and [s["exclusion_size"] for s in d["strata"]] == [0, 1, 2]
    assert d["strata"][1]["first_indices"][:2] == [2, 3]


families = st.lists(st.frozensets(st.integers(0, 4), min_size=1), min_size=1, max_size=6)


@given(families, st.integers(1, 3))
@settings(max_examples=120, deadline=None)
def test_peel_yields_partition_of_identifiable_strata(langs, k):
    coll = ExplicitCollection(langs)
    if not check_k_angluin(coll, k).holds:
        with pytest.raises(ConditionNotSatisfied):
            stratify(coll, k)
        return
    st_ = stratify(coll, k)
    assert check_partition(st_, coll.indices()) == (True, True)
    for s in st_.strata:
        assert verify_stratum_identifiable(coll, s)
