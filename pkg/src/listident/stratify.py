"""Greedy peeling of a k-list-identifiable collection into k single-guess strata.

At level k, draw an edge i -> j whenever L_j is a proper subset of L_i that
contains T_i^(k). Indices without incoming edges form the stratum J_k; the
rest move down one level, where the same peel runs with level-(k-1)
tell-tales. After level 1 nothing may remain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .angluin import AllEmpty, TelltaleAssignment, check_k_angluin, default_telltales
from .errors import ConditionNotSatisfied, ResidueNonEmpty, UndecidableFamily
from .langs import (CanonicalCollection, Collection, ExplicitCollection, SeenSet,
                    proper_subset)


def peel_relation(coll: Collection, I: Iterable[int], level: int,
                  telltales: TelltaleAssignment | None = None) -> set[tuple[int, int]]:
    """Edges (i, j) over the finite index set ``I``."""
    telltales = telltales or default_telltales(coll)
    idx = sorted(set(I))
    langs = {i: coll.language(i) for i in idx}
    edges = set()
    for i in idx:
        t = telltales.telltale(i, level)
        for j in idx:
            if proper_subset(langs[j], langs[i]) and langs[j].contains_all(t):
                edges.add((i, j))
    return edges


class Stratum:
    """One peeled level; provides the single-guess identifier for its members."""

    level: int

    @property
    def empty(self) -> bool:
        raise NotImplementedError

    def __contains__(self, i: int) -> bool:
        raise NotImplementedError

    def telltale(self, i: int) -> frozenset:
        raise NotImplementedError

    def min_feasible(self, S) -> int | None:
        raise NotImplementedError

    def members(self, limit: int) -> list[int]:
        """Members among the first ``limit`` indices of the collection."""
        raise NotImplementedError


@dataclass
class IndexStratum(Stratum):
    """A stratum given by an explicit finite index set."""

    coll: Collection
    level: int
    indices: frozenset
    telltales: TelltaleAssignment

    @property
    def empty(self):
        return not self.indices

    def __contains__(self, i):
        return i in self.indices

    def telltale(self, i):
        return self.telltales.telltale(i, self.level)

    def min_feasible(self, S):
        S_set = S.elements if isinstance(S, SeenSet) else set(S)
        for i in sorted(self.indices):
            lang = self.coll.language(i)
            if lang.contains_all(S_set) and self.telltale(i) <= S_set:
                return i
        return None

    def members(self, limit):
        return sorted(i for i in self.indices if i <= limit)

    def describe(self):
        return {"level": self.level, "indices": sorted(self.indices),
                "empty": self.empty}


@dataclass
class SizeStratum(Stratum):
    """All Z \\ F in a canonical collection with |F| equal to ``size``; empty tell-tales."""

    coll: CanonicalCollection
    level: int
    size: int | None

    @property
    def empty(self):
        return self.size is None

    def __contains__(self, i):
        return self.size is not None and len(self.coll.exclusion(i)) == self.size

    def telltale(self, i):
        return frozenset()

    def min_feasible(self, S):
        # least index among |F| = size with F disjoint from S: the first
        # ``size`` spiral elements not yet sampled
        if self.size is None:
            return None
        free = S.first_absent(self.size) if isinstance(S, SeenSet) else SeenSet(S).first_absent(self.size)
        return self.coll.index_of(free)

    def members(self, limit):
        if self.size is None:
            return []
        return [i for i in range(1, limit + 1) if len(self.coll.exclusion(i)) == self.size]

    def describe(self, preview: int = 10):
        return {"level": self.level, "exclusion_size": self.size, "empty": self.empty,
                "first_indices": self.members(max(preview, 1) * 50)[:preview]}


@dataclass
class Stratification:
    """Strata ordered from level k down to level 1."""

    k: int
    strata: list[Stratum]

    def stratum_of(self, i: int) -> Stratum | None:
        for s in self.strata:
            if i in s:
                return s
        return None

    @property
    def empty_levels(self) -> list[int]:
        return [s.level for s in self.strata if s.empty]

    def to_dict(self) -> dict:
        return {"k": self.k, "strata": [s.describe() for s in self.strata],
                "empty_levels": self.empty_levels}


def stratify_generic(coll: ExplicitCollection, k: int,
                     telltales: TelltaleAssignment | None = None) -> Stratification:
    """The peel on an explicit collection, with the residue check."""
    telltales = telltales or default_telltales(coll)
    remaining = set(coll.indices())
    strata = []
    for level in range(k, 0, -1):
        edges = peel_relation(coll, remaining, level, telltales)
        if level == 1 and edges:
            raise ResidueNonEmpty(f"level-1 relation over the residue has edges {sorted(edges)[:5]}")
        targets = {j for _, j in edges}
        peeled = frozenset(remaining - targets)
        strata.append(IndexStratum(coll, level, peeled, telltales))
        remaining -= peeled
    if remaining:
        raise ResidueNonEmpty(f"indices {sorted(remaining)[:10]} were never peeled")
    return Stratification(k, strata)


def stratify_canonical(coll: CanonicalCollection, k: int) -> Stratification:
    """Closed form: the stratum at level k - s holds the exclusion sets of size s."""
    if coll.k_max is None:
        raise ConditionNotSatisfied("the unbounded canonical family has no finite stratification")
    strata = []
    for level in range(k, 0, -1):
        s = k - level
        strata.append(SizeStratum(coll, level, s if s <= coll.k_max else None))
    return Stratification(k, strata)


def stratify(coll: Collection, k: int, telltales: TelltaleAssignment | None = None,
             cap: int | None = None) -> Stratification:
    verdict = check_k_angluin(coll, k, cap)
    if not verdict.holds:
        raise ConditionNotSatisfied(
            f"{coll!r} fails the {k}-Angluin condition at index {verdict.failing_index}")
    if isinstance(coll, CanonicalCollection):
        return stratify_canonical(coll, k)
    if isinstance(coll, ExplicitCollection):
        return stratify_generic(coll, k, telltales)
    raise UndecidableFamily(f"cannot stratify {coll!r}")


def verify_stratum_identifiable(coll: Collection, stratum, limit: int = 1000,
                                telltales: TelltaleAssignment | None = None,
                                level: int = 1) -> bool:
    """Base predicate inside the stratum: no member b below a member a contains a's tell-tale.

    ``stratum`` is a :class:`Stratum` or a plain index set (then ``telltales``
    at ``level`` supply the tell-tales). Infinite strata are checked over
    their members among the first ``limit`` indices.
    """
    if not isinstance(stratum, Stratum):
        stratum = IndexStratum(coll, level, frozenset(stratum), telltales or AllEmpty())
    members = stratum.members(limit if coll.size is None else coll.size)
    langs = {i: coll.language(i) for i in members}
    for a, b in itertools.permutations(members, 2):
        if proper_subset(langs[b], langs[a]) and langs[b].contains_all(stratum.telltale(a)):
            return False
    return True


def check_partition(strat: Stratification, indices: Iterable[int]) -> tuple[bool, bool]:
    """(disjoint, covering) over the given indices."""
    disjoint = covering = True
    for i in indices:
        hits = sum(1 for s in strat.strata if i in s)
        disjoint &= hits <= 1
        covering &= hits >= 1
    return disjoint, covering
