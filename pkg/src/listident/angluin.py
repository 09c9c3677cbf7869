"""The recursive tell-tale predicate Psi(L_i, k) and the k-Angluin condition.

Psi(L_i, 1) holds when some finite T inside L_i is contained in no proper
subset language of L_i. Psi(L_i, k) relaxes this: proper subsets that contain
T are allowed as long as they satisfy Psi(., k-1). Psi(., 0) is false.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import kernels
from .errors import ConditionNotSatisfied, ConditionSatisfied, UndecidableFamily
from .langs import CanonicalCollection, Collection, ExplicitCollection

MAX_LEVEL = 16


@dataclass(frozen=True)
class PsiVerdict:
    """Outcome of a predicate evaluation.

    When ``holds`` is true, ``telltale`` is the certifying set. Otherwise
    ``chain`` is a strictly decreasing index chain ``(i, j_1, ..., j_k)``
    that unfolds the negation. ``exact`` is false when the tell-tale size cap
    was below the size of the language, in which case a negative verdict only
    means that no small tell-tale exists.
    """

    index: int
    level: int
    holds: bool
    telltale: frozenset | None = None
    chain: tuple[int, ...] | None = None
    exact: bool = True


class BruteForcePsi:
    """Exhaustive evaluation of Psi on an explicit collection.

    Tell-tales are searched by cardinality, then lexicographically on the
    sorted elements, up to ``cap`` elements (default: the universe size,
    which is exact). Results are memoized on ``(i, level)``.
    """

    def __init__(self, coll: ExplicitCollection, cap: int | None = None):
        if not isinstance(coll, ExplicitCollection):
            raise UndecidableFamily("brute force needs an explicit collection")
        self.coll = coll
        self.cap = len(coll.universe) if cap is None else cap
        self._memo: dict[tuple[int, int], PsiVerdict] = {}
        masks = coll.masks
        self._below = [
            [j for j, mj in enumerate(masks) if mj != mi and mj & ~mi == 0]
            for mi in masks
        ]

    def __call__(self, i: int, level: int) -> bool:
        return self.verdict(i, level).holds

    def holds(self, i: int, level: int) -> bool:
        return self.verdict(i, level).holds

    def verdict(self, i: int, level: int) -> PsiVerdict:
        self.coll._check(i)
        if level > MAX_LEVEL:
            raise ValueError(f"level {level} exceeds the supported depth {MAX_LEVEL}")
        key = (i, level)
        v = self._memo.get(key)
        if v is None:
            v = self._evaluate(i, level)
            self._memo[key] = v
        return v

    def _evaluate(self, i: int, level: int) -> PsiVerdict:
        coll = self.coll
        size = coll.languages[i - 1].size
        exact = self.cap >= size
        if level <= 0:
            return PsiVerdict(i, level, False, chain=(i,), exact=True)
        mi = coll.masks[i - 1]
        bad = [j for j in self._below[i - 1] if level == 1 or not self.holds(j + 1, level - 1)]
        members = [b for b in range(mi.bit_length()) if mi >> b & 1]
        needs = [mi & ~coll.masks[j] for j in bad]
        hit = kernels.min_hitting_subset(members, needs, self.cap)
        if hit is not None:
            telltale = frozenset(coll.element_of_bit(b) for b in hit)
            return PsiVerdict(i, level, True, telltale=telltale, exact=True)
        return PsiVerdict(i, level, False, chain=self._chain(i, level, bad), exact=exact)

    def _chain(self, i, level, bad):
        # A failing T: the first ``cap`` members. Some bad j contains it.
        mi = self.coll.masks[i - 1]
        bits = [b for b in range(mi.bit_length()) if mi >> b & 1][: self.cap]
        t = 0
        for b in bits:
            t |= 1 << b
        for j in bad:
            if self.coll.masks[j] & t == t:
                if level == 1:
                    return (i, j + 1)
                return (i,) + self.verdict(j + 1, level - 1).chain
        return (i,)


def psi_bruteforce(coll: ExplicitCollection, i: int, k: int,
                   max_telltale_size: int | None = None) -> PsiVerdict:
    return BruteForcePsi(coll, max_telltale_size).verdict(i, k)


def psi_canonical(k_max: int | None, excluded, level: int) -> bool:
    """Closed form of Psi(Z \\ F, level) inside C_{k_max}."""
    if k_max is None or level <= 0:
        return False
    return len(excluded) >= k_max - level + 1


class CanonicalPsi:
    """Psi oracle for a canonical collection, via the closed form."""

    def __init__(self, coll: CanonicalCollection):
        self.coll = coll

    def holds(self, i: int, level: int) -> bool:
        return psi_canonical(self.coll.k_max, self.coll.exclusion(i), level)

    __call__ = holds


def psi_oracle(coll: Collection, cap: int | None = None):
    if isinstance(coll, CanonicalCollection):
        return CanonicalPsi(coll)
    if isinstance(coll, ExplicitCollection):
        return BruteForcePsi(coll, cap)
    raise UndecidableFamily(f"no decision procedure for {coll!r}")


@dataclass(frozen=True)
class AngluinVerdict:
    holds: bool
    failing_index: int | None = None
    exact: bool = True


def check_k_angluin(coll: Collection, k: int, cap: int | None = None) -> AngluinVerdict:
    """Whether every language of ``coll`` satisfies Psi(., k)."""
    if isinstance(coll, CanonicalCollection):
        # Psi is monotone in |F|, so Z (index 1) is the weakest language.
        if psi_canonical(coll.k_max, frozenset(), k):
            return AngluinVerdict(True)
        return AngluinVerdict(False, 1)
    if isinstance(coll, ExplicitCollection):
        psi = BruteForcePsi(coll, cap)
        exact = True
        for i in coll.indices():
            v = psi.verdict(i, k)
            if not v.holds:
                return AngluinVerdict(False, i, v.exact)
        return AngluinVerdict(True, None, exact)
    raise UndecidableFamily(f"no decision procedure for {coll!r}")


# -- tell-tale assignments ------------------------------------------------

class TelltaleAssignment:
    """Maps ``(index, level)`` to a finite tell-tale set."""

    def telltale(self, i: int, level: int) -> frozenset:
        raise NotImplementedError

    @property
    def all_empty(self) -> bool:
        return False


class AllEmpty(TelltaleAssignment):
    def telltale(self, i, level):
        return frozenset()

    @property
    def all_empty(self):
        return True

    def __repr__(self):
        return "AllEmpty()"


class Explicit(TelltaleAssignment):
    """A fixed table. Missing levels reuse the nearest assigned lower level."""

    def __init__(self, table: Mapping[tuple[int, int], frozenset]):
        self.table = {key: frozenset(v) for key, v in table.items()}

    def telltale(self, i, level):
        for lv in range(level, 0, -1):
            t = self.table.get((i, lv))
            if t is not None:
                return t
        return frozenset()

    @property
    def all_empty(self):
        return not any(self.table.values())


class BruteForceMinimal(TelltaleAssignment):
    """Per-level minimal tell-tales computed on demand.

    An index whose predicate fails at the requested level gets its whole
    language, which makes it feasible only once it has been fully observed.
    """

    def __init__(self, psi: BruteForcePsi):
        self.psi = psi

    def telltale(self, i, level):
        v = self.psi.verdict(i, level)
        if v.holds:
            return v.telltale
        return self.psi.coll.language(i).members

    def table(self, k: int) -> dict[tuple[int, int], frozenset]:
        out = {}
        for i in self.psi.coll.indices():
            for lv in range(1, k + 1):
                v = self.psi.verdict(i, lv)
                if v.holds:
                    out[(i, lv)] = v.telltale
        return out


def assign_telltales(coll: Collection, k: int, cap: int | None = None) -> TelltaleAssignment:
    verdict = check_k_angluin(coll, k, cap)
    if not verdict.holds:
        raise ConditionNotSatisfied(
            f"{coll!r} fails the {k}-Angluin condition at index {verdict.failing_index}")
    if isinstance(coll, CanonicalCollection):
        return AllEmpty()
    return BruteForceMinimal(BruteForcePsi(coll, cap))


def default_telltales(coll: Collection, cap: int | None = None) -> TelltaleAssignment:
    """Tell-tales without the condition check (used by identifiers on any input)."""
    if isinstance(coll, CanonicalCollection):
        return AllEmpty()
    return BruteForceMinimal(BruteForcePsi(coll, cap))


def find_unfoolable_root(coll: Collection, k: int, psi=None) -> int:
    """Least index whose predicate fails at level k."""
    if isinstance(coll, CanonicalCollection):
        if psi_canonical(coll.k_max, frozenset(), k):
            raise ConditionSatisfied(f"{coll!r} satisfies the {k}-Angluin condition")
        return 1
    psi = psi or psi_oracle(coll)
    for i in coll.indices():
        if not psi.holds(i, k):
            return i
    raise ConditionSatisfied(f"{coll!r} satisfies the {k}-Angluin condition")
