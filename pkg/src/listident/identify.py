"""The recursive list identifier, transcripts, convergence and top-k voting.

At level k the identifier picks the least feasible index i* (its language
contains the sample and its level-k tell-tale is inside the sample), then
recurses one level down on the proper subsets of L_{i*} that contain i*'s
tell-tale. The guesses collected on the way form the output list.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .angluin import TelltaleAssignment, default_telltales
from .langs import (CanonicalCollection, Collection, ExplicitCollection, Language,
                    SeenSet, as_seen, proper_subset, spiral_position, subset)

DEFAULT_SCAN_CAP = 10 ** 6


@dataclass(frozen=True)
class Frame:
    parent: int
    language: Language
    telltale: frozenset


class LazyIndexSet:
    """The index set of one recursion level, kept as a stack of constraints.

    ``j`` belongs iff ``j > lower_bound`` and, for every frame, L_j is a
    proper subset of the frame's language and contains the frame's tell-tale.
    """

    def __init__(self, coll: Collection, frames: Sequence[Frame] = (), lower_bound: int = 0):
        self.coll = coll
        self.frames = tuple(frames)
        self.lower_bound = lower_bound

    def child(self, parent: int, telltale: frozenset) -> "LazyIndexSet":
        frame = Frame(parent, self.coll.language(parent), frozenset(telltale))
        return LazyIndexSet(self.coll, self.frames + (frame,), parent)

    def __contains__(self, j: int) -> bool:
        if j <= self.lower_bound:
            return False
        if self.coll.size is not None and j > self.coll.size:
            return False
        lang = self.coll.language(j)
        return all(proper_subset(lang, f.language) and lang.contains_all(f.telltale)
                   for f in self.frames)

    @property
    def parent_exclusion(self) -> frozenset:
        return self.frames[-1].language.excluded if self.frames else frozenset()

    def members(self, limit: int | None = None):
        for j in self.coll.indices(limit):
            if j in self:
                yield j

    def __repr__(self):
        return f"LazyIndexSet(frames={[f.parent for f in self.frames]}, lower={self.lower_bound})"


@dataclass(frozen=True)
class Feasible:
    """Result of the feasibility search.

    ``status`` is ``found``, ``infeasible`` (no member qualifies), ``empty``
    (the index set has no members) or ``cap`` (scan cap hit, approximate).
    """

    index: int | None
    status: str
    exact: bool = True
    scanned: int = 0


def _as_set(S) -> set:
    if isinstance(S, SeenSet):
        return S.elements
    return S if isinstance(S, (set, frozenset)) else set(S)


def _canonical_closed_form(I: LazyIndexSet, S, level) -> Feasible:
    coll = I.coll
    if not I.frames:
        return Feasible(1, "found")
    parent = I.parent_exclusion
    if coll.k_max is not None and len(parent) >= coll.k_max:
        return Feasible(None, "empty")
    x = as_seen(S).first_absent(1, skip=parent)[0]
    return Feasible(coll.index_of(parent | {x}), "found")


def _feasible_at(coll, j, S_set, level, telltales) -> bool:
    lang = coll.language(j)
    return lang.contains_all(S_set) and telltales.telltale(j, level) <= S_set


def _scan(I: LazyIndexSet, S, level, telltales, stop: int | None, exact: bool) -> Feasible:
    S_set = _as_set(S)
    any_member = False
    scanned = 0
    for j in itertools.count(I.lower_bound + 1):
        if stop is not None and j > stop:
            break
        scanned += 1
        if j not in I:
            continue
        any_member = True
        if _feasible_at(I.coll, j, S_set, level, telltales):
            return Feasible(j, "found", exact, scanned)
    if exact:
        return Feasible(None, "infeasible" if any_member else "empty", True, scanned)
    return Feasible(None, "cap", False, scanned)


def _explicit_scan(I: LazyIndexSet, S, level, telltales) -> Feasible:
    coll: ExplicitCollection = I.coll
    S_set = _as_set(S)
    s_mask = coll.mask_of(S_set) if S_set <= coll.universe else None
    frame_masks = [(coll.masks[f.parent - 1], coll.mask_of(f.telltale)) for f in I.frames]
    any_member = False
    for j in range(I.lower_bound + 1, coll.size + 1):
        mj = coll.masks[j - 1]
        if not all(mj != mp and mj & ~mp == 0 and mt & ~mj == 0 for mp, mt in frame_masks):
            continue
        any_member = True
        if s_mask is not None and s_mask & ~mj == 0 and telltales.telltale(j, level) <= S_set:
            return Feasible(j, "found", True, j - I.lower_bound)
    return Feasible(None, "infeasible" if any_member else "empty", True,
                    coll.size - I.lower_bound)


def feasible_min_index(I: LazyIndexSet, S, level: int, telltales: TelltaleAssignment | None = None,
                       scan_cap: int = DEFAULT_SCAN_CAP, strategy: str = "auto") -> Feasible:
    """Least member i of ``I`` with ``S`` inside L_i and T_i^(level) inside ``S``.

    For canonical collections with empty tell-tales the answer has a closed
    form: the parent's exclusion set plus the first spiral element that is
    neither sampled nor already excluded. ``strategy="scan"`` instead scans
    indices up to that witness, which is how the closed form is tested.
    """
    coll = I.coll
    telltales = telltales or default_telltales(coll)
    if isinstance(coll, ExplicitCollection):
        return _explicit_scan(I, S, level, telltales)
    if isinstance(coll, CanonicalCollection) and telltales.all_empty:
        closed = _canonical_closed_form(I, S, level)
        if strategy != "scan" or closed.index is None:
            return closed
        return _scan(I, S, level, telltales, closed.index, True)
    return _scan(I, S, level, telltales, I.lower_bound + scan_cap, False)


@dataclass
class IdentifyResult:
    guesses: list[int]
    istars: list[int]
    fallback: bool = False
    exact: bool = True


def list_identify_detailed(coll: Collection, k: int, S, telltales: TelltaleAssignment | None = None,
                           scan_cap: int = DEFAULT_SCAN_CAP, strategy: str = "auto") -> IdentifyResult:
    telltales = telltales or default_telltales(coll)
    I = LazyIndexSet(coll)
    out: list[int] = []
    fallback, exact = False, True
    for level in range(k, 0, -1):
        r = feasible_min_index(I, S, level, telltales, scan_cap, strategy)
        exact = exact and r.exact
        if r.status == "empty":
            break
        if r.index is None:
            out.append(1)
            fallback = True
            break
        out.append(r.index)
        I = I.child(r.index, telltales.telltale(r.index, level))
    istars = out[:-1] if fallback else list(out)
    return IdentifyResult(list(dict.fromkeys(out)), istars, fallback, exact)


def list_identify(coll: Collection, k: int, S, telltales: TelltaleAssignment | None = None,
                  **kw) -> list[int]:
    """Guess list (at most k indices) for the sample set ``S``."""
    return list_identify_detailed(coll, k, S, telltales, **kw).guesses


def pad(guesses: Sequence[int], k: int) -> list[int]:
    """Right-pad to exactly k guesses with index 1."""
    return list(guesses) + [1] * (k - len(guesses))


# -- identifiers as stateful objects --------------------------------------

class Identifier:
    """Sequential identifier: ``push`` one element, get the current guesses."""

    def reset(self) -> None:
        raise NotImplementedError

    def push(self, x: int) -> list[int]:
        raise NotImplementedError

    def run(self, xs: Iterable[int]) -> list[int]:
        self.reset()
        out: list[int] = self.initial()
        for x in xs:
            out = self.push(x)
        return out

    def initial(self) -> list[int]:
        """Guesses on the empty sequence."""
        return []


class ListIdentifier(Identifier):
    """The recursive identifier with an incrementally maintained sample set."""

    def __init__(self, coll: Collection, k: int, telltales: TelltaleAssignment | None = None,
                 scan_cap: int = DEFAULT_SCAN_CAP):
        self.coll, self.k = coll, k
        self.telltales = telltales or default_telltales(coll)
        self.scan_cap = scan_cap
        self.reset()

    def reset(self):
        self.seen = SeenSet()
        self.last = self._compute()

    def _compute(self) -> IdentifyResult:
        return list_identify_detailed(self.coll, self.k, self.seen, self.telltales, self.scan_cap)

    def push(self, x):
        if self.seen.add(x):
            self.last = self._compute()
        return self.last.guesses

    def initial(self):
        return self.last.guesses

    def __call__(self, xs: Iterable[int]) -> list[int]:
        return list_identify(self.coll, self.k, SeenSet(xs), self.telltales, scan_cap=self.scan_cap)


class FunctionIdentifier(Identifier):
    """Wraps ``fn(prefix) -> guesses``, called on the full prefix every step."""

    def __init__(self, fn: Callable[[tuple], Sequence[int]]):
        self.fn = fn
        self.reset()

    def reset(self):
        self.prefix: list[int] = []

    def push(self, x):
        self.prefix.append(int(x))
        return list(self.fn(tuple(self.prefix)))

    def initial(self):
        return list(self.fn(()))


class ConstantIdentifier(Identifier):
    def __init__(self, guesses: Sequence[int]):
        self.guesses = list(guesses)

    def reset(self):
        pass

    def push(self, x):
        return self.guesses

    def initial(self):
        return self.guesses


# -- transcripts ----------------------------------------------------------

@dataclass
class Transcript:
    rows: list[tuple[int, int, tuple[int, ...]]] = field(default_factory=list)
    istars: list[list[int]] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)


def run_identifier(coll: Collection, k: int, enumeration, horizon: int,
                   identifier: Identifier | None = None) -> Transcript:
    """Feed the first ``horizon`` elements of ``enumeration`` to the identifier."""
    ident = identifier or ListIdentifier(coll, k)
    ident.reset()
    tr = Transcript()
    for t, x in enumerate(enumeration.prefix(horizon), start=1):
        guesses = ident.push(x)
        tr.rows.append((t, x, tuple(guesses)))
        if isinstance(ident, ListIdentifier):
            tr.istars.append(list(ident.last.istars))
    return tr


def converged_at(tr: Transcript, coll: Collection, z: int) -> int | None:
    """Least t* such that every recorded guess list from t* on names L_z."""
    if not tr.rows:
        return None
    last_fail = 0
    for t, _, guesses in tr.rows:
        if not coll.identifies(z, guesses):
            last_fail = t
    if last_fail == tr.rows[-1][0]:
        return None
    return last_fail + 1


def stabilized_istars(coll: Collection, k: int, z: int,
                      telltales: TelltaleAssignment | None = None) -> list[int]:
    """The i* chain the identifier settles on for target z, computed directly.

    At each level: the least member of the current index set whose language
    contains L_z and whose tell-tale lies inside L_z. The chain stops once it
    reaches a copy of L_z.
    """
    telltales = telltales or default_telltales(coll)
    target = coll.language(z)
    I = LazyIndexSet(coll)
    chain = []
    for level in range(k, 0, -1):
        best = _least_superset(I, target, level, telltales, z)
        if best is None:
            break
        chain.append(best)
        if coll.same_language(best, z):
            break
        I = I.child(best, telltales.telltale(best, level))
    return chain


def _least_superset(I: LazyIndexSet, target, level, telltales, z):
    coll = I.coll
    if isinstance(coll, CanonicalCollection) and telltales.all_empty:
        parent = I.parent_exclusion
        rest = sorted(target.excluded - parent, key=spiral_position)
        if not I.frames:
            return 1
        if not rest or not parent <= target.excluded:
            return None
        cands = (parent | set(c) for r in range(1, len(rest) + 1)
                 for c in itertools.combinations(rest, r)
                 if coll.k_max is None or len(parent) + r <= coll.k_max)
        return min((coll.index_of(f) for f in cands), default=None)
    stop = coll.size if coll.size is not None else z
    for j in range(I.lower_bound + 1, stop + 1):
        if j in I and subset(target, coll.language(j)) and target.contains_all(
                telltales.telltale(j, level)):
            return j
    return None


def topk_multiset(items: Iterable[int], k: int) -> list[int]:
    """The k most frequent values; ties go to the smaller value."""
    counts = Counter(items)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [i for i, _ in ranked[:k]]


# -- stratified identifier ------------------------------------------------

def stratified_identifier(strata: Sequence, S) -> list[int]:
    """One single-guess identifier per stratum, outputs concatenated.

    Each stratum must provide ``empty`` and ``min_feasible(S)``; an
    infeasible stratum contributes index 1.
    """
    out = []
    seen = as_seen(S)
    for stratum in strata:
        if stratum.empty:
            continue
        i = stratum.min_feasible(seen)
        out.append(1 if i is None else i)
    return list(dict.fromkeys(out))


class StratifiedIdentifier(Identifier):
    def __init__(self, strata: Sequence):
        self.strata = list(strata)
        self.reset()

    def reset(self):
        self.seen = SeenSet()
        self.last = stratified_identifier(self.strata, self.seen)

    def push(self, x):
        if self.seen.add(x):
            self.last = stratified_identifier(self.strata, self.seen)
        return self.last

    def initial(self):
        return self.last

