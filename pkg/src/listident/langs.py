"""Languages over the integers, indexed collections, enumerations, distributions.

The universe is Z. A language is either an explicit finite set or a cofinite
set ``Z \\ F``. Integers are ordered by the spiral ``0, -1, 1, -2, 2, ...``;
spiral positions are 1-based.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import kernels
from .errors import IndexOutOfRange


# -- spiral order ---------------------------------------------------------

def spiral_value(pos: int) -> int:
    """The integer at 1-based spiral position ``pos``."""
    if pos < 1:
        raise ValueError("spiral positions start at 1")
    return -(pos // 2) if pos % 2 == 0 else (pos - 1) // 2


def spiral_position(x: int) -> int:
    return 2 * x + 1 if x >= 0 else -2 * x


def spiral_values(positions: np.ndarray) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.int64)
    return np.where(positions % 2 == 0, -(positions // 2), (positions - 1) // 2)


def spiral_sorted(xs: Iterable[int]) -> list[int]:
    return sorted(xs, key=spiral_position)


# -- languages ------------------------------------------------------------

@dataclass(frozen=True)
class Finite:
    """An explicit, non-empty finite language."""

    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(x) for x in self.members))
        if not self.members:
            raise ValueError("languages must be non-empty")

    def __contains__(self, x) -> bool:
        return x in self.members

    def contains_all(self, xs) -> bool:
        if not isinstance(xs, (set, frozenset)):
            xs = set(xs)
        return xs <= self.members

    @property
    def size(self):
        return len(self.members)

    def __repr__(self):
        return "{" + ", ".join(map(str, spiral_sorted(self.members))) + "}"


@dataclass(frozen=True)
class Cofinite:
    """The language ``Z \\ excluded``."""

    excluded: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "excluded", frozenset(int(x) for x in self.excluded))

    def __contains__(self, x) -> bool:
        return x not in self.excluded

    def contains_all(self, xs) -> bool:
        if isinstance(xs, SeenSet):
            xs = xs.elements
        elif not isinstance(xs, (set, frozenset)):
            xs = set(xs)
        return self.excluded.isdisjoint(xs)

    @property
    def size(self):
        return float("inf")

    def __repr__(self):
        if not self.excluded:
            return "Z"
        return "Z\\{" + ", ".join(map(str, spiral_sorted(self.excluded))) + "}"


Language = Union[Finite, Cofinite]
FULL = Cofinite()


def member(lang: Language, x: int) -> bool:
    return x in lang


def subset(a: Language, b: Language) -> bool:
    if isinstance(a, Cofinite):
        return isinstance(b, Cofinite) and b.excluded <= a.excluded
    if isinstance(b, Cofinite):
        return a.members.isdisjoint(b.excluded)
    return a.members <= b.members


def proper_subset(a: Language, b: Language) -> bool:
    """True iff ``a`` is a proper subset of ``b``."""
    if isinstance(a, Cofinite):
        return isinstance(b, Cofinite) and b.excluded < a.excluded
    if isinstance(b, Cofinite):
        return a.members.isdisjoint(b.excluded)
    return a.members < b.members


def remove_element(lang: Language, x: int) -> Language | None:
    """``lang \\ {x}``, or None if that would be empty."""
    if isinstance(lang, Cofinite):
        return Cofinite(lang.excluded | {x})
    rest = lang.members - {x}
    return Finite(rest) if rest else None


# -- incremental sample set -----------------------------------------------

class SeenSet:
    """A growing set of integers that also tracks spiral-order gaps.

    ``first_absent(n)`` returns the n spiral-first integers not yet added in
    time proportional to the number of gaps, not the number of elements.
    """

    def __init__(self, xs: Iterable[int] = ()):
        self.elements: set[int] = set()
        self._starts: list[int] = []
        self._ends: list[int] = []
        self._frontier = 0
        for x in xs:
            self.add(x)

    def add(self, x: int) -> bool:
        x = int(x)
        if x in self.elements:
            return False
        self.elements.add(x)
        p = spiral_position(x)
        if p > self._frontier:
            if p > self._frontier + 1:
                self._starts.append(self._frontier + 1)
                self._ends.append(p)
            self._frontier = p
            return True
        k = bisect.bisect_right(self._starts, p) - 1
        s, e = self._starts[k], self._ends[k]
        pieces = [(a, b) for a, b in ((s, p), (p + 1, e)) if a < b]
        self._starts[k:k + 1] = [a for a, _ in pieces]
        self._ends[k:k + 1] = [b for _, b in pieces]
        return True

    def absent_positions(self) -> Iterator[int]:
        for s, e in zip(self._starts, self._ends):
            yield from range(s, e)
        yield from itertools.count(self._frontier + 1)

    def first_absent(self, n: int = 1, skip: Iterable[int] = ()) -> list[int]:
        skip = set(skip)
        out = []
        if n <= 0:
            return out
        for p in self.absent_positions():
            x = spiral_value(p)
            if x in skip:
                continue
            out.append(x)
            if len(out) == n:
                return out
        return out

    def copy(self) -> "SeenSet":
        other = SeenSet()
        other.elements = set(self.elements)
        other._starts = list(self._starts)
        other._ends = list(self._ends)
        other._frontier = self._frontier
        return other

    def __contains__(self, x):
        return x in self.elements

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"SeenSet({spiral_sorted(self.elements)})"


def as_seen(xs) -> SeenSet:
    return xs if isinstance(xs, SeenSet) else SeenSet(xs)


# -- collections ----------------------------------------------------------

class Collection:
    """An indexed family of languages; indices start at 1."""

    def language(self, i: int) -> Language:
        raise NotImplementedError

    def first_index(self, i: int) -> int:
        raise NotImplementedError

    @property
    def size(self) -> int | None:
        """Number of indices, or None for an infinite family."""
        return None

    def indices(self, limit: int | None = None) -> Iterator[int]:
        stop = self.size if limit is None else (
            limit if self.size is None else min(limit, self.size))
        return iter(range(1, stop + 1)) if stop is not None else itertools.count(1)

    def same_language(self, i: int, j: int) -> bool:
        return self.first_index(i) == self.first_index(j)

    def identifies(self, target: int, guesses: Iterable[int]) -> bool:
        """True iff some guess names the same language as ``target``."""
        f = self.first_index(target)
        return any(self.first_index(g) == f for g in guesses)


class ExplicitCollection(Collection):
    """A finite list of finite languages over a finite universe."""

    def __init__(self, languages: Sequence, universe: Iterable[int] | None = None):
        langs = tuple(lang if isinstance(lang, Finite) else Finite(frozenset(lang))
                      for lang in languages)
        if not langs:
            raise ValueError("empty collection")
        members = frozenset().union(*(lang.members for lang in langs))
        self.universe = frozenset(universe) if universe is not None else members
        if not members <= self.universe:
            raise ValueError("language members must lie inside the universe")
        self.languages = langs
        self._order = sorted(self.universe)
        self._bit = {x: b for b, x in enumerate(self._order)}
        self.masks = tuple(self.mask_of(lang.members) for lang in langs)
        first = {}
        self._first = []
        for i, lang in enumerate(langs, start=1):
            self._first.append(first.setdefault(lang.members, i))

    def mask_of(self, xs: Iterable[int]) -> int:
        m = 0
        for x in xs:
            m |= 1 << self._bit[x]
        return m

    def bit_positions(self, xs: Iterable[int]) -> list[int]:
        return sorted(self._bit[x] for x in xs)

    def element_of_bit(self, b: int) -> int:
        return self._order[b]

    @property
    def size(self):
        return len(self.languages)

    def _check(self, i):
        if not 1 <= i <= len(self.languages):
            raise IndexOutOfRange(f"index {i} outside 1..{len(self.languages)}")

    def language(self, i):
        self._check(i)
        return self.languages[i - 1]

    def first_index(self, i):
        self._check(i)
        return self._first[i - 1]

    def __repr__(self):
        return f"ExplicitCollection({list(self.languages)!r})"


@lru_cache(maxsize=1 << 16)
def _exclusion_cached(index: int, k_max: int | None) -> frozenset:
    return frozenset(spiral_value(p) for p in kernels.unrank_exclusion(index, k_max))


class CanonicalCollection(Collection):
    """``{Z} ∪ {Z \\ F : 1 <= |F| <= k_max}``; ``k_max=None`` is the unbounded family.

    Exclusion sets are grouped by their largest spiral position, groups in
    increasing order, and inside a group sorted by size then lexicographically
    on sorted spiral positions. Index 1 is Z.
    """

    def __init__(self, k_max: int | None):
        if k_max is not None and k_max < 1:
            raise ValueError("k_max must be positive or None")
        self.k_max = k_max

    def exclusion(self, i: int) -> frozenset:
        if i < 1:
            raise IndexOutOfRange(f"index {i} < 1")
        return _exclusion_cached(i, self.k_max)

    def index_of(self, excluded: Iterable[int]) -> int:
        positions = sorted(spiral_position(x) for x in set(excluded))
        return kernels.rank_exclusion(positions, self.k_max)

    def language(self, i):
        return Cofinite(self.exclusion(i))

    def index_of_language(self, lang: Language) -> int:
        if not isinstance(lang, Cofinite):
            raise ValueError("canonical collections hold cofinite languages only")
        return self.index_of(lang.excluded)

    def first_index(self, i):
        if i < 1:
            raise IndexOutOfRange(f"index {i} < 1")
        return i

    def __eq__(self, other):
        return isinstance(other, CanonicalCollection) and other.k_max == self.k_max

    def __hash__(self):
        return hash(("canonical", self.k_max))

    def __repr__(self):
        return f"CanonicalCollection(k_max={'inf' if self.k_max is None else self.k_max})"


def language_at(coll: Collection, i: int) -> Language:
    return coll.language(i)


def first_index(coll: Collection, i: int) -> int:
    return coll.first_index(i)


def truncate_canonical(k_max: int, bound: int) -> tuple[ExplicitCollection, list[frozenset]]:
    """C_k restricted to the universe ``{-bound..bound}``, in canonical order.

    Returns the explicit collection and the exclusion set behind each index.
    """
    universe = frozenset(range(-bound, bound + 1))
    if len(universe) <= k_max:
        raise ValueError("universe too small for this k_max")
    positions = sorted(spiral_position(x) for x in universe)
    sets = [frozenset()]
    for s in range(1, k_max + 1):
        sets.extend(frozenset(spiral_value(p) for p in c)
                    for c in itertools.combinations(positions, s))
    sets.sort(key=lambda f: kernels.rank_exclusion(sorted(spiral_position(x) for x in f), k_max))
    return ExplicitCollection([Finite(universe - f) for f in sets], universe), sets


# -- enumerations ---------------------------------------------------------

class Enumeration:
    """A deterministic infinite sequence of elements of ``language``.

    Positions are 1-based. ``length`` is the number of positions before the
    sequence starts repeating its last element (None if it never does).
    """

    language: Language
    length: int | None = None

    def at(self, i: int) -> int:
        raise NotImplementedError

    def at_many(self, idx: np.ndarray) -> np.ndarray:
        return np.fromiter((self.at(int(i)) for i in np.asarray(idx).ravel()),
                           dtype=np.int64, count=np.asarray(idx).size)

    def prefix(self, t: int) -> list[int]:
        return [self.at(i) for i in range(1, t + 1)]

    def __iter__(self):
        return (self.at(i) for i in itertools.count(1))

    def geometric_mass(self, x: int) -> Fraction:
        """``sum over i with sigma_i = x of 2**-i``, exactly."""
        raise NotImplementedError

    def prefix_sets(self, t: int) -> list[frozenset]:
        seen, out = set(), []
        for x in self.prefix(t):
            seen.add(x)
            out.append(frozenset(seen))
        return out


def _finite_mass(positions: list[int], length: int) -> Fraction:
    total = Fraction(0)
    for i in positions:
        total += Fraction(1, 2 ** i) if i < length else Fraction(1, 2 ** (length - 1))
    return total


class CanonicalEnumeration(Enumeration):
    """The spiral order restricted to the language."""

    def __init__(self, language: Language):
        self.language = language
        if isinstance(language, Finite):
            self._members = spiral_sorted(language.members)
            self.length = len(self._members)
        else:
            self._excl = sorted(spiral_position(x) for x in language.excluded)
            self.length = None

    def _position(self, i: int) -> int:
        p = i
        for e in self._excl:
            if e <= p:
                p += 1
        return p

    def at(self, i):
        if i < 1:
            raise IndexError("enumeration positions start at 1")
        if self.length is not None:
            return self._members[min(i, self.length) - 1]
        return spiral_value(self._position(i))

    def at_many(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        if self.length is not None:
            table = np.asarray(self._members, dtype=np.int64)
            return table[np.minimum(idx, self.length) - 1]
        p = idx.copy()
        for e in self._excl:
            p += (p >= e)
        return spiral_values(p)

    def index_of(self, x: int) -> int | None:
        if x not in self.language:
            return None
        if self.length is not None:
            return self._members.index(x) + 1
        p = spiral_position(x)
        return p - sum(1 for e in self._excl if e < p)

    def geometric_mass(self, x):
        i = self.index_of(x)
        if i is None:
            return Fraction(0)
        if self.length is not None:
            return _finite_mass([i], self.length)
        return Fraction(1, 2 ** i)


def canonical_enumeration(lang: Language, t: int) -> list[int]:
    return CanonicalEnumeration(lang).prefix(t)


class ListEnumeration(Enumeration):
    """An explicit finite sequence, repeating its final element forever."""

    def __init__(self, seq: Sequence[int], language: Language | None = None):
        if not seq:
            raise ValueError("empty enumeration")
        self.seq = [int(x) for x in seq]
        self.length = len(self.seq)
        self.language = language if language is not None else Finite(frozenset(self.seq))

    def at(self, i):
        return self.seq[min(i, self.length) - 1]

    def at_many(self, idx):
        table = np.asarray(self.seq, dtype=np.int64)
        return table[np.minimum(np.asarray(idx, dtype=np.int64), self.length) - 1]

    def geometric_mass(self, x):
        pos = [i for i, v in enumerate(self.seq, start=1) if v == x]
        return _finite_mass(pos, self.length)


class BlockShuffledEnumeration(Enumeration):
    """The canonical enumeration with positions permuted inside fixed-size blocks.

    Every member still appears exactly once; the shuffle is a seeded,
    per-block permutation, so ``at`` is random-access.
    """

    def __init__(self, language: Language, seed: int, block: int = 16):
        self.language = language
        self.base = CanonicalEnumeration(language)
        self.seed = seed
        self.block = block
        self.length = self.base.length
        if self.length is not None:
            self.block = self.length
        self._perms: dict[int, np.ndarray] = {}

    def _perm(self, b):
        perm = self._perms.get(b)
        if perm is None:
            perm = make_rng(self.seed, b).permutation(self.block)
            self._perms[b] = perm
        return perm

    def _canonical_index(self, i):
        if self.length is not None:
            i = min(i, self.length)
        b, r = divmod(i - 1, self.block)
        return b * self.block + int(self._perm(b)[r]) + 1

    def at(self, i):
        return self.base.at(self._canonical_index(i))

    def geometric_mass(self, x):
        c = self.base.index_of(x)
        if c is None:
            return Fraction(0)
        b, r = divmod(c - 1, self.block)
        i = b * self.block + int(np.nonzero(self._perm(b) == r)[0][0]) + 1
        if self.length is not None:
            return _finite_mass([i], self.length)
        return Fraction(1, 2 ** i)


# -- randomness and distributions -----------------------------------------

def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, *stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


class ValidDistribution:
    """A distribution whose support is exactly ``language``."""

    language: Language

    def sample(self, rng: np.random.Generator, t: int) -> np.ndarray:
        raise NotImplementedError

    def mass(self, x: int) -> Fraction:
        raise NotImplementedError


@dataclass
class EnumerationGeometric(ValidDistribution):
    """Mass of x is the sum of ``2**-i`` over positions i where the enumeration shows x."""

    enumeration: Enumeration
    language: Language = field(init=False)

    def __post_init__(self):
        self.language = self.enumeration.language

    def sample(self, rng, t):
        idx = rng.geometric(0.5, size=t).astype(np.int64)
        if self.enumeration.length is not None:
            np.minimum(idx, self.enumeration.length, out=idx)
        return self.enumeration.at_many(idx)

    def mass(self, x):
        return self.enumeration.geometric_mass(x)


@dataclass
class HalfMassPoint(ValidDistribution):
    """Mass 1/2 on ``x0``; the rest geometric over the canonical enumeration of the remainder."""

    x0: int
    language: Language

    def __post_init__(self):
        if self.x0 not in self.language:
            raise ValueError(f"{self.x0} is not in {self.language!r}")
        rest = remove_element(self.language, self.x0)
        self.residual = None if rest is None else EnumerationGeometric(CanonicalEnumeration(rest))

    def sample(self, rng, t):
        heads = rng.random(t) < 0.5
        if self.residual is None:
            return np.full(t, self.x0, dtype=np.int64)
        tail = self.residual.sample(rng, t)
        return np.where(heads, np.int64(self.x0), tail)

    def mass(self, x):
        if self.residual is None:
            return Fraction(int(x == self.x0))
        if x == self.x0:
            return Fraction(1, 2)
        return self.residual.mass(x) / 2


def sample(dist: ValidDistribution, rng: np.random.Generator, t: int) -> list[int]:
    return [int(x) for x in dist.sample(rng, t)]
