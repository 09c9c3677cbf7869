"""Probabilistic list identifiers, computation trees and top-k derandomization.

A probabilistic identifier sees the input prefix x_1..x_t together with
random bits r_1..r_t. Its computation tree numbers nodes breadth-first from
the root (node 1); the node reached by bits r_1..r_{i-1} sits at level i and
is labelled with the identifier's output on x_1..x_{i-1}, r_1..r_{i-1}.
Every probability below is an exact fraction with a power-of-two denominator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DepthTooLarge, InsufficientStream
from .identify import Identifier, topk_multiset
from .langs import Collection, EnumerationGeometric, Enumeration, ValidDistribution

MAX_DEPTH = 20


def node_level(n: int) -> int:
    return n.bit_length()


def node_bits(n: int) -> tuple[int, ...]:
    """Bits on the path from the root to node n, root edge first."""
    return tuple(int(c) for c in bin(n)[3:])


def deterministic(ident) -> Callable[[tuple], tuple]:
    """Memoized ``prefix -> guesses`` view of an identifier or plain function."""
    cache: dict[tuple, tuple] = {}

    if isinstance(ident, Identifier):
        def call(xs):
            return ident.run(xs)
    else:
        call = ident

    def fn(xs: tuple) -> tuple:
        out = cache.get(xs)
        if out is None:
            out = tuple(call(xs))
            cache[xs] = out
        return out

    return fn


class ProbabilisticIdentifier:
    """Maps (input prefix, bit prefix of the same length) to a guess list."""

    k: int

    def label(self, xs: tuple, bits: tuple) -> tuple[int, ...]:
        raise NotImplementedError


class Derandomizable(ProbabilisticIdentifier):
    """A deterministic identifier that ignores its bits."""

    def __init__(self, det, k: int):
        self.det = deterministic(det)
        self.k = k

    def label(self, xs, bits):
        return self.det(tuple(xs))


class DecoySplitter(ProbabilisticIdentifier):
    """Outputs k of k+1 decoys, leaving out the one chosen by the bit prefix."""

    def __init__(self, decoys: Sequence[int], k: int):
        if len(decoys) != k + 1:
            raise ValueError("the splitter needs exactly k+1 decoys")
        self.decoys = tuple(decoys)
        self.k = k

    def label(self, xs, bits):
        v = 0
        for b in bits:
            v = 2 * v + b
        drop = v % (self.k + 1)
        return tuple(d for n, d in enumerate(self.decoys) if n != drop)


class CoinMixture(ProbabilisticIdentifier):
    """Good identifier with probability p, decoy splitter otherwise.

    ``p`` must be dyadic, ``a / 2**r``. The first r bits, read as a binary
    number v, pick the branch: good iff ``v < a``. Until r bits exist the
    branch is undecided and the good identifier answers.
    """

    def __init__(self, p, good, decoys: Sequence[int], k: int):
        self.p = Fraction(p)
        den = self.p.denominator
        if den & (den - 1) or not 0 <= self.p <= 1:
            raise ValueError(f"p={self.p} is not a dyadic probability")
        self.resolution = den.bit_length() - 1
        self.good = deterministic(good)
        self.bad = DecoySplitter(decoys, k)
        self.k = k

    def is_good(self, bits) -> bool:
        r = self.resolution
        if len(bits) < r:
            return True
        v = 0
        for b in bits[:r]:
            v = 2 * v + b
        return v < self.p.numerator

    def label(self, xs, bits):
        if self.is_good(bits):
            return self.good(tuple(xs))
        return self.bad.label(xs, bits[self.resolution:])


# -- computation trees ----------------------------------------------------

@dataclass
class ComputationTree:
    """Labels of every node down to ``depth``; ``labels[0]`` is unused."""

    depth: int
    prefix: tuple
    labels: list
    _ident: dict = field(default_factory=dict, repr=False)
    _counts: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return (1 << self.depth) - 1

    def nodes_at(self, level: int) -> range:
        return range(1 << (level - 1), 1 << level)

    def identifying(self, coll: Collection, z: int) -> np.ndarray:
        """0/1 flag per node: does its label name L_z."""
        key = (id(coll), z)
        flags = self._ident.get(key)
        if flags is None:
            flags = np.zeros(1 << self.depth, dtype=np.uint8)
            memo: dict[tuple, bool] = {}
            for n in range(1, 1 << self.depth):
                lab = self.labels[n]
                hit = memo.get(lab)
                if hit is None:
                    hit = memo[lab] = coll.identifies(z, lab)
                flags[n] = hit
            self._ident[key] = flags
        return flags

    def counts(self, coll: Collection, z: int, d: int) -> np.ndarray:
        key = (id(coll), z, d)
        cnt = self._counts.get(key)
        if cnt is None:
            flags = self.identifying(coll, z)[: 1 << d]
            cnt = kernels.run_counts(flags, d)
            self._counts[key] = cnt
        return cnt


def _check_depth(d):
    if d > MAX_DEPTH:
        raise DepthTooLarge(f"depth {d} exceeds {MAX_DEPTH}")
    if d < 1:
        raise ValueError("depth must be positive")


def level_labels(A: ProbabilisticIdentifier, prefix: Sequence[int], level: int) -> list:
    """Labels of the 2**(level-1) nodes at ``level``, left to right."""
    xs = tuple(prefix[: level - 1])
    out = []
    for n in range(1 << (level - 1), 1 << level):
        out.append(tuple(A.label(xs, node_bits(n))))
    return out


def build_tree(A: ProbabilisticIdentifier, sigma_prefix: Sequence[int], depth: int) -> ComputationTree:
    _check_depth(depth)
    if len(sigma_prefix) < depth - 1:
        raise ValueError(f"need at least {depth - 1} input elements, got {len(sigma_prefix)}")
    labels: list = [None]
    for level in range(1, depth + 1):
        labels.extend(level_labels(A, sigma_prefix, level))
    return ComputationTree(depth, tuple(sigma_prefix[: depth - 1]), labels)


def level_fraction_identifying(tree: ComputationTree, coll: Collection, z: int, level: int) -> Fraction:
    flags = tree.identifying(coll, z)
    hits = int(flags[1 << (level - 1): 1 << level].sum())
    return Fraction(hits, 1 << (level - 1))


def prob_converged_at_node(tree: ComputationTree, coll: Collection, z: int, n: int, d: int) -> Fraction:
    """Probability that the random path enters n fresh and keeps naming L_z through level d.

    Fresh means n is at level 2 or its parent's label misses L_z.
    """
    lv = node_level(n)
    if lv < 2 or d < lv or d > tree.depth:
        raise ValueError(f"need 2 <= level(n)={lv} <= d={d} <= depth={tree.depth}")
    flags = tree.identifying(coll, z)
    if lv > 2 and flags[n // 2]:
        return Fraction(0)
    return Fraction(int(tree.counts(coll, z, d)[n]), 1 << (d - 1))


def convergence_numerators(tree: ComputationTree, coll: Collection, z: int, d: int) -> np.ndarray:
    """Numerators (over 2**(d-1)) of the node probabilities for all nodes at levels 2..d."""
    flags = tree.identifying(coll, z)
    cnt = tree.counts(coll, z, d).copy()
    nodes = np.arange(1 << d)
    fresh = (nodes < 4) | (flags[nodes // 2] == 0)
    cnt[~fresh] = 0
    cnt[:2] = 0
    return cnt


@dataclass
class DerandOutcome:
    guesses: list[int]
    counts: dict[int, int]
    nodes: int


def derandomize_detailed(A: ProbabilisticIdentifier, coll: Collection, k: int,
                         x_prefix: Sequence[int], t: int) -> DerandOutcome:
    _check_depth(t + 1)
    items = []
    for lab in level_labels(A, x_prefix, t + 1):
        items.extend(dict.fromkeys(coll.first_index(i) for i in lab))
    counts: dict[int, int] = {}
    for i in items:
        counts[i] = counts.get(i, 0) + 1
    return DerandOutcome(topk_multiset(items, k), counts, 1 << t)


def derandomize(A: ProbabilisticIdentifier, coll: Collection, k: int,
                x_prefix: Sequence[int], t: int) -> list[int]:
    """Top-k vote over the level-(t+1) labels, indices collapsed to first occurrences."""
    return derandomize_detailed(A, coll, k, x_prefix, t).guesses


class DerandomizedIdentifier(Identifier):
    def __init__(self, A: ProbabilisticIdentifier, coll: Collection, k: int):
        self.A, self.coll, self.k = A, coll, k
        self.reset()

    def reset(self):
        self.prefix: list[int] = []

    def push(self, x):
        self.prefix.append(int(x))
        return derandomize(self.A, self.coll, self.k, self.prefix, len(self.prefix))


# -- bits from samples, samples from enumerations -------------------------

@dataclass
class Extraction:
    bits: list[int]
    consumed: int
    anchor: tuple[int | None, int | None]
    complete: bool


def extract_bits(stream: Sequence[int], n_bits: int, strict: bool = False) -> Extraction:
    """Unbiased bits from an i.i.d. stream.

    a is the first element and b the first element different from a. Then
    disjoint pairs of the even-position substream are read in order: (a, b)
    gives 1, (b, a) gives 0, anything else is skipped.
    """
    bits, consumed, a, b = kernels.extract_pair_bits(np.asarray(stream, dtype=np.int64), n_bits)
    res = Extraction(list(bits), int(consumed), (a, b), len(bits) >= n_bits)
    if strict and not res.complete:
        raise InsufficientStream(f"extracted {len(bits)} of {n_bits} bits")
    return res


def sample_bits(dist: ValidDistribution, rng: np.random.Generator, n_bits: int,
                max_samples: int = 10 ** 8) -> Extraction:
    """Draw from ``dist`` until ``n_bits`` bits can be extracted."""
    chunk = max(64, 16 * n_bits)
    stream = dist.sample(rng, chunk)
    while True:
        res = extract_bits(stream, n_bits)
        if res.complete:
            return res
        if len(stream) >= max_samples:
            raise InsufficientStream(f"only {len(res.bits)} bits from {len(stream)} samples")
        stream = np.concatenate([stream, dist.sample(rng, len(stream))])


class ExtractingIdentifier(Identifier):
    """Runs a probabilistic identifier on a single i.i.d. stream.

    Odd stream positions are the identifier's input; even positions feed the
    bit extractor. The identifier is queried on as many inputs as there are
    bits available.
    """

    def __init__(self, A: ProbabilisticIdentifier):
        self.A = A
        self.reset()

    def reset(self):
        self.stream: list[int] = []

    def push(self, x):
        self.stream.append(int(x))
        inputs = self.stream[0::2]
        bits = extract_bits(self.stream, len(inputs)).bits
        m = min(len(inputs), len(bits))
        return list(self.A.label(tuple(inputs[:m]), tuple(bits[:m])))


def reduce_enumeration_to_distribution(sigma: Enumeration) -> EnumerationGeometric:
    """The distribution putting mass 2**-i on the i-th enumerated element."""
    return EnumerationGeometric(sigma)
