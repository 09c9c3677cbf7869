"""Adversarial enumeration against a deterministic list identifier.

The adversary keeps a chain of strictly nested languages whose predicate
fails at decreasing levels. It enumerates the deepest language until the
identifier names it, then either descends to a fresh proper subset (if every
chain language is named) or jumps back to the shallowest language that is
missed. Each jump-back is a time step at which the identifier fails; so is
every step of an enumeration loop that never gets its language named.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .angluin import find_unfoolable_root, psi_canonical, psi_oracle
from .errors import InvariantViolation, NoDescendant
from .identify import Identifier
from .langs import (CanonicalCollection, Collection, Cofinite, SeenSet, as_seen,
                    proper_subset, spiral_sorted)

__all__ = ["find_unfoolable_root", "find_descendant", "adv_enum", "AdversaryRun",
           "limit_language", "LimitReport"]


def find_descendant(coll: Collection, parent: int, S, level: int, psi=None) -> int:
    """Least index i with L_i a proper subset of L_parent, S inside L_i, and not Psi(L_i, level)."""
    if isinstance(coll, CanonicalCollection):
        excl = coll.exclusion(parent)
        if coll.k_max is not None and len(excl) + 1 > coll.k_max:
            raise NoDescendant(f"{coll.language(parent)!r} has no proper subset in {coll!r}")
        if coll.k_max is not None and len(excl) + 1 >= coll.k_max - level + 1:
            raise NoDescendant(f"every proper subset of {coll.language(parent)!r} satisfies the "
                               f"level-{level} predicate")
        x = as_seen(S).first_absent(1, skip=excl)[0]
        return coll.index_of(excl | {x})
    psi = psi or psi_oracle(coll)
    S_set = S.elements if isinstance(S, SeenSet) else set(S)
    top = coll.language(parent)
    for i in coll.indices():
        lang = coll.language(i)
        if proper_subset(lang, top) and lang.contains_all(S_set) and not psi.holds(i, level):
            return i
    raise NoDescendant(f"no descendant of index {parent} at level {level}")


@dataclass
class AdversaryRun:
    """Record of one simulated game.

    ``witnesses`` holds ``(t, level, kind)`` triples; kind is ``jump`` for a
    jump-back, ``starve`` for a step of an enumeration loop that never broke,
    and ``terminal`` for a miss after the adversary ran out of moves.
    ``status`` is ``budget``, ``starving`` or ``terminated``.
    """

    k: int
    budget: int
    emitted: list[int] = field(default_factory=list)
    chains: list[tuple[int, ...]] = field(default_factory=list)
    invoked_at: list[int] = field(default_factory=list)
    witnesses: list[tuple[int, int, str]] = field(default_factory=list)
    status: str = "budget"
    invariant_checks: int = 0

    @property
    def witness_count(self) -> int:
        return len(self.witnesses)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "budget": self.budget,
            "status": self.status,
            "emitted": self.emitted,
            "chains": [list(c) for c in self.chains],
            "invoked_at": self.invoked_at,
            "witnesses": [list(w) for w in self.witnesses],
            "witness_count": self.witness_count,
            "invariant_checks": self.invariant_checks,
        }


def _next_element(lang, seen: SeenSet) -> int:
    if isinstance(lang, Cofinite):
        return seen.first_absent(1, skip=lang.excluded)[0]
    order = spiral_sorted(lang.members)
    for x in order:
        if x not in seen:
            return x
    return order[-1]


def _check_invariants(coll, k, chain, seen: SeenSet, psi_holds, run: AdversaryRun):
    run.invariant_checks += 1
    langs = [coll.language(i) for i in chain]
    problems = []
    if len(chain) > k + 1:
        problems.append(f"chain length {len(chain)} exceeds k+1={k + 1}")
    for a, b in zip(langs, langs[1:]):
        if not proper_subset(b, a):
            problems.append(f"{b!r} is not a proper subset of {a!r}")
    for j, i in enumerate(chain, start=1):
        if psi_holds(i, k - (j - 1)):
            problems.append(f"predicate holds at chain level {j} (index {i})")
    for lang in langs:
        if isinstance(lang, Cofinite):
            bad = [x for x in lang.excluded if x in seen]
        else:
            bad = [x for x in seen.elements if x not in lang]
        if bad:
            problems.append(f"emitted {bad[:5]} outside {lang!r}")
    if problems:
        raise InvariantViolation(f"at t={len(run.emitted)} chain={chain}: " + "; ".join(problems))


def adv_enum(coll: Collection, k: int, identifier: Identifier, budget: int,
             root: int | None = None, psi=None) -> AdversaryRun:
    """Play the adversary for ``budget`` emitted elements.

    The chain is built against level ``k``. The identifier may output more
    than k guesses; once the chain has k+1 languages all named, there is no
    legal move left and the adversary keeps enumerating its deepest language,
    logging every miss.
    """
    if isinstance(coll, CanonicalCollection):
        psi_holds = lambda i, lv: psi_canonical(coll.k_max, coll.exclusion(i), lv)  # noqa: E731
    else:
        oracle = psi or psi_oracle(coll)
        psi_holds = oracle.holds
    if root is None:
        root = find_unfoolable_root(coll, k, psi)
    run = AdversaryRun(k=k, budget=budget)
    identifier.reset()
    seen = SeenSet()
    chain = [root]
    terminal = False
    t = 0

    def emit(lang):
        nonlocal t
        x = _next_element(lang, seen)
        seen.add(x)
        run.emitted.append(x)
        t += 1
        return identifier.push(x)

    while t < budget:
        _check_invariants(coll, k, chain, seen, psi_holds, run)
        run.chains.append(tuple(chain))
        run.invoked_at.append(t)
        deepest = chain[-1]
        lang = coll.language(deepest)
        if terminal:
            while t < budget:
                if not coll.identifies(deepest, emit(lang)):
                    run.witnesses.append((t, len(chain), "terminal"))
            break
        pending = []
        broke = False
        while t < budget:
            guesses = emit(lang)
            if coll.identifies(deepest, guesses):
                broke = True
                break
            pending.append(t)
        if not broke:
            run.witnesses.extend((s, len(chain), "starve") for s in pending)
            run.status = "starving"
            break
        missed = [j for j, i in enumerate(chain, start=1) if not coll.identifies(i, guesses)]
        if missed:
            j = missed[0]
            run.witnesses.append((t, j, "jump"))
            chain = chain[:j]
            continue
        if k - len(chain) < 0:
            terminal = True
            run.status = "terminated"
            continue
        try:
            chain.append(find_descendant(coll, deepest, seen, k - len(chain), psi))
        except NoDescendant as exc:
            raise InvariantViolation(f"descendant search failed at t={t}: {exc}") from exc
    return run


@dataclass(frozen=True)
class LimitReport:
    level: int
    index: int
    window_start: int
    settled_at: int


def limit_language(run: AdversaryRun) -> LimitReport:
    """Empirical liminf of the chain length over the second half of the invocations."""
    lengths = [len(c) for c in run.chains]
    if not lengths:
        raise ValueError("run has no invocations")
    start = len(lengths) // 2
    level = min(lengths[start:])
    settle = 0
    for n, ln in enumerate(lengths):
        if ln < level:
            settle = n + 1
    return LimitReport(level, run.chains[-1][level - 1], run.invoked_at[start],
                       run.invoked_at[min(settle, len(lengths) - 1)])
