"""Monte Carlo error curves, exponential fits, the lower-bound experiment and boosting.

Trial r of an experiment draws from its own counter-based stream
``(seed, r)``, so results do not depend on how trials are scheduled across
threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import InsufficientPositivePoints, InvariantViolation, NonTrivialityUnwitnessed
from .identify import Identifier, topk_multiset
from .langs import Collection, HalfMassPoint, ValidDistribution, make_rng

ALPHA = 0.05


def clopper_pearson(failures: np.ndarray, trials: np.ndarray, alpha: float = ALPHA):
    """Exact two-sided binomial confidence bounds, vectorized."""
    x = np.asarray(failures, dtype=float)
    n = np.asarray(trials, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        lo = np.where(x > 0, stats.beta.ppf(alpha / 2, x, n - x + 1), 0.0)
        hi = np.where(x < n, stats.beta.ppf(1 - alpha / 2, x + 1, n - x), 1.0)
    return lo, hi


@dataclass
class ErrorCurve:
    """Per-t failure counts; ``t`` runs over the recorded horizons."""

    t: np.ndarray
    failures: np.ndarray
    trials: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.int64)
        self.failures = np.broadcast_to(np.asarray(self.failures, dtype=np.int64),
                                        self.t.shape).copy()
        self.trials = np.broadcast_to(np.asarray(self.trials, dtype=np.int64), self.t.shape).copy()
        self.ci_lo, self.ci_hi = clopper_pearson(self.failures, self.trials)

    @property
    def e_hat(self) -> np.ndarray:
        return self.failures / self.trials

    def at(self, t: int) -> int:
        return int(np.nonzero(self.t == t)[0][0])

    def rows(self):
        for n in range(len(self.t)):
            yield (int(self.t[n]), int(self.failures[n]), int(self.trials[n]),
                   float(self.e_hat[n]), float(self.ci_lo[n]), float(self.ci_hi[n]))

    def to_csv(self) -> str:
        lines = ["t,failures,trials,e_hat,ci_lo,ci_hi"]
        for r in self.rows():
            lines.append(",".join([str(r[0]), str(r[1]), str(r[2])] + [repr(v) for v in r[3:]]))
        return "\n".join(lines) + "\n"


IdentifierFactory = Callable[[], Identifier]


@dataclass
class RateExperiment:
    collection: Collection
    k: int
    target: int
    distribution: ValidDistribution
    identifier: IdentifierFactory
    horizon: int
    trials: int
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")


def _trial_failures(exp: RateExperiment, r: int) -> np.ndarray:
    rng = make_rng(exp.seed, r)
    stream = exp.distribution.sample(rng, exp.horizon)
    ident = exp.identifier()
    ident.reset()
    out = np.zeros(exp.horizon, dtype=np.int64)
    coll, z = exp.collection, exp.target
    memo: dict[tuple, bool] = {}
    for n, x in enumerate(stream):
        guesses = tuple(ident.push(int(x)))
        hit = memo.get(guesses)
        if hit is None:
            hit = memo[guesses] = coll.identifies(z, guesses)
        out[n] = not hit
    return out


def _chunks(n: int, parts: int):
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts)]


def _parallel_sum(fn: Callable[[int], np.ndarray], n: int, threads: int, width: int) -> np.ndarray:
    def work(rs):
        acc = np.zeros(width, dtype=np.int64)
        for r in rs:
            acc += fn(r)
        return acc

    chunks = _chunks(n, threads)
    if len(chunks) == 1:
        return work(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(work, chunks))
    return np.sum(parts, axis=0)


def run_rate_experiment(exp: RateExperiment) -> ErrorCurve:
    """Failure frequency at every t in 1..horizon, one shared stream per trial."""
    fails = _parallel_sum(lambda r: _trial_failures(exp, r), exp.trials, exp.threads, exp.horizon)
    return ErrorCurve(np.arange(1, exp.horizon + 1), fails, exp.trials)


def run_rate_experiment_resampled(exp: RateExperiment, ts: Sequence[int]) -> ErrorCurve:
    """Same estimate with a fresh sample for every t (slower; checks the prefix shortcut)."""
    ts = list(ts)

    def one(r):
        out = np.zeros(len(ts), dtype=np.int64)
        for n, t in enumerate(ts):
            rng = make_rng(exp.seed, r, t)
            sample = exp.distribution.sample(rng, t)
            guesses = exp.identifier().run(int(x) for x in sample)
            out[n] = not exp.collection.identifies(exp.target, guesses)
        return out

    fails = _parallel_sum(one, exp.trials, exp.threads, len(ts))
    return ErrorCurve(ts, fails, exp.trials)


# -- exponential fit ------------------------------------------------------

@dataclass(frozen=True)
class ExponentialFit:
    slope: float
    intercept: float
    r_squared: float
    points: int
    clamped: tuple[int, ...] = ()


def positive_window(curve: ErrorCurve) -> tuple[int, int] | None:
    """First and last t with a positive failure frequency."""
    pos = np.nonzero(curve.failures > 0)[0]
    if len(pos) == 0:
        return None
    return int(curve.t[pos[0]]), int(curve.t[pos[-1]])


def fit_exponential(curve: ErrorCurve, window: tuple[int, int] | None = None) -> ExponentialFit:
    """Least-squares line through (t, log e_hat(t)) over ``window`` (inclusive).

    Zero frequencies inside the window are replaced by their CI upper bound
    and reported in ``clamped``. At least three positive points are needed.
    """
    if window is None:
        window = (int(curve.t.min()), int(curve.t.max()))
    mask = (curve.t >= window[0]) & (curve.t <= window[1])
    positive = int((curve.failures[mask] > 0).sum())
    if positive < 3:
        raise InsufficientPositivePoints(
            f"{positive} positive points in window {window}; need at least 3")
    t = curve.t[mask].astype(float)
    e = curve.e_hat[mask].astype(float)
    zero = e == 0
    e = np.where(zero, curve.ci_hi[mask], e)
    y = np.log(e)
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * t + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float((resid ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ExponentialFit(float(slope), float(intercept), r2, int(mask.sum()),
                          tuple(int(v) for v in curve.t[mask][zero]))


# -- lower bound ----------------------------------------------------------

@dataclass
class LowerBoundReport:
    shared_x: int
    languages: list[int]
    pigeonhole: list[int]              # per t: designated languages named on x, ..., x
    missed: list[int]                  # per t: least designated language missed
    curves: dict[int, ErrorCurve] = field(default_factory=dict)

    def floor_checks(self, t_max: int) -> list[tuple[int, int, float, bool]]:
        """(t, language, CI upper bound, bound >= 2**-t) for each t <= t_max."""
        out = []
        for t in range(1, t_max + 1):
            z = self.missed[t - 1]
            curve = self.curves[z]
            hi = float(curve.ci_hi[curve.at(t)])
            out.append((t, z, hi, hi >= 2.0 ** -t))
        return out

    def to_csv(self) -> str:
        lines = ["t,language,named_on_constant,failures,trials,e_hat,ci_lo,ci_hi,floor"]
        for t in range(1, len(self.missed) + 1):
            z = self.missed[t - 1]
            curve = self.curves.get(z)
            if curve is not None and t <= curve.t[-1]:
                _, f, n, e, lo, hi = next(r for r in curve.rows() if r[0] == t)
                stat = [str(f), str(n), repr(e), repr(lo), repr(hi)]
            else:
                stat = ["", "", "", "", ""]
            lines.append(",".join([str(t), str(z), str(self.pigeonhole[t - 1])] + stat
                                  + [repr(2.0 ** -t)]))
        return "\n".join(lines) + "\n"


def lower_bound_experiment(coll: Collection, k: int, shared_x: int, languages: Sequence[int],
                           identifier: IdentifierFactory, horizon: int, trials: int,
                           mc_horizon: int | None = None, seed: int = 0, threads: int = 1,
                           simulate: str = "missed") -> LowerBoundReport:
    """Pigeonhole on the constant input, then Monte Carlo under half-mass distributions.

    ``simulate`` is ``missed`` (only languages that the constant input ever
    leaves out) or ``all``.
    """
    languages = list(languages)
    firsts = {coll.first_index(i) for i in languages}
    if len(languages) != k + 1 or len(firsts) != k + 1:
        raise NonTrivialityUnwitnessed(f"need {k + 1} distinct languages, got {languages}")
    for i in languages:
        if shared_x not in coll.language(i):
            raise NonTrivialityUnwitnessed(f"{shared_x} is not in {coll.language(i)!r}")
    ident = identifier()
    ident.reset()
    named, missed = [], []
    for t in range(1, horizon + 1):
        guesses = ident.push(shared_x)
        hits = [coll.identifies(i, guesses) for i in languages]
        if sum(hits) > k:
            raise InvariantViolation(f"{sum(hits)} > {k} designated languages named at t={t}")
        named.append(sum(hits))
        missed.append(languages[hits.index(False)])
    report = LowerBoundReport(shared_x, languages, named, missed)
    mc_horizon = horizon if mc_horizon is None else mc_horizon
    todo = languages if simulate == "all" else sorted(set(missed[:mc_horizon]), key=languages.index)
    for z in todo:
        exp = RateExperiment(coll, k, z, HalfMassPoint(shared_x, coll.language(z)), identifier,
                             mc_horizon, trials, seed + languages.index(z), threads)
        report.curves[z] = run_rate_experiment(exp)
    return report


# -- boosting -------------------------------------------------------------

def batch_plan(t: int) -> tuple[int, int]:
    """(batch size, number of batches) for a sample of size t."""
    size = max(1, math.ceil(math.log(t)))
    return size, max(1, t // size)


@dataclass
class BoostedIdentifier:
    """Runs ``base`` on disjoint batches and keeps the k most voted languages."""

    base: Callable[[Sequence[int]], Sequence[int]]
    coll: Collection
    k: int

    def __call__(self, sample: Sequence[int]) -> list[int]:
        return boosted_identify(self, sample)


def boosted_identify(B: BoostedIdentifier, sample: Sequence[int]) -> list[int]:
    if len(sample) == 0:
        raise ValueError("boosting needs a non-empty sample")
    size, m = batch_plan(len(sample))
    votes = []
    for j in range(m):
        out = B.base(sample[j * size:(j + 1) * size])
        votes.extend(dict.fromkeys(B.coll.first_index(i) for i in out))
    return topk_multiset(votes, B.k)


def hoeffding_bound(m: int, p: float, k: int) -> float:
    """exp(-M eps^2 / 8) with eps = 2 (p - k/(k+1)), p the per-batch success probability."""
    eps = 2 * (p - k / (k + 1))
    return math.exp(-m * eps * eps / 8)


@dataclass
class BoostingComparison:
    base: ErrorCurve
    boosted: ErrorCurve


def boosting_experiment(B: BoostedIdentifier, target: int, dist: ValidDistribution,
                        ts: Sequence[int], trials: int, seed: int = 0,
                        threads: int = 1) -> BoostingComparison:
    """Failure of ``base`` on the whole sample vs. the boosted vote, same samples."""
    ts = list(ts)
    coll = B.coll

    def one(r):
        out = np.zeros(2 * len(ts), dtype=np.int64)
        for n, t in enumerate(ts):
            sample = [int(x) for x in dist.sample(make_rng(seed, r, t), t)]
            out[n] = not coll.identifies(target, B.base(sample))
            out[len(ts) + n] = not coll.identifies(target, boosted_identify(B, sample))
        return out

    fails = _parallel_sum(one, trials, threads, 2 * len(ts))
    return BoostingComparison(ErrorCurve(ts, fails[:len(ts)], trials),
                              ErrorCurve(ts, fails[len(ts):], trials))
