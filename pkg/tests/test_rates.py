import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from listident import (BoostedIdentifier, CanonicalEnumeration, Cofinite,
                       EnumerationGeometric, ListIdentifier, RateExperiment, boosted_identify,
                       fit_exponential, lower_bound_experiment, run_rate_experiment)
from listident.errors import InsufficientPositivePoints, NonTrivialityUnwitnessed
from listident.rates import (ErrorCurve, batch_plan, boosting_experiment, clopper_pearson,
                             hoeffding_bound, positive_window, run_rate_experiment_resampled)


@given(st.integers(1, 400), st.data())
@settings(max_examples=60)
def test_clopper_pearson_matches_binomtest(n, data):
    x = data.draw(st.integers(0, n))
    lo, hi = clopper_pearson(np.array([x]), np.array([n]))
    ci = stats.binomtest(x, n).proportion_ci(0.95, method="exact")
    assert lo[0] == pytest.approx(ci.low, abs=1e-9)
    assert hi[0] == pytest.approx(ci.high, abs=1e-9)


def test_fit_on_exact_curve():
    t = np.arange(1, 11)
    n = 2 ** 20
    curve = ErrorCurve(t, n // 2 ** t, n)
    fit = fit_exponential(curve, (1, 10))
    assert fit.slope == pytest.approx(-math.log(2), abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant_curve():
    curve = ErrorCurve(np.arange(1, 8), 50, 100)
    fit = fit_exponential(curve)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_needs_positive_points():
    curve = ErrorCurve(np.arange(1, 8), [5, 1, 0, 0, 0, 0, 0], 100)
    with pytest.raises(InsufficientPositivePoints):
        fit_exponential(curve)
    assert positive_window(curve) == (1, 2)
    assert positive_window(ErrorCurve([1, 2], [0, 0], 10)) is None


def test_fit_clamps_zeros():
    curve = ErrorCurve(np.arange(1, 6), [40, 20, 0, 5, 2], 100)
    assert fit_exponential(curve).clamped == (3,)


def _exp(c1, target, trials, threads=1, horizon=12, seed=0):
    dist = EnumerationGeometric(CanonicalEnumeration(c1.language(target)))
    return RateExperiment(c1, 2, target, dist, lambda: ListIdentifier(c1, 2), horizon, trials,
                          seed, threads)


def test_full_language_never_fails(c1):
    curve = run_rate_experiment(_exp(c1, 1, 200))
    assert curve.failures.sum() == 0


def test_single_trial_ci(c1):
    curve = run_rate_experiment(_exp(c1, c1.index_of({-1}), 1))
    assert set(curve.e_hat.tolist()) <= {0.0, 1.0}
    assert np.all(curve.ci_lo <= curve.e_hat) and np.all(curve.e_hat <= curve.ci_hi)


def test_threads_do_not_change_results(c1):
    z = c1.index_of({-1})
    a = run_rate_experiment(_exp(c1, z, 300, threads=1))
    b = run_rate_experiment(_exp(c1, z, 300, threads=3))
    assert a.to_csv() == b.to_csv()


def test_resampled_estimate_is_close(c1):
    z = c1.index_of({-1})
    a = run_rate_experiment(_exp(c1, z, 3000, horizon=6))
    b = run_rate_experiment_resampled(_exp(c1, z, 3000, horizon=6, seed=1), [2, 4, 6])
    for n, t in enumerate([2, 4, 6]):
        # both are estimates of the same probability
        assert b.ci_lo[n] <= a.ci_hi[a.at(t)] and a.ci_lo[a.at(t)] <= b.ci_hi[n]


def test_csv_layout(c1):
    text = run_rate_experiment(_exp(c1, 1, 3, horizon=2)).to_csv()
    assert text.splitlines()[0] == "t,failures,trials,e_hat,ci_lo,ci_hi"
    assert len(text.splitlines()) == 3


def test_pigeonhole_on_constant_input(c2):
    rep = lower_bound_experiment(c2, 2, 5, [1, 2, 4], lambda: ListIdentifier(c2, 2), 20, 200,
                                 mc_horizon=3)
    assert all(n <= 2 for n in rep.pigeonhole)
    assert len(rep.missed) == 20
    assert all(not c2.identifies(z, ListIdentifier(c2, 2).run([5] * t))
               for t, z in enumerate(rep.missed, start=1))


def test_first_step_miss_is_likely(c2):
    rep = lower_bound_experiment(c2, 2, 5, [1, 2, 4], lambda: ListIdentifier(c2, 2), 1, 4000,
                                 simulate="all")
    assert max(float(c.e_hat[0]) for c in rep.curves.values()) >= 0.5 - 0.03


def test_lower_bound_preconditions(c2):
    with pytest.raises(NonTrivialityUnwitnessed):
        lower_bound_experiment(c2, 2, 0, [1, 2, 4], lambda: ListIdentifier(c2, 2), 3, 10)
    with pytest.raises(NonTrivialityUnwitnessed):
        lower_bound_experiment(c2, 2, 5, [1, 2], lambda: ListIdentifier(c2, 2), 3, 10)


def test_batch_plan():
    assert batch_plan(300) == (6, 50)
    assert batch_plan(1) == (1, 1)
    for t in range(1, 500):
        size, m = batch_plan(t)
        assert size * m <= t


def test_hoeffding_bound():
    assert hoeffding_bound(50, 0.8, 2) == pytest.approx(math.exp(-50 * (2 * (0.8 - 2 / 3)) ** 2 / 8))
    assert hoeffding_bound(50, 0.8, 2) == pytest.approx(0.6412, abs=1e-4)


def test_boosting_with_perfect_base(c1):
    B = BoostedIdentifier(lambda s: [1, 2], c1, 2)
    assert 2 in boosted_identify(B, list(range(40)))


def test_single_batch_equals_base(c1):
    B = BoostedIdentifier(lambda s: [2, 1], c1, 2)
    assert set(boosted_identify(B, [0])) == {1, 2}


def test_boosting_experiment_runs(c1):
    B = BoostedIdentifier(lambda s: [1, 2] if s[0] != 0 else [3, 4], c1, 2)
    dist = EnumerationGeometric(CanonicalEnumeration(Cofinite()))
    cmp_ = boosting_experiment(B, 1, dist, [20, 60], 200, seed=2)
    assert np.all(cmp_.boosted.failures <= cmp_.base.failures)
