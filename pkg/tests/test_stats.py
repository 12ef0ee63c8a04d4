import json
import math

import numpy as np
import pytest

from switchsim.core import TrafficSpec, uniform_traffic
from switchsim.errors import (
    InsufficientBatches,
    NegativeArgument,
    NonPositiveData,
    TooFewIntervals,
)
from switchsim.policies import AdaptivePolicy, FixedFramePolicy, HysteresisFn, MaxWeightPolicy
from switchsim.simulate import SimConfig, run
from switchsim.stats import (
    IdentityReport,
    batch_means,
    check_duration_weight_relation,
    check_renewal_probability,
    check_unused_drift,
    check_weight_floor,
    fit_loglog_exponent,
    mean_se_ci,
    run_identity_suite,
    weight_lower_bound,
)


class TestBatchMeans:
    def test_partition_covers_everything(self):
        vals = np.arange(100.0)
        bm = batch_means(vals, 30)
        assert bm.size == 30
        assert bm.mean() == pytest.approx(vals.mean(), abs=0.5)

    def test_short_series_collapses(self):
        assert batch_means([1.0, 2.0], 30).size == 2

    def test_ci_coverage_on_iid_stream(self):
        # 95% CI from 30 batch means must cover the truth in >= 90% of trials
        rng = np.random.default_rng(123)
        hits = 0
        for _ in range(200):
            xs = rng.normal(5.0, 2.0, size=3000)
            m, se, lo, hi = mean_se_ci(batch_means(xs, 30))
            hits += lo <= 5.0 <= hi
        assert hits >= 180

    def test_se_zero_for_constant_series(self):
        m, se, lo, hi = mean_se_ci(batch_means(np.full(900, 4.0), 30))
        assert m == 4.0 and se == 0.0 and lo == hi == 4.0


class TestFitLogLog:
    def test_exact_square_law(self):
        fit = fit_loglog_exponent([(x, x**2) for x in (1, 2, 4, 8)])
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-9)

    def test_exact_negative_power(self):
        fit = fit_loglog_exponent([(x, 5 * x**-1.25) for x in (0.01, 0.02, 0.04, 0.06)])
        assert fit.slope == pytest.approx(-1.25, abs=1e-10)
        assert math.exp(fit.intercept) == pytest.approx(5.0, rel=1e-9)

    def test_noisy_power_law(self):
        rng = np.random.default_rng(9)
        xs = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
        ys = xs**-1.111 * (1 + rng.uniform(-0.01, 0.01, xs.size))
        fit = fit_loglog_exponent(list(zip(xs, ys)))
        assert fit.slope == pytest.approx(-1.111, abs=0.05)

    def test_rejects_bad_input(self):
        with pytest.raises(NonPositiveData):
            fit_loglog_exponent([(1, 1), (2, 4)])
        with pytest.raises(NonPositiveData):
            fit_loglog_exponent([(1, 1), (2, -4), (3, 9)])
        with pytest.raises(NonPositiveData):
            fit_loglog_exponent([(0.0, 1), (2, 4), (3, 9)])

    def test_extra_tuple_entries_ignored(self):
        fit = fit_loglog_exponent([(x, x**2, 0.1, 0.2) for x in (1, 2, 4)])
        assert fit.slope == pytest.approx(2.0, abs=1e-12)


class TestWeightLowerBound:
    def test_reference_arithmetic(self):
        # gamma 0.1, delta 0.2, n 4, alpha 1, eps 0.04, delay 20:
        # argument = 3 * 0.96 * 20 / 0.04 = 1440, bound = (1440/0.9)^1.25
        g = HysteresisFn(0.1, 0.2)
        bound = weight_lower_bound(0.04, 4, 1.0, 20, g, 0.0)
        assert bound == pytest.approx(1600.0**1.25)
        assert bound == pytest.approx(10119.2885, abs=0.01)

    def test_vacuous_branch(self):
        g = HysteresisFn(0.1, 0.2)
        with pytest.raises(NegativeArgument):
            weight_lower_bound(0.5, 4, 1.0, 0, g, 5.0)

    def test_doubling_delay_scaling(self):
        g = HysteresisFn(0.1, 0.2)
        b1 = weight_lower_bound(0.04, 4, 1.0, 20, g, 0.0)
        b2 = weight_lower_bound(0.04, 4, 1.0, 40, g, 0.0)
        assert b2 / b1 == pytest.approx(2 ** (1 / 0.8), rel=1e-12)


@pytest.fixture(scope="module")
def frame_stats():
    cfg = SimConfig(n=2, traffic=uniform_traffic(2, 0.3), delta_r=20,
                    policy=FixedFramePolicy(25), horizon=60_000, warmup=5_000, seed=3)
    return run(cfg)


@pytest.fixture(scope="module")
def adaptive_stats():
    cfg = SimConfig(n=3, traffic=uniform_traffic(3, 0.1), delta_r=10,
                    policy=AdaptivePolicy(0.1, 0.2), horizon=800_000, warmup=200_000, seed=5)
    return run(cfg)


class TestChecksOnRuns:
    def test_renewal_exact_for_fixed_frame(self, frame_stats):
        rep = check_renewal_probability(frame_stats)
        assert rep.passed
        assert rep.detail["relative_error"] < 1e-12

    def test_unused_drift_zero_delay(self):
        # no reconfiguration cost: E[sum u] must equal n * eps
        cfg = SimConfig(n=4, traffic=uniform_traffic(4, 0.1), delta_r=0,
                        policy=MaxWeightPolicy(), horizon=400_000, warmup=50_000, seed=2)
        stats = run(cfg)
        assert stats.p_reconfig == 0.0
        rep = check_unused_drift(stats)
        assert rep.passed
        assert rep.lhs == pytest.approx(4 * 0.1, abs=0.02)

    def test_unused_drift_with_delay(self, adaptive_stats):
        rep = check_unused_drift(adaptive_stats)
        assert rep.passed

    def test_renewal_with_delay(self, adaptive_stats):
        rep = check_renewal_probability(adaptive_stats)
        assert rep.passed

    def test_duration_weight_relation(self, adaptive_stats):
        rep = check_duration_weight_relation(adaptive_stats)
        assert rep.status == "ok"
        assert rep.passed

    def test_weight_floor(self, adaptive_stats):
        rep = check_weight_floor(adaptive_stats)
        assert rep.status == "ok"
        assert rep.passed

    def test_identity_suite_on_frame_policy(self, frame_stats):
        # no threshold values exist for fixed frames: the duration-weight
        # and floor checks must report not-applicable instead of raising
        reports = run_identity_suite(frame_stats)
        by_name = {r.name: r for r in reports}
        assert by_name["duration_weight"].status == "not_applicable"
        assert by_name["weight_floor"].status == "not_applicable"
        assert by_name["renewal_probability"].passed

    def test_duration_weight_not_applicable_for_single_schedule(self):
        cfg = SimConfig(n=3, traffic=TrafficSpec(np.eye(3), 0.3), delta_r=10,
                        policy=AdaptivePolicy(0.1, 0.2), horizon=50_000, warmup=5_000, seed=17)
        stats = run(cfg)
        rep = check_duration_weight_relation(stats)
        assert rep.status == "not_applicable"

    def test_too_few_intervals(self):
        cfg = SimConfig(n=2, traffic=uniform_traffic(2, 0.3), delta_r=20,
                        policy=FixedFramePolicy(25), horizon=1_500, warmup=100, seed=3)
        stats = run(cfg)
        with pytest.raises(TooFewIntervals):
            check_renewal_probability(stats)

    def test_insufficient_batches(self, adaptive_stats):
        import dataclasses
        crippled = dataclasses.replace(adaptive_stats, batch_series={"unused": [1.0, 2.0]},
                                       slot_totals=None, instants=None)
        with pytest.raises(InsufficientBatches):
            check_unused_drift(crippled)

    def test_identity_suite_serializes(self, adaptive_stats):
        reports = run_identity_suite(adaptive_stats)
        names = [r.name for r in reports]
        assert names == ["unused_drift", "renewal_probability", "duration_weight", "weight_floor"]
        payload = json.dumps([r.to_dict() for r in reports])
        parsed = json.loads(payload)
        assert {"name", "lhs", "rhs", "se", "pass", "status", "detail"} <= parsed[0].keys()


class TestReportShape:
    def test_report_dict_fields(self):
        rep = IdentityReport(name="x", lhs=1.0, rhs=2.0, se=0.1, passed=False)
        d = rep.to_dict()
        assert d["pass"] is False and d["name"] == "x"
