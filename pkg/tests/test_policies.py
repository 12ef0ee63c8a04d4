import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchsim.core import identity_schedule, permutation_schedule
from switchsim.errors import BadFrame
from switchsim.matching import max_weight_matching
from switchsim.policies import (
    HysteresisFn,
    adaptive_maxweight_decide,
    cyclic_rotation,
    fixed_frame_decide,
    maxweight_decide,
)


class TestHysteresisFn:
    def test_basic_shape(self):
        g = HysteresisFn(0.1, 0.2)
        assert g(0.0) == 0.0
        assert g(100.0) == pytest.approx(0.9 * 100**0.8)
        xs = np.array([1.0, 10.0, 100.0, 1e6])
        vals = g(xs)
        assert (np.diff(vals) > 0).all()          # increasing
        assert (vals / xs < 1.0).all()             # below identity on x >= 1
        assert g(1e12) / 1e12 < 1e-2               # sublinear tail

    @given(st.floats(1.0, 1e9), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_inverse_roundtrip(self, x, gamma, delta):
        g = HysteresisFn(gamma, delta)
        back = g.inverse(g(x))
        assert abs(back - x) <= 1e-9 * x

    @pytest.mark.parametrize("gamma,delta", [(0.0, 0.2), (1.0, 0.2), (0.1, 0.0), (0.1, 1.0)])
    def test_parameter_domain(self, gamma, delta):
        with pytest.raises(ValueError):
            HysteresisFn(gamma, delta)


class TestAdaptiveDecide:
    def test_keep_when_already_optimal(self):
        q = np.array([[9, 1], [1, 7]], dtype=np.int64)
        s = max_weight_matching(q).schedule
        dec = adaptive_maxweight_decide(q, s, HysteresisFn(0.1, 0.2))
        assert dec.action == "keep"
        assert dec.delta_w == 0

    def test_threshold_crossing(self):
        # W* = 100 and W = 60: gap 40 beats g(100) = 0.9 * 100^0.8 ~ 35.83
        g = HysteresisFn(0.1, 0.2)
        q = np.diag([60, 30, 10]).astype(np.int64)
        s = permutation_schedule([0, 2, 1])  # keeps only the 60 entry
        dec = adaptive_maxweight_decide(q, s, g)
        assert dec.w == 60 and dec.w_star == 100 and dec.delta_w == 40
        assert dec.threshold == pytest.approx(0.9 * 100**0.8)
        assert dec.action == "reconfigure"
        assert (dec.new_schedule == np.eye(3)).all()

    def test_keep_below_threshold(self):
        # W* = 100 and W = 70: gap 30 stays below g(100) ~ 35.83
        g = HysteresisFn(0.1, 0.2)
        q = np.diag([70, 20, 10]).astype(np.int64)
        s = permutation_schedule([0, 2, 1])  # keeps only the 70 entry
        dec = adaptive_maxweight_decide(q, s, g)
        assert dec.w == 70 and dec.w_star == 100 and dec.delta_w == 30
        assert dec.action == "keep"

    def test_decision_invariant(self):
        rng = np.random.default_rng(5)
        g = HysteresisFn(0.3, 0.4)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            q = rng.integers(0, 200, size=(n, n)).astype(np.int64)
            perm = rng.permutation(n)
            dec = adaptive_maxweight_decide(q, permutation_schedule(perm), g)
            assert (dec.action == "reconfigure") == (dec.delta_w > dec.threshold)


class TestMaxWeightDecide:
    def test_keep_at_optimum(self):
        q = np.array([[4, 0], [0, 9]], dtype=np.int64)
        dec = maxweight_decide(q, identity_schedule(2))
        assert dec.action == "keep"

    def test_any_gap_triggers(self):
        q = np.array([[1, 0], [0, 0]], dtype=np.int64)
        dec = maxweight_decide(q, permutation_schedule([1, 0]))
        assert dec.delta_w == 1
        assert dec.action == "reconfigure"

    @given(st.integers(2, 4), st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_equivalent_to_zero_threshold_adaptive(self, n, seed):
        rng = np.random.default_rng(seed)
        q = rng.integers(0, 30, size=(n, n)).astype(np.int64)
        perm = rng.permutation(n)
        s = permutation_schedule(perm)
        base = maxweight_decide(q, s)
        # with g < 1 everywhere on this range, the integer gap satisfies
        # gap > g(W*) iff gap > 0, so the policies must coincide
        tiny = HysteresisFn(0.99, 0.5)
        assert tiny(float(30 * n)) < 1.0
        mimic = adaptive_maxweight_decide(q, s, tiny)
        assert base.action == mimic.action


class TestHysteresisMonotonicity:
    @given(st.integers(1, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
    @settings(max_examples=150, deadline=None)
    def test_monotone_in_gap_for_fixed_wstar(self, w_star, gap_a, gap_b):
        g = HysteresisFn(0.1, 0.2)
        lo, hi = sorted((min(gap_a, w_star), min(gap_b, w_star)))
        fires_lo = lo > g(w_star)
        fires_hi = hi > g(w_star)
        if fires_lo:
            assert fires_hi


class TestFixedFrame:
    def test_boundaries(self):
        rot = cyclic_rotation(2)
        fires = [fixed_frame_decide(t, 25, rot, delta_r=20).action == "reconfigure"
                 for t in range(80)]
        assert [t for t, f in enumerate(fires) if f] == [0, 25, 50, 75]

    def test_bad_frame(self):
        with pytest.raises(BadFrame):
            fixed_frame_decide(0, 10, cyclic_rotation(2), delta_r=20)

    def test_rotation_cycles_through_all_schedules(self):
        rot = cyclic_rotation(3)
        picks = [fixed_frame_decide(t, 5, rot).new_schedule for t in (0, 5, 10, 15)]
        assert (picks[0] == rot[0]).all()
        assert (picks[1] == rot[1]).all()
        assert (picks[2] == rot[2]).all()
        assert (picks[3] == rot[0]).all()
        # together the rotation covers every queue exactly once
        total = sum(s for s in rot)
        assert (total == 1).all()
