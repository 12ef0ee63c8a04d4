import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchsim.core import (
    SwitchState,
    TrafficSpec,
    begin_reconfiguration,
    identity_schedule,
    permutation_schedule,
    step_dynamics,
    uniform_traffic,
    validate_queue_matrix,
    validate_schedule,
    validate_traffic,
)
from switchsim.errors import (
    BadEpsilon,
    DimensionMismatch,
    NonDoublyStochastic,
    ReconfigWhileReconfiguring,
)


def make_state(q, s, r=0, t=0):
    return SwitchState(np.asarray(q, dtype=np.int64), np.asarray(s, dtype=np.int64), r, t)


class TestValidateTraffic:
    def test_uniform_ok(self):
        validate_traffic(uniform_traffic(4, 0.04))

    def test_permutation_matrix_ok(self):
        validate_traffic(TrafficSpec(np.eye(3), 0.5))

    def test_row_sum_violation(self):
        nu = np.full((3, 3), 1.0 / 3)
        nu[0, 0] += 0.1
        with pytest.raises(NonDoublyStochastic):
            validate_traffic(TrafficSpec(nu, 0.1))

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.2, 1.5])
    def test_bad_epsilon(self, eps):
        with pytest.raises(BadEpsilon):
            validate_traffic(uniform_traffic(2, eps))

    def test_tiny_deviation_within_tolerance(self):
        nu = np.full((2, 2), 0.5)
        nu[0, 0] += 5e-13
        nu[0, 1] -= 5e-13
        nu[1, 0] -= 5e-13
        nu[1, 1] += 5e-13
        validate_traffic(TrafficSpec(nu, 0.3))

    def test_truncated_requires_a_max(self):
        with pytest.raises(ValueError):
            validate_traffic(uniform_traffic(2, 0.1, family="truncated-poisson"))


class TestStepDynamics:
    def test_empty_queue_all_service_unused(self):
        st0 = make_state(np.zeros((2, 2)), identity_schedule(2))
        nxt, out = step_dynamics(st0, np.zeros((2, 2)))
        assert (nxt.q == 0).all()
        assert (out.unused == np.eye(2)).all()
        assert (out.served == 0).all()

    def test_partial_unused(self):
        st0 = make_state([[1, 0], [0, 0]], identity_schedule(2))
        nxt, out = step_dynamics(st0, np.zeros((2, 2)))
        assert (nxt.q == 0).all()
        assert (out.unused == [[0, 0], [0, 1]]).all()
        assert (out.served == [[1, 0], [0, 0]]).all()

    def test_service_gated_during_reconfiguration(self):
        st0 = make_state([[1, 0], [0, 0]], identity_schedule(2), r=3)
        nxt, out = step_dynamics(st0, [[1, 1], [0, 0]])
        assert (nxt.q == [[2, 1], [0, 0]]).all()
        assert (out.unused == 0).all()
        assert (out.served == 0).all()
        assert nxt.r == 2

    def test_rejects_negative_arrivals(self):
        st0 = make_state(np.zeros((2, 2)), identity_schedule(2))
        with pytest.raises(ValueError):
            step_dynamics(st0, [[-1, 0], [0, 0]])

    def test_input_state_not_mutated(self):
        st0 = make_state([[5, 0], [0, 5]], identity_schedule(2))
        q_before = st0.q.copy()
        step_dynamics(st0, [[1, 1], [1, 1]])
        assert (st0.q == q_before).all()
        assert st0.t == 0


class TestBeginReconfiguration:
    def test_exactly_delta_r_lost_slots(self):
        # with delta_r = 20 the next 20 slots are serviceless, then service resumes
        st0 = make_state(np.full((2, 2), 10), identity_schedule(2))
        swap = permutation_schedule([1, 0])
        st1 = begin_reconfiguration(st0, swap, 20)
        assert st1.r == 20 and st1.t_last_reconfig == 0
        lost = 0
        cur = st1
        for _ in range(25):
            cur, out = step_dynamics(cur, np.zeros((2, 2)))
            if (out.served == 0).all() and (out.unused == 0).all():
                lost += 1
            else:
                break
        assert lost == 20
        # first serving slot drains along the new schedule
        assert (out.served == swap).all()

    def test_single_slot_delay(self):
        st0 = make_state(np.full((2, 2), 3), identity_schedule(2))
        st1 = begin_reconfiguration(st0, identity_schedule(2), 1)
        st2, out1 = step_dynamics(st1, np.zeros((2, 2)))
        assert (out1.served == 0).all() and st2.r == 0
        _, out2 = step_dynamics(st2, np.zeros((2, 2)))
        assert out2.served.sum() == 2

    def test_rejects_overlapping_reconfiguration(self):
        st0 = make_state(np.zeros((2, 2)), identity_schedule(2), r=5)
        with pytest.raises(ReconfigWhileReconfiguring):
            begin_reconfiguration(st0, identity_schedule(2), 20)


@st.composite
def trajectory_case(draw):
    n = draw(st.integers(2, 4))
    q0 = draw(st.lists(st.lists(st.integers(0, 6), min_size=n, max_size=n),
                       min_size=n, max_size=n))
    perm = draw(st.permutations(range(n)))
    steps = draw(st.lists(
        st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                 min_size=n, max_size=n),
        min_size=1, max_size=12))
    r0 = draw(st.integers(0, 3))
    return n, q0, list(perm), steps, r0


@given(trajectory_case())
@settings(max_examples=150, deadline=None)
def test_slot_invariants_hold_along_random_trajectories(case):
    n, q0, perm, steps, r0 = case
    state = SwitchState(np.array(q0, dtype=np.int64), permutation_schedule(perm), r=r0)
    for a in steps:
        prev = state
        state, out = step_dynamics(state, np.array(a, dtype=np.int64))
        # conservation, exact integers
        assert state.q.sum() - prev.q.sum() == out.arrivals.sum() - out.served.sum()
        # unused service complementarity u * q(t+1) = 0
        assert (out.unused * state.q == 0).all()
        # gating: no departures while reconfiguring
        if prev.r > 0:
            assert (out.served == 0).all() and (out.unused == 0).all()
        # grant split: served + unused = s * [r == 0]
        gate = 1 if prev.r == 0 else 0
        assert (out.served + out.unused == prev.s * gate).all()
        assert (state.q >= 0).all()
        # bounded per-slot motion given bounded arrivals (a <= 3 here)
        assert np.abs(state.q - prev.q).max() <= 3 + 1


def test_schedule_constant_between_reconfigurations():
    state = make_state(np.full((3, 3), 4), identity_schedule(3))
    state = begin_reconfiguration(state, permutation_schedule([1, 2, 0]), 2)
    seen = [state.s.copy()]
    for _ in range(6):
        state, _ = step_dynamics(state, np.zeros((3, 3)))
        seen.append(state.s.copy())
    for s in seen[1:]:
        assert (s == seen[0]).all()


def test_validators_reject_bad_shapes():
    with pytest.raises(DimensionMismatch):
        validate_queue_matrix(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        validate_schedule(np.eye(3), n=2)
    with pytest.raises(ValueError):
        validate_schedule(np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        validate_queue_matrix(np.array([[-1, 0], [0, 0]]))
