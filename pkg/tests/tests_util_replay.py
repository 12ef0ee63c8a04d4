"""Trajectory replay oracle: re-derive a recorded run through the
single-slot dynamics alone, checking conservation and the unused-service
complementarity on every slot."""

import numpy as np

from switchsim.core import SwitchState, begin_reconfiguration, step_dynamics
from switchsim.matching import max_weight_matching
from switchsim.core import permutation_schedule
from switchsim.sampling import ArrivalStreams


def replay_and_check(cfg, stats) -> int:
    """Replay `stats` (run with collect_totals=True) slot by slot.

    Arrivals regenerate from the seed; schedule changes re-apply at the
    recorded instants.  Asserts the per-slot invariants and that the queue
    totals match the engine's bit for bit.  Returns the slot count.
    """
    assert stats.slot_totals is not None, "run the config with collect_totals=True"
    streams = ArrivalStreams(cfg.traffic, cfg.seed)
    changes = {int(t): perm for t, perm in
               zip(stats.instants["t"], stats.instants["perm"])}
    q0 = np.zeros((cfg.n, cfg.n), dtype=np.int64)
    state = SwitchState(q0, max_weight_matching(q0).schedule, 0, 0, -1)
    totals = stats.slot_totals
    for t in range(cfg.horizon):
        if t in changes:
            new_s = permutation_schedule(changes[t])
            if cfg.delta_r == 0:
                state = SwitchState(state.q, new_s, 0, state.t, t)
            else:
                state = begin_reconfiguration(state, new_s, cfg.delta_r)
        prev = state
        state, out = step_dynamics(state, streams.sample_slot())
        assert state.q.sum() - prev.q.sum() == out.arrivals.sum() - out.served.sum(), t
        assert (out.unused * state.q == 0).all(), t
        if prev.r > 0:
            assert (out.served == 0).all() and (out.unused == 0).all(), t
        assert int(state.q.sum()) == int(totals[t]), t
    return cfg.horizon
