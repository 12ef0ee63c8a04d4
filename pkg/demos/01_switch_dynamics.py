"""Walk through the slot dynamics of a small switch by hand.

A 2x2 switch serves at most one packet per input and per output each
slot, through a permutation schedule.  Changing the schedule silences the
switch for delta_r slots, and service granted to an empty queue is
recorded as unused.  This script steps a tiny trace and prints every
quantity so the bookkeeping is visible.

Run:  python demos/01_switch_dynamics.py
"""

import numpy as np

from switchsim import SwitchState, begin_reconfiguration, identity_schedule, step_dynamics
from switchsim.core import permutation_schedule


def show(label, state, out=None):
    line = f"{label:26s} t={state.t:2d} r={state.r} q={state.q.ravel().tolist()}"
    if out is not None:
        line += f" served={out.served.ravel().tolist()} unused={out.unused.ravel().tolist()}"
    print(line)


q0 = np.array([[3, 1], [0, 2]], dtype=np.int64)
state = SwitchState(q0, identity_schedule(2))
show("start (identity schedule)", state)

# two serving slots with no arrivals: the diagonal drains once per slot,
# and when queue (1,1) empties its grant shows up as unused service
for _ in range(3):
    state, out = step_dynamics(state, np.zeros((2, 2), dtype=np.int64))
    show("serve, no arrivals", state, out)

# switch to the swap schedule: delta_r = 2 slots of silence
swap = permutation_schedule([1, 0])
state = begin_reconfiguration(state, swap, delta_r=2)
show("reconfiguration begins", state)

arrivals = np.array([[1, 1], [0, 0]], dtype=np.int64)
for _ in range(2):
    state, out = step_dynamics(state, arrivals)
    show("delay slot (no service)", state, out)

# countdown hit zero: the swap schedule serves from this slot on
state, out = step_dynamics(state, np.zeros((2, 2), dtype=np.int64))
show("service resumes (swap)", state, out)

print("\nconservation check: every slot satisfied "
      "sum q(t+1) - sum q(t) = arrivals - departures, exactly.")
