"""Switch domain model: traffic, state, and the single-slot queue update.

An n x n input-queued switch keeps one queue per (input, output) pair.
Packets arrive in integer batches a(t), a 0/1 matching matrix s(t) names
the queues that may transmit, and a countdown r(t) gates service off
while a schedule change is in progress.  The slot update is

    q(t+1) = max(q(t) + a(t) - s(t) * [r(t) == 0], 0)

entrywise, in exact integer arithmetic.  Scheduled service that lands on
an empty queue is recorded as unused service u(t), so equivalently

    q(t+1) = q(t) + a(t) - s(t) * [r(t) == 0] + u(t),     u * q(t+1) = 0.

Reconfiguring the schedule costs exactly ``delta_r`` serviceless slots:
the countdown is set to delta_r on the slot where the change begins and
service resumes on the slot where it has counted down to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BadEpsilon,
    DimensionMismatch,
    NonDoublyStochastic,
    ReconfigWhileReconfiguring,
)

DOUBLY_STOCHASTIC_TOL = 1e-12

ARRIVAL_FAMILIES = ("poisson", "bernoulli", "truncated-poisson")


def validate_queue_matrix(q, n: Optional[int] = None) -> np.ndarray:
    """Coerce to an int64 square matrix of nonnegative packet counts."""
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"queue matrix must be square, got shape {q.shape}")
    if n is not None and q.shape[0] != n:
        raise DimensionMismatch(f"queue matrix is {q.shape[0]}x{q.shape[0]}, expected {n}x{n}")
    if (q < 0).any():
        raise ValueError("queue matrix entries must be nonnegative")
    return q


def validate_schedule(s, n: Optional[int] = None) -> np.ndarray:
    """Coerce to an int64 0/1 matrix with at most one 1 per row and column."""
    s = np.asarray(s, dtype=np.int64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"schedule must be square, got shape {s.shape}")
    if n is not None and s.shape[0] != n:
        raise DimensionMismatch(f"schedule is {s.shape[0]}x{s.shape[0]}, expected {n}x{n}")
    if not np.isin(s, (0, 1)).all():
        raise ValueError("schedule entries must be 0 or 1")
    if (s.sum(axis=1) > 1).any() or (s.sum(axis=0) > 1).any():
        raise ValueError("schedule may select at most one queue per row and per column")
    return s


def identity_schedule(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def permutation_schedule(perm) -> np.ndarray:
    """0/1 matrix with row i serving column perm[i]."""
    perm = list(perm)
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
    s = np.zeros((n, n), dtype=np.int64)
    s[np.arange(n), perm] = 1
    return s


@dataclass
class TrafficSpec:
    """Arrival law: rates lambda = (1 - epsilon) * nu with nu doubly stochastic.

    nu saturates every input and output port (all row and column sums 1);
    epsilon in (0, 1) is the distance to that boundary, so the load is
    rho = 1 - epsilon.  family picks the per-slot marginal: "poisson",
    "bernoulli" (P{1} = lambda_ij), or "truncated-poisson" (Poisson
    conditioned on {0..a_max}; its mean sits slightly below lambda_ij).
    """

    nu: np.ndarray
    epsilon: float
    family: str = "poisson"
    a_max: Optional[int] = None

    def __post_init__(self):
        self.nu = np.asarray(self.nu, dtype=np.float64)

    @property
    def n(self) -> int:
        return self.nu.shape[0]

    @property
    def lam(self) -> np.ndarray:
        """Per-slot mean arrival rate matrix."""
        return (1.0 - self.epsilon) * self.nu


def uniform_traffic(n: int, epsilon: float, family: str = "poisson",
                    a_max: Optional[int] = None) -> TrafficSpec:
    """All-queues-equal saturating rates nu_ij = 1/n."""
    return TrafficSpec(np.full((n, n), 1.0 / n), epsilon, family, a_max)


def validate_traffic(spec: TrafficSpec) -> None:
    """Raise unless nu is doubly stochastic and the traffic spec is coherent."""
    nu = spec.nu
    if nu.ndim != 2 or nu.shape[0] != nu.shape[1]:
        raise NonDoublyStochastic(f"rate matrix must be square, got shape {nu.shape}")
    if nu.shape[0] < 2:
        raise NonDoublyStochastic("port count must be at least 2")
    if (nu < 0).any():
        raise NonDoublyStochastic("rate matrix entries must be nonnegative")
    row_dev = np.abs(nu.sum(axis=1) - 1.0).max()
    col_dev = np.abs(nu.sum(axis=0) - 1.0).max()
    if max(row_dev, col_dev) > DOUBLY_STOCHASTIC_TOL:
        raise NonDoublyStochastic(
            f"row/column sums deviate from 1 by {max(row_dev, col_dev):.3e} "
            f"(tolerance {DOUBLY_STOCHASTIC_TOL:.0e})")
    if not (0.0 < spec.epsilon < 1.0):
        raise BadEpsilon(f"epsilon must lie in (0, 1), got {spec.epsilon}")
    if spec.family not in ARRIVAL_FAMILIES:
        raise ValueError(f"unknown arrival family {spec.family!r}, expected one of {ARRIVAL_FAMILIES}")
    if spec.family == "truncated-poisson":
        if spec.a_max is None or spec.a_max < 1:
            raise ValueError("truncated-poisson requires a_max >= 1")
    if (spec.lam >= 1.0).any():
        raise BadEpsilon("per-slot mean rates must stay below 1")


def arrival_variance_total(spec: TrafficSpec) -> float:
    """Exact per-slot variance of the total arrival count, Var(sum_ij a_ij)."""
    lam = spec.lam
    if spec.family == "poisson":
        return float(lam.sum())
    if spec.family == "bernoulli":
        return float((lam * (1.0 - lam)).sum())
    # truncated-poisson: moments of the conditional law, per entry
    from .sampling import truncated_poisson_moments
    total = 0.0
    for l in lam.ravel():
        mean, var = truncated_poisson_moments(float(l), int(spec.a_max))
        total += var
    return total


@dataclass
class SwitchState:
    """Markov state (q, s, r) plus slot bookkeeping.

    r == 0 means the switch may serve this slot; while r > 0 the most
    recent reconfiguration (begun at slot t_last_reconfig) is still in
    progress and r = delta_r - (t - t_last_reconfig).
    """

    q: np.ndarray
    s: np.ndarray
    r: int = 0
    t: int = 0
    t_last_reconfig: int = -1

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def copy(self) -> "SwitchState":
        return SwitchState(self.q.copy(), self.s.copy(), self.r, self.t, self.t_last_reconfig)


@dataclass
class SlotOutcome:
    """What a single slot did: arrivals, actual departures, idle grants."""

    arrivals: np.ndarray
    served: np.ndarray
    unused: np.ndarray
    reconfigured: bool = False


def step_dynamics(state: SwitchState, arrivals) -> tuple[SwitchState, SlotOutcome]:
    """Apply one slot of arrivals and (possibly gated) service.

    Service is granted only when state.r == 0.  The schedule itself never
    changes here; begin_reconfiguration does that.  Total on valid input:
    returns the successor state and the slot outcome, leaving the input
    state untouched.
    """
    a = np.asarray(arrivals, dtype=np.int64)
    if a.shape != state.q.shape:
        raise DimensionMismatch(f"arrivals shape {a.shape} != queue shape {state.q.shape}")
    if (a < 0).any():
        raise ValueError("arrivals must be nonnegative")

    if state.r == 0:
        grant = state.s
    else:
        grant = np.zeros_like(state.s)
    before = state.q + a
    unused = ((grant == 1) & (before == 0)).astype(np.int64)
    served = grant - unused
    q_next = before - served
    r_next = state.r - 1 if state.r > 0 else 0
    nxt = SwitchState(q_next, state.s, r_next, state.t + 1, state.t_last_reconfig)
    return nxt, SlotOutcome(arrivals=a, served=served, unused=unused, reconfigured=False)


def begin_reconfiguration(state: SwitchState, new_s, delta_r: int) -> SwitchState:
    """Install a new schedule, starting its delta_r serviceless slots now.

    The current slot is the first of exactly delta_r slots with r > 0;
    service resumes on the slot where r has counted down to 0.
    """
    if state.r > 0:
        raise ReconfigWhileReconfiguring(
            f"reconfiguration requested at slot {state.t} with r = {state.r} still positive")
    if delta_r < 1:
        raise ValueError("delta_r must be >= 1; zero-delay swaps do not enter a countdown")
    new_s = validate_schedule(new_s, state.n)
    return SwitchState(state.q, new_s, delta_r, state.t, state.t)
