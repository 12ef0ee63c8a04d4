"""Scheduling policies for a switch whose schedule changes cost time.

The hysteresis policy recomputes the best matching every serving slot but
only installs it when the weight it would gain exceeds a sublinear
threshold of the best weight; plain best-matching scheduling (threshold
zero) is kept as a negative control, and a fixed-frame rotation stands in
for quasi-static schedule plans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import permutation_schedule, validate_queue_matrix, validate_schedule
from .errors import BadFrame
from .matching import max_weight_matching, schedule_weight

KEEP = "keep"
RECONFIGURE = "reconfigure"


@dataclass(frozen=True)
class HysteresisFn:
    """Threshold g(x) = (1 - gamma) * x**(1 - delta), gamma, delta in (0, 1).

    Increasing, g(0) = 0, and sublinear (g(x)/x -> 0), with closed-form
    inverse g^-1(y) = (y / (1 - gamma))**(1 / (1 - delta)).
    """

    gamma: float
    delta: float

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    def __call__(self, x):
        return (1.0 - self.gamma) * np.power(x, 1.0 - self.delta)

    def inverse(self, y):
        return np.power(np.asarray(y, dtype=np.float64) / (1.0 - self.gamma),
                        1.0 / (1.0 - self.delta))


@dataclass
class PolicyDecision:
    """Keep the current schedule or install a new one, with diagnostics."""

    action: str
    new_schedule: Optional[np.ndarray]
    w: int
    w_star: int
    delta_w: int
    threshold: float

    @property
    def reconfigure(self) -> bool:
        return self.action == RECONFIGURE


def adaptive_maxweight_decide(q, s, g: HysteresisFn) -> PolicyDecision:
    """Install the best matching only when its gain clears the threshold.

    Computes W* (best weight), W = <q, s>, and reconfigures iff
    W* - W > g(W*).  The comparison pits the exact integer gap against
    the real threshold; Python compares int to float exactly.
    """
    q = validate_queue_matrix(q)
    s = validate_schedule(s, q.shape[0])
    best = max_weight_matching(q)
    w = schedule_weight(q, s)
    delta_w = best.weight - w
    threshold = float(g(best.weight))
    if delta_w > threshold:
        return PolicyDecision(RECONFIGURE, best.schedule, w, best.weight, delta_w, threshold)
    return PolicyDecision(KEEP, None, w, best.weight, delta_w, threshold)


def maxweight_decide(q, s) -> PolicyDecision:
    """Zero-threshold variant: reconfigure whenever any gain exists."""
    q = validate_queue_matrix(q)
    s = validate_schedule(s, q.shape[0])
    best = max_weight_matching(q)
    w = schedule_weight(q, s)
    delta_w = best.weight - w
    if delta_w > 0:
        return PolicyDecision(RECONFIGURE, best.schedule, w, best.weight, delta_w, 0.0)
    return PolicyDecision(KEEP, None, w, best.weight, delta_w, 0.0)


def cyclic_rotation(n: int) -> tuple[np.ndarray, ...]:
    """The n cyclic-shift permutation schedules; together they serve every queue."""
    return tuple(permutation_schedule([(i + k) % n for i in range(n)]) for k in range(n))


def fixed_frame_decide(t: int, frame_len: int, rotation: Sequence[np.ndarray],
                       delta_r: Optional[int] = None) -> PolicyDecision:
    """Rotate to the next fixed schedule at every frame boundary.

    Reconfigures at t = 0, frame_len, 2*frame_len, ... regardless of queue
    content, re-installing even an identical matrix so that renewal
    quantities are exact.  When delta_r is supplied the frame must leave
    at least one serving slot (frame_len >= delta_r + 1).
    """
    if frame_len < 1:
        raise BadFrame(f"frame_len must be >= 1, got {frame_len}")
    if delta_r is not None and frame_len <= delta_r:
        raise BadFrame(
            f"frame_len = {frame_len} leaves no serving slots under delta_r = {delta_r}")
    if not rotation:
        raise ValueError("rotation must contain at least one schedule")
    if t % frame_len == 0:
        which = (t // frame_len) % len(rotation)
        new_s = validate_schedule(rotation[which])
        return PolicyDecision(RECONFIGURE, new_s, 0, 0, 0, 0.0)
    return PolicyDecision(KEEP, None, 0, 0, 0, 0.0)


@dataclass(frozen=True)
class AdaptivePolicy:
    """Hysteresis scheduling with g(x) = (1 - gamma) x^(1 - delta)."""

    gamma: float = 0.1
    delta: float = 0.2

    kind = "adaptive"

    def hysteresis(self) -> HysteresisFn:
        return HysteresisFn(self.gamma, self.delta)

    def describe(self) -> str:
        return f"adaptive(gamma={self.gamma},delta={self.delta})"


@dataclass(frozen=True)
class MaxWeightPolicy:
    """Always hold the best matching (unstable under nonzero delay)."""

    kind = "maxweight"

    def describe(self) -> str:
        return "maxweight"


@dataclass(frozen=True)
class FixedFramePolicy:
    """Rotate through fixed schedules every frame_len slots."""

    frame_len: int
    rotation: Optional[tuple] = None  # default: the n cyclic shifts

    kind = "fixed_frame"

    def resolved_rotation(self, n: int) -> tuple[np.ndarray, ...]:
        if self.rotation is None:
            return cyclic_rotation(n)
        return tuple(validate_schedule(s, n) for s in self.rotation)

    def describe(self) -> str:
        return f"fixed_frame(frame_len={self.frame_len})"
