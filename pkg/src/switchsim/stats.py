"""Streaming run statistics and steady-state identity checks.

A completed run is summarized by a RunStats record: time averages with
batch-means confidence intervals for the slot-level series (total queue,
unused service, reconfiguration occupancy, quadratic functionals), cycle
statistics collected at reconfiguration instants (durations, thresholds,
overshoots), and strided samples of the cone decomposition norms.

The check_* functions test the identities a stationary run must satisfy:

  unused drift          E[sum u] = n (eps - Pr{r > 0})
  renewal occupancy     Pr{r > 0} = delta_r / E[duration]
  duration vs weight    E[duration] = E[g(W*) + deltaW_over] / ((n - alpha)(1 - eps))
  queue floor           E[sum q at instants] >= g^-1((n - alpha)(1 - eps) delta_r / eps - E[deltaW_over])

Each check returns an IdentityReport that serializes to JSON with fields
(name, lhs, rhs, se, pass).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import t as student_t

from .errors import (
    InsufficientBatches,
    NegativeArgument,
    NonPositiveData,
    TooFewIntervals,
)
from .policies import HysteresisFn

MIN_BATCHES = 20
MIN_INTERVALS = 100


def batch_means(values, batches: int = 30) -> np.ndarray:
    """Means of `batches` near-equal contiguous blocks of a series."""
    arr = np.asarray(values, dtype=np.float64)
    m = arr.size
    if m == 0:
        return np.zeros(0)
    b = min(batches, m)
    idx = (np.arange(m) * b) // m
    sums = np.bincount(idx, weights=arr, minlength=b)
    counts = np.bincount(idx, minlength=b)
    return sums / counts


def mean_se_ci(batch_means_arr, confidence: float = 0.95) -> tuple[float, float, float, float]:
    """(mean, standard error, ci_lo, ci_hi) from batch means, Student t."""
    arr = np.asarray(batch_means_arr, dtype=np.float64)
    b = arr.size
    if b == 0:
        return math.nan, math.nan, math.nan, math.nan
    m = float(arr.mean())
    if b < 2:
        return m, math.nan, math.nan, math.nan
    se = float(arr.std(ddof=1) / math.sqrt(b))
    half = float(student_t.ppf(0.5 + confidence / 2.0, b - 1)) * se
    return m, se, m - half, m + half


@dataclass
class IdentityReport:
    """Outcome of one identity check."""

    name: str
    lhs: float
    rhs: float
    se: float
    passed: Optional[bool]
    status: str = "ok"              # "ok" | "not_applicable" | "vacuous"
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "se": self.se,
            "pass": self.passed,
            "status": self.status,
            "detail": self.detail,
        }


@dataclass
class RunStats:
    """Everything measured by one completed simulation run."""

    # configuration echo
    n: int = 0
    epsilon: float = math.nan
    delta_r: int = 0
    policy: str = ""
    gamma: Optional[float] = None
    delta: Optional[float] = None
    frame_len: Optional[int] = None
    family: str = "poisson"
    a_max: Optional[int] = None
    horizon: int = 0
    warmup: int = 0
    seed: int = 0
    sample_ssc_every: int = 100
    engine: str = "fast"
    batches: int = 30

    # slot-level estimates over the measured window
    measured_slots: int = 0
    mean_total_q: float = math.nan
    se_total_q: float = math.nan
    ci_total_q: tuple = (math.nan, math.nan)
    mean_unused: float = math.nan
    se_unused: float = math.nan
    p_reconfig: float = math.nan
    se_p_reconfig: float = math.nan
    mean_v1: float = math.nan
    mean_v2: float = math.nan
    mean_v3: float = math.nan
    mean_v4: float = math.nan
    window_means: list = field(default_factory=list)

    # reconfiguration bookkeeping
    r_pos_slots_measured: int = 0
    r_pos_slots_total: int = 0
    reconfig_count_measured: int = 0
    reconfig_count_total: int = 0
    mean_duration: float = math.nan
    se_duration: float = math.nan
    duration_count: int = 0
    mean_gW: float = math.nan
    se_gW: float = math.nan
    mean_deltaW_overshoot: float = math.nan
    se_deltaW: float = math.nan
    mean_dur_minus_pred: float = math.nan
    se_dur_minus_pred: float = math.nan
    mean_total_q_at_reconfig: float = math.nan
    se_q_at_reconfig: float = math.nan
    alpha_hat: float = math.nan

    # cone decomposition samples
    ssc_samples: int = 0
    mean_q_perp: float = math.nan
    se_q_perp: float = math.nan
    mean_q_par: float = math.nan
    se_q_par: float = math.nan
    mean_q_norm: float = math.nan
    se_q_norm: float = math.nan

    # conserved totals and provenance
    arrival_total_var: float = math.nan
    sumq_first_measured: int = 0
    sumq_end: int = 0
    served_total: list = field(default_factory=list)
    arrivals_total: list = field(default_factory=list)
    trajectory_hash: str = ""
    batch_series: dict = field(default_factory=dict)

    # in-memory extras, never serialized
    slot_totals: Optional[np.ndarray] = None
    instants: Optional[dict] = None

    _SKIP_JSON = ("slot_totals", "instants")

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k in self._SKIP_JSON:
                continue
            if isinstance(v, np.ndarray):
                v = v.tolist()
            elif isinstance(v, tuple):
                v = list(v)
            out[k] = v
        out["batch_series"] = {k: list(map(float, v)) for k, v in self.batch_series.items()}
        return out

    def to_json(self, path=None, indent: int = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "RunStats":
        known = {f for f in cls.__dataclass_fields__ if f not in cls._SKIP_JSON}
        kwargs = {k: v for k, v in d.items() if k in known}
        if "ci_total_q" in kwargs and isinstance(kwargs["ci_total_q"], list):
            kwargs["ci_total_q"] = tuple(kwargs["ci_total_q"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "RunStats":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def hysteresis(self) -> Optional[HysteresisFn]:
        if self.gamma is None or self.delta is None:
            return None
        return HysteresisFn(self.gamma, self.delta)


def _require_batches(stats: RunStats, key: str) -> np.ndarray:
    series = np.asarray(stats.batch_series.get(key, ()), dtype=np.float64)
    if series.size < MIN_BATCHES:
        raise InsufficientBatches(
            f"{series.size} batch means for {key!r}, need at least {MIN_BATCHES}")
    return series


def check_unused_drift(stats: RunStats, eps: Optional[float] = None,
                       n: Optional[int] = None) -> IdentityReport:
    """E[sum u] against n (eps - Pr{r > 0}).

    The per-slot conservation identity makes lhs - rhs equal the arrival
    shot noise n(1-eps) - mean(sum a) plus a boundary term, so the test
    compares against 3 sqrt(Var(sum a)/T) plus the observed boundary
    drift.  The batch SE of the unused series degenerates to zero in the
    regimes where unused service never fires, which is why it is reported
    but not used as the tolerance.
    """
    eps = stats.epsilon if eps is None else eps
    n = stats.n if n is None else n
    _require_batches(stats, "unused")
    lhs = stats.mean_unused
    rhs = n * (eps - stats.p_reconfig)
    t_slots = stats.measured_slots
    se_shot = math.sqrt(stats.arrival_total_var / t_slots)
    boundary = abs(stats.sumq_end - stats.sumq_first_measured) / t_slots
    passed = abs(lhs - rhs) <= 3.0 * se_shot + boundary
    return IdentityReport(
        name="unused_drift", lhs=lhs, rhs=rhs, se=se_shot, passed=bool(passed),
        detail={"boundary": boundary, "se_batch_unused": stats.se_unused,
                "tolerance": 3.0 * se_shot + boundary})


def check_renewal_probability(stats: RunStats, delta_r: Optional[int] = None) -> IdentityReport:
    """Pr{r > 0} against delta_r / E[duration]."""
    delta_r = stats.delta_r if delta_r is None else delta_r
    if stats.duration_count < MIN_INTERVALS:
        raise TooFewIntervals(
            f"{stats.duration_count} completed intervals, need at least {MIN_INTERVALS}")
    lhs = stats.p_reconfig
    rhs = delta_r / stats.mean_duration
    rel = abs(lhs - rhs) / rhs if rhs > 0 else math.inf
    within_se = abs(lhs - rhs) <= 3.0 * stats.se_p_reconfig
    passed = rel <= 0.02 or within_se
    return IdentityReport(
        name="renewal_probability", lhs=lhs, rhs=rhs, se=stats.se_p_reconfig,
        passed=bool(passed), detail={"relative_error": rel})


def check_duration_weight_relation(stats: RunStats, eps: Optional[float] = None,
                                   n: Optional[int] = None,
                                   alpha: Optional[float] = None) -> IdentityReport:
    """E[duration] against E[g(W*) + deltaW_over] / ((n - alpha)(1 - eps)).

    Tested through the per-cycle difference d_k (duration minus its
    prediction from the weight jump closing that cycle), whose batch SE
    is the meaningful scale for the comparison.
    """
    eps = stats.epsilon if eps is None else eps
    n = stats.n if n is None else n
    alpha = stats.alpha_hat if alpha is None else alpha
    if stats.duration_count < MIN_INTERVALS:
        return IdentityReport(
            name="duration_weight", lhs=stats.mean_duration, rhs=math.nan,
            se=math.nan, passed=None, status="not_applicable",
            detail={"duration_count": stats.duration_count})
    if math.isnan(stats.mean_gW):    # policy without a threshold (fixed frames)
        return IdentityReport(
            name="duration_weight", lhs=stats.mean_duration, rhs=math.nan,
            se=math.nan, passed=None, status="not_applicable",
            detail={"reason": "no threshold values recorded for this policy"})
    _require_batches(stats, "dur_minus_pred")
    pred = (stats.mean_gW + stats.mean_deltaW_overshoot) / ((n - alpha) * (1.0 - eps))
    diff = stats.mean_duration - pred
    se = stats.se_dur_minus_pred
    passed = abs(diff) <= 3.0 * se
    return IdentityReport(
        name="duration_weight", lhs=stats.mean_duration, rhs=pred, se=se,
        passed=bool(passed), detail={"difference": diff, "alpha": alpha})


def weight_lower_bound(eps: float, n: int, alpha: float, delta_r: int,
                       g: HysteresisFn, mean_deltaW: float = 0.0) -> float:
    """Floor g^-1((n - alpha)(1 - eps) delta_r / eps - mean_deltaW).

    Raises NegativeArgument when the bound is vacuous (argument <= 0).
    """
    arg = (n - alpha) * (1.0 - eps) * delta_r / eps - mean_deltaW
    if arg <= 0.0:
        raise NegativeArgument(f"bound argument {arg:.6g} is not positive; bound is vacuous")
    return float(g.inverse(arg))


def check_weight_floor(stats: RunStats, eps: Optional[float] = None,
                       n: Optional[int] = None,
                       alpha: Optional[float] = None,
                       g: Optional[HysteresisFn] = None) -> IdentityReport:
    """Mean total queue at reconfiguration instants against its floor."""
    eps = stats.epsilon if eps is None else eps
    n = stats.n if n is None else n
    alpha = stats.alpha_hat if alpha is None else alpha
    g = stats.hysteresis() if g is None else g
    if g is None:
        return IdentityReport(name="weight_floor", lhs=math.nan, rhs=math.nan,
                              se=math.nan, passed=None, status="not_applicable",
                              detail={"reason": "no hysteresis function for this policy"})
    if stats.duration_count < MIN_INTERVALS:
        return IdentityReport(name="weight_floor", lhs=stats.mean_total_q_at_reconfig,
                              rhs=math.nan, se=math.nan, passed=None,
                              status="not_applicable",
                              detail={"duration_count": stats.duration_count})
    try:
        bound = weight_lower_bound(eps, n, alpha, stats.delta_r, g,
                                   stats.mean_deltaW_overshoot)
    except NegativeArgument:
        return IdentityReport(name="weight_floor", lhs=stats.mean_total_q_at_reconfig,
                              rhs=math.nan, se=math.nan, passed=None, status="vacuous",
                              detail={"reason": "bound argument not positive"})
    lhs = stats.mean_total_q_at_reconfig
    se = stats.se_q_at_reconfig
    passed = lhs >= bound - 3.0 * se
    return IdentityReport(name="weight_floor", lhs=lhs, rhs=bound, se=se,
                          passed=bool(passed), detail={"alpha": alpha})


def run_identity_suite(stats: RunStats) -> list[IdentityReport]:
    """All identity checks that apply to this run's policy."""
    reports = [check_unused_drift(stats)]
    try:
        reports.append(check_renewal_probability(stats))
    except TooFewIntervals as exc:
        reports.append(IdentityReport(name="renewal_probability", lhs=math.nan,
                                      rhs=math.nan, se=math.nan, passed=None,
                                      status="not_applicable", detail={"reason": str(exc)}))
    reports.append(check_duration_weight_relation(stats))
    reports.append(check_weight_floor(stats))
    return reports


@dataclass
class PowerLawFit:
    """Ordinary least squares of log y on log x."""

    slope: float
    intercept: float
    stderr: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.stderr))


def fit_loglog_exponent(points: Sequence) -> PowerLawFit:
    """Fit y = C x^slope by OLS on (log x, log y).

    `points` is a sequence of (x, y) pairs (longer tuples are fine, the
    extra entries such as CI bounds are ignored).  Requires at least 3
    points with strictly positive coordinates.
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    if len(pts) < 3:
        raise NonPositiveData(f"need at least 3 points for a slope, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if (xs <= 0).any() or (ys <= 0).any():
        raise NonPositiveData("log-log regression needs strictly positive x and y")
    lx = np.log(xs)
    ly = np.log(ys)
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise NonPositiveData("all x values coincide; slope undefined")
    slope = float(dx @ (ly - ly.mean()) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    m = len(pts)
    var = float(resid @ resid) / (m - 2) if m > 2 else 0.0
    stderr = math.sqrt(max(var, 0.0) / sxx)
    return PowerLawFit(slope=slope, intercept=intercept, stderr=stderr)
