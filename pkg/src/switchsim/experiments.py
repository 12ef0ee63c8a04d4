"""Sweep orchestration: runs across one axis, aggregation, exponent fits.

A sweep executes one simulation per (axis value, replication) with
independently derived seeds, collects the mean total queue with its
confidence interval at every point, and, for the scaling axes, fits the
log-log slope of mean queue against the axis value.  Runs are independent
and can execute on a process pool; everything is deterministic given the
base seed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import uniform_traffic
from .errors import ConfigInvalid
from .policies import AdaptivePolicy
from .sampling import derive_seed
from .simulate import SimConfig, run, validate_config
from .stats import PowerLawFit, fit_loglog_exponent, mean_se_ci

AXES = ("epsilon", "delta_r", "n", "rho", "delta")
_FIT_AXES = ("epsilon", "delta_r", "n")


@dataclass
class SweepSpec:
    """A base configuration swept along one axis.

    horizons / warmups, when given, override the base run length per
    point (parallel to `values`); the steady-state scale, and with it the
    transient length, can grow by orders of magnitude along a sweep.
    """

    base: SimConfig
    axis: str
    values: list
    replications: int = 1
    horizons: Optional[list] = None
    warmups: Optional[list] = None


@dataclass
class PointResult:
    value: float
    mean_total_q: float
    se: float
    ci_lo: float
    ci_hi: float
    runs: list = field(default_factory=list)     # RunStats, in memory only

    def summary(self) -> dict:
        return {
            "value": self.value,
            "mean_total_q": self.mean_total_q,
            "se": self.se,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seeds": [r.seed for r in self.runs],
            "hashes": [r.trajectory_hash for r in self.runs],
        }


@dataclass
class SweepResult:
    axis: str
    points: list
    fit: Optional[PowerLawFit]
    provenance: dict

    def as_dict(self) -> dict:
        return {
            "axis": self.axis,
            "points": [p.summary() for p in self.points],
            "fit": None if self.fit is None else {
                "slope": self.fit.slope,
                "intercept": self.fit.intercept,
                "stderr": self.fit.stderr,
            },
            "provenance": self.provenance,
        }

    def to_json(self, path=None, indent: int = 2) -> str:
        text = json.dumps(self.as_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_csv(self, path=None) -> str:
        lines = [f"{self.axis},mean_total_q,ci_lo,ci_hi"]
        for p in self.points:
            lines.append(f"{p.value!r},{p.mean_total_q!r},{p.ci_lo!r},{p.ci_hi!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _strictly_monotone(values) -> bool:
    diffs = np.diff(np.asarray(values, dtype=np.float64))
    return bool((diffs > 0).all() or (diffs < 0).all())


def point_config(base: SimConfig, axis: str, value, seed: int) -> SimConfig:
    """The base configuration moved to one sweep point."""
    if axis == "epsilon":
        traffic = dataclasses.replace(base.traffic, epsilon=float(value))
        return dataclasses.replace(base, traffic=traffic, seed=seed)
    if axis == "rho":
        traffic = dataclasses.replace(base.traffic, epsilon=1.0 - float(value))
        return dataclasses.replace(base, traffic=traffic, seed=seed)
    if axis == "delta_r":
        return dataclasses.replace(base, delta_r=int(value), seed=seed)
    if axis == "n":
        nu = base.traffic.nu
        if not np.allclose(nu, nu[0, 0]):
            raise ConfigInvalid("the port-count axis requires uniform base traffic")
        n = int(value)
        traffic = uniform_traffic(n, base.traffic.epsilon, base.traffic.family,
                                  base.traffic.a_max)
        return dataclasses.replace(base, n=n, traffic=traffic, seed=seed)
    if axis == "delta":
        if not isinstance(base.policy, AdaptivePolicy):
            raise ConfigInvalid("the delta axis requires the adaptive policy")
        policy = dataclasses.replace(base.policy, delta=float(value))
        return dataclasses.replace(base, policy=policy, seed=seed)
    raise ConfigInvalid(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def _job_config(spec: SweepSpec, i: int, k: int) -> SimConfig:
    cfg = point_config(spec.base, spec.axis, spec.values[i],
                       derive_seed(spec.base.seed, i, k))
    if spec.horizons is not None:
        cfg = dataclasses.replace(cfg, horizon=int(spec.horizons[i]))
    if spec.warmups is not None:
        cfg = dataclasses.replace(cfg, warmup=int(spec.warmups[i]))
    return cfg


def validate_sweep(spec: SweepSpec) -> None:
    if spec.axis not in AXES:
        raise ConfigInvalid(f"unknown sweep axis {spec.axis!r}; expected one of {AXES}")
    if len(spec.values) < 1:
        raise ConfigInvalid("sweep needs at least one value")
    if len(spec.values) > 1 and not _strictly_monotone(spec.values):
        raise ConfigInvalid("sweep values must be strictly monotone")
    if spec.replications < 1:
        raise ConfigInvalid("replications must be >= 1")
    for name in ("horizons", "warmups"):
        seq = getattr(spec, name)
        if seq is not None and len(seq) != len(spec.values):
            raise ConfigInvalid(f"{name} must match values in length")
    for i in range(len(spec.values)):
        validate_config(_job_config(spec, i, 0))


def _spec_digest(spec: SweepSpec) -> str:
    payload = {
        "axis": spec.axis,
        "values": list(map(float, spec.values)),
        "replications": spec.replications,
        "horizons": None if spec.horizons is None else list(map(int, spec.horizons)),
        "warmups": None if spec.warmups is None else list(map(int, spec.warmups)),
        "base": {
            "n": spec.base.n,
            "epsilon": spec.base.traffic.epsilon,
            "nu": spec.base.traffic.nu.tolist(),
            "family": spec.base.traffic.family,
            "a_max": spec.base.traffic.a_max,
            "delta_r": spec.base.delta_r,
            "policy": spec.base.policy.describe(),
            "horizon": spec.base.horizon,
            "warmup": spec.base.warmup,
            "seed": spec.base.seed,
            "sample_ssc_every": spec.base.sample_ssc_every,
            "engine": spec.base.engine,
            "batches": spec.base.batches,
        },
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def run_sweep(spec: SweepSpec, threads: int = 1,
              fit: Optional[bool] = None) -> SweepResult:
    """Execute every (point, replication) run and aggregate.

    Seeds derive from (base seed, point index, replication index), so the
    result is reproducible regardless of `threads`.  The exponent is
    fitted on the scaling axes unless `fit` overrides the choice.
    """
    validate_sweep(spec)
    jobs = []
    for i in range(len(spec.values)):
        for k in range(spec.replications):
            jobs.append(_job_config(spec, i, k))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(cfg) for cfg in jobs]

    points = []
    reps = spec.replications
    for i, v in enumerate(spec.values):
        stats = results[i * reps:(i + 1) * reps]
        if reps == 1:
            s = stats[0]
            points.append(PointResult(float(v), s.mean_total_q, s.se_total_q,
                                      s.ci_total_q[0], s.ci_total_q[1], stats))
        else:
            means = np.array([s.mean_total_q for s in stats])
            m, se, lo, hi = mean_se_ci(means)
            points.append(PointResult(float(v), m, se, lo, hi, stats))

    do_fit = fit if fit is not None else (spec.axis in _FIT_AXES and len(spec.values) >= 3)
    fit_res = None
    if do_fit:
        fit_res = fit_loglog_exponent([(p.value, p.mean_total_q) for p in points])

    from . import __version__
    provenance = {
        "config_digest": _spec_digest(spec),
        "base_seed": spec.base.seed,
        "seeds": [cfg.seed for cfg in jobs],
        "version": __version__,
    }
    return SweepResult(axis=spec.axis, points=points, fit=fit_res, provenance=provenance)
