"""Seeded random substreams and integer arrival samplers.

Every queue (i, j) owns an independent counter-based Philox 4x64 stream
keyed by (splitmix64(seed), i << 32 | j).  The key depends only on the
seed and the queue's coordinates, never on the port count or any other
parameter, so enlarging the switch or changing the policy does not shift
the draws seen by existing queues.

Arrivals are drawn by CDF inversion: one uniform per slot per queue,
mapped through a precomputed distribution table with searchsorted.  This
is exact for the supported families and consumes a fixed number of
variates, which keeps trajectories reproducible bit for bit.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.random import Generator, Philox

from .core import TrafficSpec, validate_traffic

# splitmix64 finalizer constants (Steele, Lea, Flood 2014)
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MUL1 = 0xBF58476D1CE4E5B9
_SM64_MUL2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 output function: a fixed 64-bit avalanche mix."""
    z = (x + _SM64_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SM64_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_MUL2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *indices: int) -> int:
    """Stable 64-bit seed for a (point, replication, ...) coordinate."""
    z = mix64(base)
    for k in indices:
        z = mix64(z ^ mix64(k & _MASK64))
    return z


def queue_stream(seed: int, i: int, j: int) -> Generator:
    """The Philox stream owned by queue (i, j) under this seed."""
    key = np.array([mix64(seed), (i << 32) | j], dtype=np.uint64)
    return Generator(Philox(key=key))


def poisson_cdf(lam: float, tail: float = 1e-18) -> np.ndarray:
    """CDF table of Poisson(lam) up to negligible tail mass; ends at 1.0."""
    if lam < 0:
        raise ValueError("rate must be nonnegative")
    if lam == 0.0:
        return np.array([1.0])
    cap = int(math.ceil(lam + 60.0 * math.sqrt(lam) + 60.0))
    p = math.exp(-lam)
    cdf = [p]
    k = 0
    while 1.0 - cdf[-1] > tail and k < cap:
        k += 1
        p *= lam / k
        cdf.append(cdf[-1] + p)
    out = np.minimum(np.array(cdf), 1.0)
    out[-1] = 1.0
    return out


def truncated_poisson_cdf(lam: float, a_max: int) -> np.ndarray:
    """CDF of Poisson(lam) conditioned on {0, ..., a_max}."""
    if a_max < 0:
        raise ValueError("a_max must be nonnegative")
    if lam == 0.0:
        return np.array([1.0])
    p = math.exp(-lam)
    cdf = [p]
    for k in range(1, a_max + 1):
        p *= lam / k
        cdf.append(cdf[-1] + p)
    out = np.array(cdf) / cdf[-1]
    out[-1] = 1.0
    return out


def truncated_poisson_moments(lam: float, a_max: int) -> tuple[float, float]:
    """Exact (mean, variance) of the conditioned Poisson law."""
    if lam == 0.0:
        return 0.0, 0.0
    p = math.exp(-lam)
    pmf = [p]
    for k in range(1, a_max + 1):
        p *= lam / k
        pmf.append(p)
    z = sum(pmf)
    mean = sum(k * w for k, w in enumerate(pmf)) / z
    second = sum(k * k * w for k, w in enumerate(pmf)) / z
    return mean, second - mean * mean


def _cdf_for(spec: TrafficSpec, lam: float) -> np.ndarray:
    if spec.family == "poisson":
        return poisson_cdf(lam)
    if spec.family == "bernoulli":
        return np.array([1.0 - lam, 1.0])
    if spec.family == "truncated-poisson":
        return truncated_poisson_cdf(lam, int(spec.a_max))
    raise ValueError(f"unknown arrival family {spec.family!r}")


class ArrivalStreams:
    """Per-queue substreams plus inversion tables for one traffic spec."""

    def __init__(self, spec: TrafficSpec, seed: int):
        validate_traffic(spec)
        self.spec = spec
        self.seed = seed
        self.n = spec.n
        lam = spec.lam
        self._gens = [queue_stream(seed, i, j)
                      for i in range(self.n) for j in range(self.n)]
        self._cdfs = [_cdf_for(spec, float(lam[i, j]))
                      for i in range(self.n) for j in range(self.n)]

    def sample_block(self, k: int) -> np.ndarray:
        """Next k slots of arrivals for every queue, shape (n*n, k)."""
        out = np.empty((self.n * self.n, k), dtype=np.int64)
        for e, (gen, cdf) in enumerate(zip(self._gens, self._cdfs)):
            u = gen.random(k)
            out[e] = np.searchsorted(cdf, u, side="right")
        return out

    def sample_slot(self) -> np.ndarray:
        """One slot of arrivals as an (n, n) matrix."""
        return self.sample_block(1)[:, 0].reshape(self.n, self.n)


def arrival_sample(rng: ArrivalStreams, traffic: TrafficSpec | None = None) -> np.ndarray:
    """One n x n arrival draw from per-queue substreams.

    `traffic`, when given, must be the traffic spec the streams were built
    for; the argument exists so call sites can state their intent explicitly.
    """
    if traffic is not None and traffic is not rng.spec:
        if (traffic.family != rng.spec.family
                or traffic.epsilon != rng.spec.epsilon
                or not np.array_equal(traffic.nu, rng.spec.nu)):
            raise ValueError("traffic spec does not match the streams' spec")
    return rng.sample_slot()
