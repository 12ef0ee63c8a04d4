"""Slot-loop simulation of a switch with schedule reconfiguration delay.

One run is strictly sequential and deterministic for a fixed seed.  Two
engines produce bit-identical trajectories:

* ``fast`` advances the system in vectorized pieces: while the schedule
  is held it evaluates whole chunks of slots at once (closed-form queue
  recursion per entry, one matrix product for all candidate matchings)
  and rolls back to the first slot whose threshold test fires; while a
  reconfiguration is in progress it advances the whole serviceless
  stretch in one step.  Nothing is approximated, the chunking only
  amortizes work.

* ``reference`` is the literal slot loop through step_dynamics and the
  policy decide functions.  It is the engine used for per-slot CSV dumps
  and for preemptive re-decision experiments, and the equivalence of the
  two engines is part of the test suite.

Event order within a slot: observe q(t), let the policy decide (only on
slots with r = 0 unless preemption is enabled), a reconfiguration takes
effect in the same slot, then arrivals and the (possibly gated) service
are applied, and finally the countdown ticks.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SwitchState, TrafficSpec, begin_reconfiguration, step_dynamics, validate_traffic
from .core import arrival_variance_total
from .errors import BadFrame, ConfigInvalid
from .geometry import cone_norms_from_sums
from .matching import (max_weight_matching, max_weight_value,
                       permutation_table, schedule_weight)
from .policies import (
    AdaptivePolicy,
    adaptive_maxweight_decide,
    fixed_frame_decide,
    maxweight_decide,
)
from .sampling import ArrivalStreams
from .stats import RunStats, batch_means, mean_se_ci

_CHUNK_MIN = 1
_CHUNK_MAX = 256
_CHUNK_GROWTH = 4
_TABLE_MAX_N = 6

WARMUP_BASE = 1_000_000


@dataclass
class SimConfig:
    """One simulation run, fully specified."""

    n: int
    traffic: TrafficSpec
    delta_r: int
    policy: object                      # AdaptivePolicy | MaxWeightPolicy | FixedFramePolicy
    horizon: int
    warmup: Optional[int] = None        # None: resolved_warmup() default
    seed: int = 0
    preempt_during_reconfig: bool = False
    sample_ssc_every: int = 100
    engine: str = "fast"
    batches: int = 30
    dump_path: Optional[str] = None     # per-slot CSV, reference engine only
    collect_totals: bool = False        # keep the per-slot queue totals in memory


def resolved_warmup(cfg: SimConfig) -> int:
    """Measurement start: the configured warmup, or the scale-aware default.

    The default is max(1e6, ceil(50 * delta_r * g^-1(1/eps))) for the
    hysteresis policy (the inverse threshold sets the steady-state queue
    scale) and 1e6 otherwise, clamped to horizon // 2 so short diagnostic
    runs remain valid.
    """
    if cfg.warmup is not None:
        return cfg.warmup
    cand = WARMUP_BASE
    if isinstance(cfg.policy, AdaptivePolicy):
        g = cfg.policy.hysteresis()
        cand = max(cand, math.ceil(50.0 * cfg.delta_r * float(g.inverse(1.0 / cfg.traffic.epsilon))))
    return min(cand, cfg.horizon // 2)


def validate_config(cfg: SimConfig) -> None:
    validate_traffic(cfg.traffic)
    if cfg.traffic.n != cfg.n:
        raise ConfigInvalid(f"traffic is {cfg.traffic.n}x{cfg.traffic.n} but n = {cfg.n}")
    if cfg.delta_r < 0:
        raise ConfigInvalid(f"delta_r must be >= 0, got {cfg.delta_r}")
    if cfg.horizon < 1:
        raise ConfigInvalid(f"horizon must be >= 1, got {cfg.horizon}")
    if cfg.warmup is not None and not (0 <= cfg.warmup < cfg.horizon):
        raise ConfigInvalid(f"warmup must lie in [0, horizon), got {cfg.warmup}")
    if cfg.sample_ssc_every < 1:
        raise ConfigInvalid("sample_ssc_every must be >= 1")
    if cfg.batches < 2:
        raise ConfigInvalid("batches must be >= 2")
    if cfg.engine not in ("fast", "reference"):
        raise ConfigInvalid(f"unknown engine {cfg.engine!r}")
    if cfg.preempt_during_reconfig and cfg.engine != "reference":
        raise ConfigInvalid("preempt_during_reconfig requires the reference engine")
    if cfg.dump_path is not None and cfg.engine != "reference":
        raise ConfigInvalid("per-slot dumps require the reference engine")
    kind = getattr(cfg.policy, "kind", None)
    if kind not in ("adaptive", "maxweight", "fixed_frame"):
        raise ConfigInvalid(f"unknown policy {cfg.policy!r}")
    if kind == "fixed_frame":
        if cfg.policy.frame_len <= cfg.delta_r:
            raise BadFrame(
                f"frame_len = {cfg.policy.frame_len} must exceed delta_r = {cfg.delta_r}")
        cfg.policy.resolved_rotation(cfg.n)
    if kind == "adaptive":
        cfg.policy.hysteresis()


def _policy_descr(cfg: SimConfig) -> dict:
    kind = cfg.policy.kind
    d = {"policy": cfg.policy.describe(), "gamma": None, "delta": None, "frame_len": None}
    if kind == "adaptive":
        d["gamma"] = cfg.policy.gamma
        d["delta"] = cfg.policy.delta
    elif kind == "fixed_frame":
        d["frame_len"] = cfg.policy.frame_len
    return d


class _Acc:
    """Streaming accumulator shared by both engines."""

    def __init__(self, cfg: SimConfig, warmup: int):
        self.cfg = cfg
        self.n = cfg.n
        self.n2 = cfg.n * cfg.n
        self.warmup = warmup
        self.horizon = cfg.horizon
        self.span = cfg.horizon - warmup
        self.B = cfg.batches
        self.stride = cfg.sample_ssc_every
        B = self.B
        self.bsum_q = np.zeros(B)
        self.bsum_u = np.zeros(B)
        self.bsum_r = np.zeros(B)
        self.bcnt = np.zeros(B, dtype=np.int64)
        self.wsum = np.zeros(10)
        self.wcnt = np.zeros(10, dtype=np.int64)
        self.v1 = 0.0
        self.v2 = 0.0
        self.v3 = 0.0
        self.rpos_total = 0
        self.rpos_measured = 0
        self.served_total = np.zeros(self.n2, dtype=np.int64)
        self.arrivals_total = np.zeros(self.n2, dtype=np.int64)
        self.sumq_first: Optional[int] = None
        self.sumq_end = 0
        self.measured = 0
        self.inst_t: list[int] = []
        self.inst_wstar: list[float] = []
        self.inst_g: list[float] = []
        self.inst_dov: list[float] = []
        self.inst_sumq: list[int] = []
        self.inst_nus: list[float] = []
        self.inst_perm: list[tuple] = []
        self.ssc_rows: list[np.ndarray] = []
        self.ssc_cols: list[np.ndarray] = []
        self.ssc_sq: list[np.ndarray] = []
        self.hash = hashlib.blake2b(digest_size=16)
        self.totals_parts: Optional[list] = [] if cfg.collect_totals else None

    def slots(self, t0: int, obs: np.ndarray, end_totals: np.ndarray, rpos: bool,
              unused: Optional[np.ndarray] = None, served: Optional[np.ndarray] = None,
              arrivals: Optional[np.ndarray] = None) -> None:
        """Account a contiguous block of slots sharing one r>0/r=0 phase.

        obs[:, c] is q(t0 + c) as observed by the policy; end_totals[c] is
        the total queue after slot t0 + c completed.
        """
        C = obs.shape[1]
        end_totals = np.asarray(end_totals, dtype=np.int64)
        self.hash.update(end_totals.tobytes())
        self.sumq_end = int(end_totals[-1])
        if self.totals_parts is not None:
            self.totals_parts.append(end_totals.copy())
        if rpos:
            self.rpos_total += C
        # the measured part is always the contiguous suffix t >= warmup
        off = max(0, self.warmup - t0)
        if off >= C:
            return
        k = C - off
        obs = obs[:, off:]
        obs3 = obs.reshape(self.n, self.n, k)
        rows = obs3.sum(axis=1)
        cols = obs3.sum(axis=0)
        obs_tot = rows.sum(axis=0)
        rel = np.arange(t0 + off - self.warmup, t0 + off - self.warmup + k)
        idx = (rel * self.B) // self.span
        obs_f = obs_tot.astype(np.float64)
        self.bsum_q += np.bincount(idx, weights=obs_f, minlength=self.B)
        self.bcnt += np.bincount(idx, minlength=self.B)
        widx = (rel * 10) // self.span
        self.wsum += np.bincount(widx, weights=obs_f, minlength=10)
        self.wcnt += np.bincount(widx, minlength=10)
        if unused is not None:
            u_tot = unused[:, off:].sum(axis=0)
            self.bsum_u += np.bincount(idx, weights=u_tot.astype(np.float64),
                                       minlength=self.B)
        if rpos:
            self.bsum_r += np.bincount(idx, minlength=self.B).astype(np.float64)
            self.rpos_measured += k
        self.v1 += float((rows.astype(np.float64) ** 2).sum())
        self.v2 += float((cols.astype(np.float64) ** 2).sum())
        self.v3 += float((obs_f ** 2).sum())
        if served is not None:
            self.served_total += served[:, off:].sum(axis=1)
        if arrivals is not None:
            self.arrivals_total += arrivals[:, off:].sum(axis=1)
        if self.sumq_first is None:
            self.sumq_first = int(obs_tot[0])
        self.measured += k
        ssc_sel = np.flatnonzero(rel % self.stride == 0)
        if ssc_sel.size:
            self.ssc_rows.append(rows[:, ssc_sel].astype(np.float64))
            self.ssc_cols.append(cols[:, ssc_sel].astype(np.float64))
            self.ssc_sq.append((obs[:, ssc_sel].astype(np.float64) ** 2).sum(axis=0))

    def instant(self, t: int, w_star: float, g_val: float, dov: float,
                sum_q: int, nu_dot_s: float, perm: tuple) -> None:
        self.inst_t.append(t)
        self.inst_wstar.append(w_star)
        self.inst_g.append(g_val)
        self.inst_dov.append(dov)
        self.inst_sumq.append(sum_q)
        self.inst_nus.append(nu_dot_s)
        self.inst_perm.append(perm)

    def finalize(self, cfg: SimConfig, warmup: int, engine: str) -> RunStats:
        B = self.B
        nz = self.bcnt > 0
        bm_q = self.bsum_q[nz] / self.bcnt[nz]
        bm_u = self.bsum_u[nz] / self.bcnt[nz]
        bm_r = self.bsum_r[nz] / self.bcnt[nz]
        mean_q = float(self.bsum_q.sum() / self.measured)
        mean_u = float(self.bsum_u.sum() / self.measured)
        p_rec = float(self.bsum_r.sum() / self.measured)
        _, se_q, lo_q, hi_q = mean_se_ci(bm_q)
        _, se_u, _, _ = mean_se_ci(bm_u)
        _, se_r, _, _ = mean_se_ci(bm_r)

        t_arr = np.array(self.inst_t, dtype=np.int64)
        wstar_arr = np.array(self.inst_wstar, dtype=np.float64)
        g_arr = np.array(self.inst_g, dtype=np.float64)
        dov_arr = np.array(self.inst_dov, dtype=np.float64)
        sumq_arr = np.array(self.inst_sumq, dtype=np.float64)
        nus_arr = np.array(self.inst_nus, dtype=np.float64)
        perm_arr = (np.array(self.inst_perm, dtype=np.int64)
                    if self.inst_perm else np.zeros((0, self.n), dtype=np.int64))

        if not cfg.preempt_during_reconfig:
            owed = np.minimum(cfg.delta_r, cfg.horizon - t_arr).sum() if t_arr.size else 0
            assert self.rpos_total == int(owed), \
                f"reconfiguration bookkeeping out of balance: {self.rpos_total} != {int(owed)}"

        m = t_arr >= warmup
        t_m = t_arr[m]
        durations = np.diff(t_m).astype(np.float64)
        alpha_hat = float(nus_arr[m].mean()) if m.any() else math.nan

        batch_series: dict[str, np.ndarray] = {
            "total_q": bm_q, "unused": bm_u, "r_pos": bm_r,
        }
        mean_dur = se_dur = math.nan
        mean_gw = se_gw = math.nan
        mean_dov = se_dov = math.nan
        mean_dmp = se_dmp = math.nan
        mean_qr = se_qr = math.nan
        if m.any():
            bm = batch_means(sumq_arr[m], B)
            mean_qr, se_qr, _, _ = mean_se_ci(bm)
            batch_series["q_at_reconfig"] = bm
        if np.isfinite(g_arr[m]).all() and m.any():
            bm = batch_means(g_arr[m], B)
            mean_gw, se_gw, _, _ = mean_se_ci(bm)
            batch_series["g_w"] = bm
            bm = batch_means(dov_arr[m], B)
            mean_dov, se_dov, _, _ = mean_se_ci(bm)
            batch_series["delta_w_over"] = bm
        if durations.size:
            bm = batch_means(durations, B)
            mean_dur, se_dur, _, _ = mean_se_ci(bm)
            batch_series["duration"] = bm
            jump = (g_arr[m] + dov_arr[m])[1:]
            if np.isfinite(jump).all() and not math.isnan(alpha_hat) and alpha_hat < self.n:
                pred = jump / ((self.n - alpha_hat) * (1.0 - cfg.traffic.epsilon))
                d = durations - pred
                bm = batch_means(d, B)
                mean_dmp, se_dmp, _, _ = mean_se_ci(bm)
                batch_series["dur_minus_pred"] = bm

        ssc_n = 0
        mean_perp = se_perp = mean_par = se_par = mean_norm = se_norm = math.nan
        if self.ssc_rows:
            rows = np.concatenate(self.ssc_rows, axis=1).T
            cols = np.concatenate(self.ssc_cols, axis=1).T
            sq = np.concatenate(self.ssc_sq)
            ssc_n = rows.shape[0]
            par, perp = cone_norms_from_sums(rows, cols, sq)
            qn = np.sqrt(sq)
            bm = batch_means(perp, B)
            mean_perp, se_perp, _, _ = mean_se_ci(bm)
            batch_series["q_perp"] = bm
            bm = batch_means(par, B)
            mean_par, se_par, _, _ = mean_se_ci(bm)
            batch_series["q_par"] = bm
            bm = batch_means(qn, B)
            mean_norm, se_norm, _, _ = mean_se_ci(bm)
            batch_series["q_norm"] = bm

        v1m = self.v1 / self.measured
        v2m = self.v2 / self.measured
        v3m = self.v3 / self.measured

        descr = _policy_descr(cfg)
        slot_totals = (np.concatenate(self.totals_parts)
                       if self.totals_parts is not None else None)
        stats = RunStats(
            n=self.n, epsilon=cfg.traffic.epsilon, delta_r=cfg.delta_r,
            policy=descr["policy"], gamma=descr["gamma"], delta=descr["delta"],
            frame_len=descr["frame_len"], family=cfg.traffic.family,
            a_max=cfg.traffic.a_max, horizon=cfg.horizon, warmup=warmup,
            seed=cfg.seed, sample_ssc_every=cfg.sample_ssc_every, engine=engine,
            batches=B,
            measured_slots=self.measured,
            mean_total_q=mean_q, se_total_q=se_q, ci_total_q=(lo_q, hi_q),
            mean_unused=mean_u, se_unused=se_u,
            p_reconfig=p_rec, se_p_reconfig=se_r,
            mean_v1=v1m, mean_v2=v2m, mean_v3=v3m, mean_v4=v1m + v2m - v3m / self.n,
            window_means=list(np.divide(self.wsum, np.maximum(self.wcnt, 1))),
            r_pos_slots_measured=self.rpos_measured, r_pos_slots_total=self.rpos_total,
            reconfig_count_measured=int(m.sum()), reconfig_count_total=len(self.inst_t),
            mean_duration=mean_dur, se_duration=se_dur, duration_count=durations.size,
            mean_gW=mean_gw, se_gW=se_gw,
            mean_deltaW_overshoot=mean_dov, se_deltaW=se_dov,
            mean_dur_minus_pred=mean_dmp, se_dur_minus_pred=se_dmp,
            mean_total_q_at_reconfig=mean_qr, se_q_at_reconfig=se_qr,
            alpha_hat=alpha_hat,
            ssc_samples=ssc_n,
            mean_q_perp=mean_perp, se_q_perp=se_perp,
            mean_q_par=mean_par, se_q_par=se_par,
            mean_q_norm=mean_norm, se_q_norm=se_norm,
            arrival_total_var=arrival_variance_total(cfg.traffic),
            sumq_first_measured=self.sumq_first or 0, sumq_end=self.sumq_end,
            served_total=self.served_total.tolist(),
            arrivals_total=self.arrivals_total.tolist(),
            trajectory_hash=self.hash.hexdigest(),
            batch_series={k: np.asarray(v) for k, v in batch_series.items()},
            slot_totals=slot_totals,
            instants={"t": t_arr, "w_star": wstar_arr, "g": g_arr, "delta_w_over": dov_arr,
                      "sum_q": sumq_arr, "nu_dot_s": nus_arr, "perm": perm_arr},
        )
        return stats


class _ArrivalBuffer:
    """Look-ahead window over the per-queue arrival streams."""

    def __init__(self, streams: ArrivalStreams, min_block: int = 2048):
        self._streams = streams
        self._min_block = min_block
        self._buf = np.zeros((streams.n * streams.n, 0), dtype=np.int64)
        self._off = 0

    def _ensure(self, k: int) -> None:
        avail = self._buf.shape[1] - self._off
        if avail >= k:
            return
        fresh = self._streams.sample_block(max(k - avail, self._min_block))
        self._buf = np.concatenate([self._buf[:, self._off:], fresh], axis=1)
        self._off = 0

    def peek(self, k: int) -> np.ndarray:
        self._ensure(k)
        return self._buf[:, self._off:self._off + k]

    def consume(self, k: int) -> None:
        self._off += k

    def take(self, k: int) -> np.ndarray:
        out = self.peek(k)
        self.consume(k)
        return out


class _ChunkMatcher:
    """Per-slot best matchings for a whole chunk of observed queue states."""

    def __init__(self, n: int):
        self.n = n
        if n <= _TABLE_MAX_N:
            self.table, self.perms = permutation_table(n)
        else:
            self.table = None

    def wstar(self, obs: np.ndarray) -> tuple[np.ndarray, object]:
        if self.table is not None:
            pw = self.table @ obs
            picks = pw.argmax(axis=0)           # first argmax = lexicographic tie-break
            w = pw[picks, np.arange(obs.shape[1])]
            return w, picks
        # large n: dual potentials give the weight per slot; the schedule
        # itself is extracted only for the one slot that triggers
        weights = np.array([max_weight_value(obs[:, c].reshape(self.n, self.n))
                            for c in range(obs.shape[1])], dtype=np.int64)
        return weights, obs

    def schedule_at(self, picks, c: int) -> tuple[np.ndarray, tuple]:
        if self.table is not None:
            perm = self.perms[int(picks[c])]
        else:
            perm = max_weight_matching(picks[:, c].reshape(self.n, self.n)).perm
        flat = np.zeros(self.n * self.n, dtype=np.int64)
        for i, j in enumerate(perm):
            flat[i * self.n + j] = 1
        return flat, tuple(perm)


def run(config: SimConfig) -> RunStats:
    """Simulate `horizon` slots and return the populated statistics."""
    validate_config(config)
    warmup = resolved_warmup(config)
    if warmup >= config.horizon:
        raise ConfigInvalid(f"warmup {warmup} must stay below horizon {config.horizon}")
    if config.engine == "reference":
        return _run_reference(config, warmup)
    return _run_fast(config, warmup)


def _run_fast(cfg: SimConfig, warmup: int) -> RunStats:
    n, n2 = cfg.n, cfg.n * cfg.n
    horizon, delta_r = cfg.horizon, cfg.delta_r
    kind = cfg.policy.kind
    streams = ArrivalStreams(cfg.traffic, cfg.seed)
    buf = _ArrivalBuffer(streams)
    acc = _Acc(cfg, warmup)
    nu_flat = cfg.traffic.nu.ravel()

    q = np.zeros(n2, dtype=np.int64)
    s_flat = max_weight_matching(q.reshape(n, n)).schedule.ravel()
    sv = np.flatnonzero(s_flat)
    g = cfg.policy.hysteresis() if kind == "adaptive" else None
    matcher = _ChunkMatcher(n) if kind in ("adaptive", "maxweight") else None
    if kind == "fixed_frame":
        frame_len = cfg.policy.frame_len
        rot_flats = [s.ravel().astype(np.int64) for s in cfg.policy.resolved_rotation(n)]

    def apply_reconfig_slot(t_abs: int, obs_col: np.ndarray, a_col: np.ndarray,
                            new_flat: np.ndarray) -> tuple[np.ndarray, int]:
        """Process the slot on which a reconfiguration takes effect."""
        if delta_r == 0:
            before = obs_col + a_col
            u = ((new_flat == 1) & (before == 0)).astype(np.int64)
            served = new_flat - u
            end = before - served
            acc.slots(t_abs, obs_col[:, None], np.array([end.sum()]), rpos=False,
                      unused=u[:, None], served=served[:, None], arrivals=a_col[:, None])
            return end, 0
        end = obs_col + a_col
        acc.slots(t_abs, obs_col[:, None], np.array([end.sum()]), rpos=True,
                  arrivals=a_col[:, None])
        return end, delta_r - 1

    t = 0
    r = 0
    chunk = _CHUNK_MIN
    while t < horizon:
        if r > 0:
            m = min(r, horizon - t)
            A = buf.take(m)
            X = np.cumsum(A, axis=1)
            obs = q[:, None] + np.concatenate(
                [np.zeros((n2, 1), dtype=np.int64), X[:, :m - 1]], axis=1)
            end_tot = int(q.sum()) + X.sum(axis=0)
            acc.slots(t, obs, end_tot, rpos=True, arrivals=A)
            q = q + X[:, -1]
            t += m
            r -= m
            continue

        if kind == "fixed_frame":
            off = t % frame_len
            if off == 0:
                new_flat = rot_flats[(t // frame_len) % len(rot_flats)]
                a_col = buf.take(1)[:, 0]
                acc.instant(t, math.nan, math.nan, math.nan, int(q.sum()),
                            float(nu_flat @ new_flat),
                            tuple(int(x) for x in new_flat.reshape(n, n).argmax(axis=1)))
                q, r = apply_reconfig_slot(t, q, a_col, new_flat)
                s_flat = new_flat
                sv = np.flatnonzero(s_flat)
                t += 1
                continue
            C = min(chunk, horizon - t, frame_len - off)
        else:
            C = min(chunk, horizon - t)

        A = buf.peek(C)
        X = np.cumsum(A, axis=1)
        end = q[:, None] + X
        S = X[sv] - np.arange(1, C + 1, dtype=np.int64)
        M = np.maximum.accumulate(-S, axis=1)
        end[sv] = S + np.maximum(q[sv][:, None], M)
        obs = np.concatenate([q[:, None], end[:, :C - 1]], axis=1)

        tau = -1
        if matcher is not None:
            w_star, picks = matcher.wstar(obs)
            w_cur = s_flat @ obs
            d_w = w_star - w_cur
            if kind == "adaptive":
                thr = np.asarray(g(w_star.astype(np.float64)))
                mask = d_w > thr
            else:
                thr = np.zeros(C)
                mask = d_w > 0
            if mask.any():
                tau = int(mask.argmax())

        if tau < 0:
            u_sv = ((obs[sv] + A[sv]) == 0).astype(np.int64)
            unused = np.zeros((n2, C), dtype=np.int64)
            unused[sv] = u_sv
            served = np.zeros((n2, C), dtype=np.int64)
            served[sv] = 1 - u_sv
            acc.slots(t, obs, end.sum(axis=0), rpos=False,
                      unused=unused, served=served, arrivals=A)
            q = end[:, -1].copy()
            buf.consume(C)
            t += C
            chunk = min(chunk * _CHUNK_GROWTH, _CHUNK_MAX)
            continue

        if tau > 0:
            u_sv = ((obs[sv, :tau] + A[sv, :tau]) == 0).astype(np.int64)
            unused = np.zeros((n2, tau), dtype=np.int64)
            unused[sv] = u_sv
            served = np.zeros((n2, tau), dtype=np.int64)
            served[sv] = 1 - u_sv
            acc.slots(t, obs[:, :tau], end[:, :tau].sum(axis=0), rpos=False,
                      unused=unused, served=served, arrivals=A[:, :tau])
        obs_col = obs[:, tau].copy()
        a_col = A[:, tau].copy()
        new_flat, perm = matcher.schedule_at(picks, tau)
        g_val = float(thr[tau])
        acc.instant(t + tau, float(w_star[tau]), g_val, float(d_w[tau]) - g_val,
                    int(obs_col.sum()), float(nu_flat @ new_flat), perm)
        buf.consume(tau + 1)
        q, r = apply_reconfig_slot(t + tau, obs_col, a_col, new_flat)
        s_flat = new_flat
        sv = np.flatnonzero(s_flat)
        t += tau + 1
        chunk = _CHUNK_MIN

    return acc.finalize(cfg, warmup, "fast")


def _run_reference(cfg: SimConfig, warmup: int) -> RunStats:
    n = cfg.n
    kind = cfg.policy.kind
    streams = ArrivalStreams(cfg.traffic, cfg.seed)
    acc = _Acc(cfg, warmup)
    nu = cfg.traffic.nu
    g = cfg.policy.hysteresis() if kind == "adaptive" else None
    if kind == "fixed_frame":
        frame_len = cfg.policy.frame_len
        rotation = cfg.policy.resolved_rotation(n)

    q0 = np.zeros((n, n), dtype=np.int64)
    state = SwitchState(q0, max_weight_matching(q0).schedule, 0, 0, -1)
    dump = open(cfg.dump_path, "w") if cfg.dump_path else None
    if dump:
        dump.write("slot,total_q,w,w_star,r_positive,reconfigured\n")
    try:
        for t in range(cfg.horizon):
            reconfigured = False
            if state.r == 0 or cfg.preempt_during_reconfig:
                if kind == "adaptive":
                    dec = adaptive_maxweight_decide(state.q, state.s, g)
                elif kind == "maxweight":
                    dec = maxweight_decide(state.q, state.s)
                else:
                    dec = fixed_frame_decide(t, frame_len, rotation, cfg.delta_r)
                if dec.reconfigure:
                    reconfigured = True
                    new_s = dec.new_schedule
                    if kind == "fixed_frame":
                        acc.instant(t, math.nan, math.nan, math.nan, int(state.q.sum()),
                                    float((nu * new_s).sum()),
                                    tuple(int(x) for x in new_s.argmax(axis=1)))
                    else:
                        acc.instant(t, float(dec.w_star), float(dec.threshold),
                                    float(dec.delta_w) - float(dec.threshold),
                                    int(state.q.sum()), float((nu * new_s).sum()),
                                    tuple(int(x) for x in new_s.argmax(axis=1)))
                    if cfg.delta_r == 0:
                        state = SwitchState(state.q, new_s, 0, state.t, t)
                    elif state.r > 0:   # preemptive restart
                        state = SwitchState(state.q, new_s, cfg.delta_r, state.t, t)
                    else:
                        state = begin_reconfiguration(state, new_s, cfg.delta_r)
            rpos = state.r > 0
            pre_q = state.q
            a = streams.sample_slot()
            nxt, out = step_dynamics(state, a)
            acc.slots(t, pre_q.reshape(-1, 1), np.array([nxt.q.sum()]), rpos=rpos,
                      unused=out.unused.reshape(-1, 1), served=out.served.reshape(-1, 1),
                      arrivals=a.reshape(-1, 1))
            if dump:
                w = schedule_weight(pre_q, state.s)
                w_star = max_weight_matching(pre_q).weight
                dump.write(f"{t},{int(pre_q.sum())},{w},{w_star},{int(rpos)},{int(reconfigured)}\n")
            state = nxt
    finally:
        if dump:
            dump.close()
    return acc.finalize(cfg, warmup, "reference")
