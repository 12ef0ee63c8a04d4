import hashlib
import os
import pickle
from pathlib import Path

from switchsim.experiments import _spec_digest, run_sweep
from switchsim.simulate import run


def _cache_dir():
    d = os.environ.get("SWITCHSIM_TEST_CACHE")
    return Path(d) if d else None


def _cached(key: str, compute):
    """Optional on-disk memo for the long acceptance runs.

    Enabled only when SWITCHSIM_TEST_CACHE names a directory; the default
    test run always computes.  Delete the directory to invalidate.
    """
    d = _cache_dir()
    if d is None:
        return compute()
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{key}.pkl"
    if path.exists():
        with open(path, "rb") as fh:
            return pickle.load(fh)
    value = compute()
    with open(path, "wb") as fh:
        pickle.dump(value, fh)
    return value


def cached_sweep(spec, threads=2):
    return _cached("sweep_" + _spec_digest(spec), lambda: run_sweep(spec, threads=threads))


def cached_run(cfg):
    payload = repr((cfg.n, cfg.traffic.nu.tolist(), cfg.traffic.epsilon,
                    cfg.traffic.family, cfg.traffic.a_max, cfg.delta_r,
                    cfg.policy, cfg.horizon, cfg.warmup, cfg.seed,
                    cfg.sample_ssc_every, cfg.engine, cfg.batches,
                    cfg.collect_totals))
    key = "run_" + hashlib.sha256(payload.encode()).hexdigest()
    return _cached(key, lambda: run(cfg))
