"""Command-line interface.

    switchsim run    --config cfg.toml [--out DIR] [--seed N]
    switchsim sweep  --config cfg.toml [--out DIR] [--seed N] [--threads N] [--plot]
    switchsim check  --run run.json [--out DIR] [--strict]
    switchsim oracle [--trials N] [--seed N] [--strict]

Exit codes: 0 success, 1 configuration or usage error, 2 failed check
under --strict.  The config file is TOML; see README for the schema.

Environment overrides (applied when the flag is absent): SWITCHSIM_SEED,
SWITCHSIM_THREADS, SWITCHSIM_OUT.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib

from .core import TrafficSpec, uniform_traffic
from .errors import SwitchSimError
from .experiments import SweepSpec, run_sweep
from .geometry import project_cone, project_cone_enumeration, project_subspace
from .matching import brute_force_matching, max_weight_matching
from .policies import AdaptivePolicy, FixedFramePolicy, MaxWeightPolicy
from .simulate import SimConfig, run
from .stats import RunStats, run_identity_suite


class CliError(Exception):
    pass


def _load_toml(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise CliError(f"config file not found: {path}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"config file {path} is not valid TOML: {exc}") from exc


def _build_traffic(d: dict) -> TrafficSpec:
    n = int(d.get("n", 0))
    if n < 2:
        raise CliError("config needs n >= 2 in [run]")
    if "epsilon" in d:
        eps = float(d["epsilon"])
    elif "rho" in d:
        eps = 1.0 - float(d["rho"])
    else:
        raise CliError("config needs epsilon (or rho) in [run]")
    family = d.get("family", "poisson")
    a_max = int(d["a_max"]) if "a_max" in d else None
    kind = d.get("traffic", "uniform")
    if kind == "uniform":
        return uniform_traffic(n, eps, family, a_max)
    if kind == "identity":
        return TrafficSpec(np.eye(n), eps, family, a_max)
    raise CliError(f"unknown traffic kind {kind!r} (uniform or identity)")


def _build_policy(d: dict):
    kind = d.get("policy", "adaptive")
    if kind == "adaptive":
        return AdaptivePolicy(gamma=float(d.get("gamma", 0.1)),
                              delta=float(d.get("delta", 0.2)))
    if kind == "maxweight":
        return MaxWeightPolicy()
    if kind == "fixed_frame":
        if "frame_len" not in d:
            raise CliError("fixed_frame policy needs frame_len")
        return FixedFramePolicy(frame_len=int(d["frame_len"]))
    raise CliError(f"unknown policy {kind!r}")


def _build_sim_config(d: dict, seed_override=None) -> SimConfig:
    if "horizon" not in d:
        raise CliError("config needs horizon in [run]")
    return SimConfig(
        n=int(d["n"]),
        traffic=_build_traffic(d),
        delta_r=int(d.get("delta_r", 0)),
        policy=_build_policy(d),
        horizon=int(d["horizon"]),
        warmup=int(d["warmup"]) if "warmup" in d else None,
        seed=int(seed_override if seed_override is not None else d.get("seed", 0)),
        preempt_during_reconfig=bool(d.get("preempt_during_reconfig", False)),
        sample_ssc_every=int(d.get("sample_ssc_every", 100)),
        engine=d.get("engine", "fast"),
        batches=int(d.get("batches", 30)),
        dump_path=d.get("dump") or None,
    )


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args) -> int:
    doc = _load_toml(args.config)
    cfg = _build_sim_config(doc.get("run", doc), args.seed)
    stats = run(cfg)
    out = _out_dir(args)
    stats.to_json(out / "run.json")
    with open(out / "run.csv", "w") as fh:
        fh.write("n,epsilon,delta_r,policy,mean_total_q,ci_lo,ci_hi,p_reconfig,mean_duration\n")
        fh.write(f"{stats.n},{stats.epsilon!r},{stats.delta_r},{stats.policy},"
                 f"{stats.mean_total_q!r},{stats.ci_total_q[0]!r},{stats.ci_total_q[1]!r},"
                 f"{stats.p_reconfig!r},{stats.mean_duration!r}\n")
    print(f"run: n={stats.n} eps={stats.epsilon} delta_r={stats.delta_r} {stats.policy}")
    print(f"  mean total queue = {stats.mean_total_q:.3f} "
          f"[{stats.ci_total_q[0]:.3f}, {stats.ci_total_q[1]:.3f}]")
    print(f"  Pr(r>0) = {stats.p_reconfig:.5f}  mean duration = {stats.mean_duration:.2f}")
    print(f"  wrote {out / 'run.json'} and {out / 'run.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    doc = _load_toml(args.config)
    if "sweep" not in doc:
        raise CliError(f"config file {args.config} has no [sweep] table")
    base = _build_sim_config(doc.get("run", {}), args.seed)
    sw = doc["sweep"]
    if "axis" not in sw or "values" not in sw:
        raise CliError("[sweep] needs axis and values")
    spec = SweepSpec(base=base, axis=str(sw["axis"]), values=list(sw["values"]),
                     replications=int(sw.get("replications", 1)))
    result = run_sweep(spec, threads=max(1, args.threads))
    out = _out_dir(args)
    result.to_csv(out / "sweep.csv")
    result.to_json(out / "sweep.json")
    for p in result.points:
        print(f"  {spec.axis} = {p.value:g}: mean total queue = {p.mean_total_q:.3f} "
              f"[{p.ci_lo:.3f}, {p.ci_hi:.3f}]")
    if result.fit is not None:
        print(f"  fitted log-log slope = {result.fit.slope:.4f} "
              f"+/- {result.fit.stderr:.4f}")
    if args.plot:
        _render_plot(result, out / "sweep.png")
    print(f"  wrote {out / 'sweep.csv'} and {out / 'sweep.json'}")
    return 0


def _render_plot(result, path) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("  matplotlib not available; skipping plot")
        return
    xs = [p.value for p in result.points]
    ys = [p.mean_total_q for p in result.points]
    lo = [p.mean_total_q - p.ci_lo for p in result.points]
    hi = [p.ci_hi - p.mean_total_q for p in result.points]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", capsize=3)
    if result.fit is not None:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_title(f"slope = {result.fit.slope:.3f} +/- {result.fit.stderr:.3f}")
    ax.set_xlabel(result.axis)
    ax.set_ylabel("mean total queue")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print(f"  wrote {path}")


def _cmd_check(args) -> int:
    p = Path(args.run)
    if not p.exists():
        raise CliError(f"run file not found: {args.run}")
    stats = RunStats.from_json(p)
    reports = run_identity_suite(stats)
    payload = [r.to_dict() for r in reports]
    if args.out:
        out = _out_dir(args)
        with open(out / "check.json", "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"wrote {out / 'check.json'}")
    failed = 0
    for r in reports:
        mark = {True: "PASS", False: "FAIL", None: "--"}[r.passed]
        print(f"  [{mark:4s}] {r.name}: lhs={r.lhs:.6g} rhs={r.rhs:.6g} se={r.se:.3g} ({r.status})")
        failed += r.passed is False
    if failed and args.strict:
        return 2
    return 0


def _cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed)
    trials = args.trials
    ok = True

    bad = 0
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        q = rng.integers(0, 1000, size=(n, n)).astype(np.int64)
        a = max_weight_matching(q)
        b = brute_force_matching(q)
        bad += (a.weight != b.weight) or (a.perm != b.perm)
    print(f"  [{'PASS' if bad == 0 else 'FAIL'}] matching vs enumeration: "
          f"{trials - bad}/{trials} agree")
    ok &= bad == 0

    bad = 0
    for _ in range(trials):
        q = rng.uniform(-25, 25, size=(3, 3))
        dec = project_cone(q)
        ora = project_cone_enumeration(q)
        bad += not np.allclose(dec.q_par, ora.q_par, atol=1e-6)
    print(f"  [{'PASS' if bad == 0 else 'FAIL'}] cone projection vs active-set oracle: "
          f"{trials - bad}/{trials} agree")
    ok &= bad == 0

    bad = 0
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        q = rng.uniform(5, 50, size=(n, n)) + 40.0
        dec = project_cone(q)
        if (dec.row_weights > 1e-9).all() and (dec.col_weights > 1e-9).all():
            bad += not np.allclose(dec.q_par, project_subspace(q), atol=1e-7)
    print(f"  [{'PASS' if bad == 0 else 'FAIL'}] unclipped cone projection matches "
          f"subspace form")
    ok &= bad == 0

    if not ok and args.strict:
        return 2
    return 0


def cli_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="switchsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one configuration")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--plot", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="identity checks on a finished run")
    p_check.add_argument("--run", required=True)
    p_check.add_argument("--out", default=None)
    p_check.add_argument("--strict", action="store_true")
    p_check.set_defaults(func=_cmd_check)

    p_oracle = sub.add_parser("oracle", help="matching/projection oracle self-tests")
    p_oracle.add_argument("--trials", type=int, default=200)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--strict", action="store_true")
    p_oracle.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    _apply_env_overrides(args)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SwitchSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _apply_env_overrides(args) -> None:
    """Fill unset options from SWITCHSIM_* environment variables."""
    if getattr(args, "seed", None) is None and os.environ.get("SWITCHSIM_SEED"):
        args.seed = int(os.environ["SWITCHSIM_SEED"])
    if getattr(args, "out", None) is None and os.environ.get("SWITCHSIM_OUT"):
        args.out = os.environ["SWITCHSIM_OUT"]
    if getattr(args, "threads", None) == 1 and os.environ.get("SWITCHSIM_THREADS"):
        args.threads = int(os.environ["SWITCHSIM_THREADS"])


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
