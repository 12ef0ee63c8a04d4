"""Steady-state identities a stationary run must satisfy.

In steady state the drift of the total queue, and of the schedule weight
over reconfiguration cycles, both vanish.  That pins down exact relations
between unused service, the fraction of time in reconfiguration, the
expected schedule duration and the threshold values at reconfiguration
instants.  This script runs a mid-size simulation and prints the identity
report the `switchsim check` command produces.

Takes about half a minute.  Run:  python demos/04_steady_state_identities.py
"""

from switchsim import AdaptivePolicy, SimConfig, run, run_identity_suite, uniform_traffic

cfg = SimConfig(
    n=4,
    traffic=uniform_traffic(4, 0.08),
    delta_r=20,
    policy=AdaptivePolicy(gamma=0.1, delta=0.2),
    horizon=8_000_000,
    warmup=1_000_000,
    seed=11,
)
print(f"simulating {cfg.horizon:,} slots: n=4, load {1 - cfg.traffic.epsilon}, "
      f"delay {cfg.delta_r}, {cfg.policy.describe()} ...")
stats = run(cfg)

print(f"\nmean total queue   {stats.mean_total_q:10.1f}  "
      f"[{stats.ci_total_q[0]:.1f}, {stats.ci_total_q[1]:.1f}]")
print(f"Pr(r > 0)          {stats.p_reconfig:10.5f}  (must stay below eps = "
      f"{stats.epsilon})")
print(f"mean duration      {stats.mean_duration:10.2f}  over {stats.duration_count} cycles")
print(f"mean g(W*)         {stats.mean_gW:10.2f}  overshoot {stats.mean_deltaW_overshoot:.2f}")
print(f"alpha estimate     {stats.alpha_hat:10.4f}  (exactly 1 under uniform rates)")

print("\nidentity checks:")
for rep in run_identity_suite(stats):
    mark = {True: "PASS", False: "FAIL", None: "  --"}[rep.passed]
    print(f"  [{mark}] {rep.name}: lhs={rep.lhs:.5g} rhs={rep.rhs:.5g} "
          f"(se {rep.se:.2g}, {rep.status})")
