"""Discrete-time input-queued switch simulation with reconfiguration delay.

Modules:
    core         queue/schedule/state types and the single-slot update
    matching     exact maximum-weight matching plus the enumeration oracle
    policies     hysteresis scheduling, plain best-matching, fixed frames
    geometry     row/column cone projections and quadratic functionals
    sampling     seeded per-queue substreams and arrival samplers
    simulate     the slot-loop engines and run statistics collection
    stats        batch-means estimators and steady-state identity checks
    experiments  parameter sweeps and scaling-exponent fits
    cli          command-line entry points (run, sweep, check, oracle)
"""

__version__ = "0.1.0"

from .core import (
    SlotOutcome,
    SwitchState,
    TrafficSpec,
    begin_reconfiguration,
    identity_schedule,
    permutation_schedule,
    step_dynamics,
    uniform_traffic,
    validate_queue_matrix,
    validate_schedule,
    validate_traffic,
)
from .errors import SwitchSimError
from .geometry import (
    ConeDecomposition,
    LyapunovValues,
    lyapunov_values,
    project_cone,
    project_cone_enumeration,
    project_subspace,
)
from .matching import (
    MatchResult,
    brute_force_matching,
    max_weight_matching,
    schedule_weight,
)
from .policies import (
    AdaptivePolicy,
    FixedFramePolicy,
    HysteresisFn,
    MaxWeightPolicy,
    PolicyDecision,
    adaptive_maxweight_decide,
    cyclic_rotation,
    fixed_frame_decide,
    maxweight_decide,
)
from .sampling import ArrivalStreams, arrival_sample, derive_seed
from .simulate import SimConfig, resolved_warmup, run
from .stats import (
    IdentityReport,
    PowerLawFit,
    RunStats,
    check_duration_weight_relation,
    check_renewal_probability,
    check_unused_drift,
    check_weight_floor,
    fit_loglog_exponent,
    run_identity_suite,
    weight_lower_bound,
)
from .experiments import PointResult, SweepResult, SweepSpec, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
