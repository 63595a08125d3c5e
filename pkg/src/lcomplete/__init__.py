"""Data-driven l-complete abstractions of black-box dynamical systems,
with PAC behavioural-inclusion certificates and temporal verification."""

from .abstraction import (
    Slca,
    VerificationVerdict,
    behaviors,
    build_slca,
    domino_complete,
    includes_trace,
    is_deterministic,
    is_non_blocking,
    load_slca,
    save_slca,
    to_dot,
    verify_invariance,
    verify_reach_stay,
)
from .core import (
    Alphabet,
    Trace,
    TraceSet,
    distinct_lseqs,
    load_traces_csv,
    save_traces_csv,
    window,
)
from .guarantees import (
    AffineBoundParams,
    BisimExtension,
    Hybrid1dGeometry,
    IntervalSet,
    PhiProfile,
    check_bisim_extension,
    circumscribed_radius,
    gamma_bar,
    hybrid_pre_analysis,
    inscribed_radius,
    kbar,
    phi_affine,
)
from .scenario import (
    Certificate,
    certify,
    empirical_violation,
    epsilon,
    greedy_complexity,
)
from .systems import (
    AffineSystem,
    Box,
    Gridworld,
    Hybrid1d,
    Policy,
    RegionLabels,
    Thresholds1d,
    UniformBox,
    UniformGrid,
    affine_benchmark,
    continuous_action,
    gridworld_benchmark,
    hybrid_benchmark,
    output,
    policy_success_rate,
    sample_traces,
    simulate,
    step,
    train_gridworld_policy,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
