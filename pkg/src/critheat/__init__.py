"""critheat: a numerical laboratory for the radial heat equation with the
critical density r^{-2} and weighted source r^sigma u^p, built around its
reduction to a one-dimensional Fisher-KPP-type equation."""

from .closed_forms import (
    AT_INFINITY,
    AT_ZERO,
    REGION_INNER,
    REGION_INTERFACE,
    REGION_OUTER,
    ClosedForm,
    eternal_solution,
    eternal_solution_asymptote,
    heat_kernel,
    pulse_steady_state,
    region_of,
    singular_steady_state,
)
from .config import ConfigError, RunConfig, parse_config, stable_digest
from .experiments import (
    BLOWUP,
    DECAY,
    UNRESOLVED,
    BracketError,
    ExperimentReport,
    classify_datum,
    critical_pc_suite,
    decay_rate_fit,
    default_horizon,
    fujita_sweep,
    gaussian_profile_deviation,
    separatrix_bisect,
    sigma_minus2_suite,
    sweep_passes,
    transform_equivalence,
)
from .fkpp_solver import (
    BLEW_UP,
    DECAYED,
    HOMOGENEOUS_DIRICHLET,
    UNDETERMINED,
    BoundaryCondition,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    energy,
    reaction_ode_value,
    solve,
    step,
)
from .params import (
    CRITICAL_PC,
    FISHER_KPP,
    FUJITA_BLOWUP,
    SIGMA_MINUS_TWO,
    DerivedConstants,
    ProblemParams,
    classify_regime,
    derive_constants,
    is_critical_p,
)
from .radial_solver import RadialConfig, residual, solve_radial
from .transform import (
    FRAME_LOG,
    FRAME_RADIAL,
    FRAME_TRAVELING,
    Field,
    Grid1D,
    MassResult,
    RatioExtrema,
    build_initial_condition,
    from_fisher,
    interpolate,
    l1_norm,
    map_initial,
    plateau_profile,
    ratio_extrema,
    smooth_bump,
    sup_norm,
    to_fisher,
    weighted_mass,
)

__version__ = "0.1.0"
