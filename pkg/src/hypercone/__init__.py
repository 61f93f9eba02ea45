"""Numerical laboratory for blow-up vs global existence of the semilinear heat
equation with time-amplified reaction on cones of hyperbolic space."""

from .barrier import (
    BarrierParams,
    KaplanTrace,
    H_integral,
    bound_T_thm1,
    bound_Tstar_thm2,
    bound_Tstar_thm2bis,
    default_alpha,
    default_m,
    find_R0,
    find_k0,
    kaplan_G,
    largeness_condition_14,
    make_barrier,
    normalize_barrier,
    ode_lower_bound,
    phi0,
    verify_lemma1,
)
from .cap import EigenPair, angular_average, cap_l1_normalize, solve_cap_eigenpair, sphere_area
from .geometry import (
    ConeSpec,
    EuclideanComparison,
    Exponential,
    ModelParams,
    Power,
    Regime,
    classify_regime,
    euclidean_comparison,
    lambda1,
    radial_coefficients,
    volume_weight,
)
from .grid import Grid, make_grid
from .solver import (
    RunOutcome,
    SolverConfig,
    StateField,
    apply_operator,
    build_grid,
    monitor_kaplan_inequality,
    run,
    step,
)

__version__ = "0.1.0"
