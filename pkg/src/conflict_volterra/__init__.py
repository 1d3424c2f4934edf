"""Two discrete Lotka-Volterra regions coupled by conflict composition."""

from .analysis import (
    AttractorClass,
    BifurcationBracket,
    ClassifyOptions,
    Cycle,
    Divergent,
    EquilibriumResult,
    Extinct,
    FixedPoint,
    Undetermined,
    bifurcation_bisect,
    classify_attractor,
    cycle_hausdorff,
    equilibrium_residual,
    lv_equilibrium,
    solve_equilibrium,
)
from .conflict import (
    attractive_limit,
    closed_form_repulsive,
    difference_profile,
    iterate_conflict,
    prop1_vanishes,
    prop2_vanishes,
    sigma_rho,
)
from .dynamics import (
    CoupledState,
    ModelParams,
    Trajectory,
    conflict_compose,
    denormalize,
    lv_step,
    normalize,
    simulate,
    step_F,
)

__version__ = "0.1.0"
