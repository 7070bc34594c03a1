"""Complete critical points of the tilted double-well objective.

The objective (alpha/2)(|x|^2/2 - lam)^2 - <f, x> over R^n has at most
three critical points, all of the form x = f/sigma for real roots sigma
of the scalar cubic 2 sigma^2 (sigma/alpha + lam) = |f|^2.  The package
solves the cubic in closed form, recovers and classifies every critical
point (global minimizer, local maximizer, saddle with explicit
rise/fall cones), handles the degenerate zero-tilt case by linear
perturbation, and reduces the general linear-operator variant via the
Moore-Penrose pseudoinverse.
"""

from .problem import (
    REGIME_EPS,
    ProblemSpec,
    Regime,
    RegimeTag,
    dual_gradient,
    dual_hessian,
    dual_value,
    primal_gradient,
    primal_hessian,
    primal_value,
    sphere_defect,
    total_complementary,
    well_energy,
    well_energy_conjugate,
)
from .solver import (
    Classification,
    CriticalPoint,
    CubicSolveTrace,
    DualRoot,
    RegimeError,
    ZeroForceError,
    cardano_roots_complex,
    classify_regime,
    cubic_residual,
    recover_critical_points,
    solve_dual,
    solve_dual_cardano,
    solve_dual_trig,
)
from .triality import (
    DirectionProbe,
    ProblemAnalysis,
    SaddleCone,
    analyze,
    classify,
    directional_second_derivative,
    hessian_eigenvalues,
    hessian_inertia,
    saddle_cone,
)
from .perturbation import (
    PerturbationStep,
    PerturbationTrace,
    default_perturbation_force,
    perturb_solve,
    perturbation_residual,
)
from .reduction import (
    GeneralProblemSpec,
    NotInRangeError,
    ReducedProblem,
    general_gradient,
    general_value,
    lift_solution,
    reduce_problem,
)
from .oracle import (
    DEFAULT_SEED,
    FdReport,
    GridSearchResult,
    SaddleDirectionSummary,
    empirical_second_difference,
    finite_difference_check,
    grid_minimize,
    sample_saddle_directions,
)

__version__ = "0.1.0"
