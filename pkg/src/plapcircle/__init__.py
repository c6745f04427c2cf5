"""Optimal constants, periodic orbits, minimizer branches and entropy flows
of the p-Laplacian interpolation problem on the circle."""

__version__ = "0.1.0"

from .constants import (  # noqa: F401
    EigenConstants,
    Lambda1,
    Params,
    eigen_constants,
    lambda1,
    lambda1_profile,
    lambda1_star,
    lambda1_star_profile,
    pi_p,
)
from .orbit import (  # noqa: F401
    Orbit,
    PhasePoint,
    Potential,
    conjugate_point,
    energy,
    norm_integrals,
    period,
    profile,
    shoot_orbit,
    shoot_period,
)
from .branch import (  # noqa: F401
    BranchPoint,
    BranchTrace,
    Thresholds,
    branch_point,
    departure_abscissa,
    lambda_of_mu,
    optimal_constant_estimate,
    rigidity_period_bound,
    thresholds,
    trace_branch,
)
from .functional import (  # noqa: F401
    GridFunction,
    PsiFunction,
    check_appendixA,
    check_klt,
    check_lemma_cs,
    check_theorem1,
    check_theorem2,
    derivative,
    entropy,
    fisher,
    functionals,
    norm,
    p_laplacian,
    random_positive_trig,
)
from . import flow  # noqa: F401
from .flow import (  # noqa: F401
    FlowConfig,
    FlowState,
    improved_rate_report,
    perturbed_constant,
)
