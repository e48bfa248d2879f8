"""ergolab: a desk-scale numerical laboratory for nonsingular group actions.

Concrete group models with Haar integration, orbit Voronoi tessellations,
nested compact orbit equivalence relations, Radon-Nikodym cocycles with
their conditional-expectation and transformation identities, Poisson
suspensions with exact derivative formulas, and ratio ergodic averaging
along (random) equicompact windows — every identity verified numerically.
"""

from .cocycle import (
    CircleDensitySystem,
    DensitySpec,
    FiniteWeightedSystem,
    TorusFlowSystem,
    TranslationSystem,
    cocycle_residual,
    cond_exp_ratio,
    fubini_check,
    hopf_classify,
    make_density,
    nabla,
    s_operator,
    transformation_check,
)
from .cross_section import (
    Net,
    VoronoiAllocation,
    VoronoiOER,
    build_E_U,
    greedy_net,
    selector_check,
    voronoi_allocate,
)
from .ergodic_engine import (
    ConvergenceReport,
    CountFunctional,
    DiagonalProductSystem,
    countable_oracle,
    diagonal_product,
    hopf_ergodicity_experiment,
    random_ratio_run,
    ratio_average,
)
from .filtration import (
    FiltrationStructure,
    RandomDyadicFiltration,
    asymptotic_invariance_experiment,
    dyadic_filtration,
    folner_stat,
    lift_filtration,
    positivize,
    random_dyadic,
    restrict_filtration,
)
from .group_core import (
    GroupModel,
    QuadratureScheme,
    Window,
    affine_from_ab,
    affine_to_ab,
    ball_filtration,
    haar_integrate,
    make_group,
    window_haar_mass,
)
from .poisson import (
    PiTransform,
    PointConfiguration,
    act,
    change_of_variables_mc,
    hopf_classify_suspension,
    kakutani_check,
    pi_apply,
    rn_star,
    sample_config,
    upsilon_bound_check,
)

__version__ = "0.1.0"
