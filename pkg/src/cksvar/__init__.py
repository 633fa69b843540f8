"""Structural VARs with one occasionally binding lower bound.

The package covers the full workflow for a system in which the last
variable is censored at a known bound (a policy rate at its effective
lower bound, say) while a latent shadow value keeps feeding the dynamics
with a possibly different ("kink") coefficient vector:

* ``model``       parameterizations, coherency checks, structural to
                  reduced-form mapping
* ``simulate``    data generation and the study processes used in the
                  simulation harness
* ``likelihood``  analytic likelihood for the kink-only model and two
                  particle filters for the general one
* ``estimate``    maximum likelihood fitting, standard errors, LR and
                  bootstrap LR tests
* ``identify``    point identification, grid-traced identified sets,
                  analytic bivariate bounds, censoring-frequency sets
* ``irf``         generalized impulse responses, set-valued responses,
                  bootstrap bands
* ``montecarlo``  repeated-sampling campaigns for estimators and tests
* ``cli``         a command line front end over CSV files

Everything is deterministic given explicit ``numpy.random.Generator``
seeds, so results reproduce exactly.
"""

from .estimate import (
    FitResult,
    ParamLayout,
    TestResult,
    bootstrap_lr,
    fit_ml,
    lr_test,
    std_errors,
)
from .identify import (
    BivariateBounds,
    IdentifiedSet,
    LambdaSet,
    StructuralSolution,
    bivariate_bounds,
    identified_set,
    lambda_from_xi,
    lambda_set,
    point_id,
    solve_betabar,
)
from .irf import (
    IrfBundle,
    IrfRequest,
    IrfState,
    bootstrap_bands,
    condition_state,
    girf,
    irf_identified_set,
)
from .likelihood import (
    LatentEstimate,
    LikelihoodResult,
    ParticleSystem,
    filter_latent,
    loglik_fapf,
    loglik_ksvar,
    loglik_sis,
)
from .model import (
    CoherencyError,
    CoherencyReport,
    DegenerateModelError,
    ModelError,
    ReducedForm,
    SingularityError,
    StructuralParams,
    check_coherency,
    count_free_parameters,
    restriction_counts,
    structural_to_reduced,
)
from .montecarlo import McConfig, McReport, run_mc_estimation, run_mc_lr
from .simulate import Dataset, LatentPath, make_dgp, simulate

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "ModelError",
    "SingularityError",
    "DegenerateModelError",
    "CoherencyError",
    "StructuralParams",
    "ReducedForm",
    "CoherencyReport",
    "check_coherency",
    "structural_to_reduced",
    "count_free_parameters",
    "restriction_counts",
    # simulate
    "Dataset",
    "LatentPath",
    "simulate",
    "make_dgp",
    # likelihood
    "LikelihoodResult",
    "ParticleSystem",
    "LatentEstimate",
    "loglik_ksvar",
    "loglik_sis",
    "loglik_fapf",
    "filter_latent",
    # estimate
    "ParamLayout",
    "FitResult",
    "TestResult",
    "fit_ml",
    "std_errors",
    "lr_test",
    "bootstrap_lr",
    # identify
    "StructuralSolution",
    "IdentifiedSet",
    "BivariateBounds",
    "LambdaSet",
    "point_id",
    "solve_betabar",
    "identified_set",
    "bivariate_bounds",
    "lambda_set",
    "lambda_from_xi",
    # irf
    "IrfState",
    "IrfRequest",
    "IrfBundle",
    "girf",
    "irf_identified_set",
    "condition_state",
    "bootstrap_bands",
    # montecarlo
    "McConfig",
    "McReport",
    "run_mc_estimation",
    "run_mc_lr",
]
