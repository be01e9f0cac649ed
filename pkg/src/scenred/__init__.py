"""scenred: scenario reduction for robust optimization, with certificates.

Reduce a finite uncertainty set of cost scenarios to a small one while
keeping a provable bound on the loss of the induced robust solution.
The functional core lives in :mod:`scenred.onestage`,
:mod:`scenred.twostage`, :mod:`scenred.guarantee` and
:mod:`scenred.robust`; :mod:`scenred.reducers` offers estimator-style
wrappers; the ``scenred`` console script drives everything from files.
"""

from .guarantee import (
    Heatmap,
    VerificationReport,
    certify,
    domination_ratios,
    guarantee_single_one_stage,
    guarantee_single_two_stage,
    heatmap,
    min_scale,
    partition_bound,
    verify_certificate,
)
from .model import (
    GuaranteeCertificate,
    ReductionResult,
    RobustInstance,
    UncertaintySet,
    filter_dominated,
    load_instance,
    load_reduction_result,
    load_uncertainty_set,
    save_instance,
    save_reduction_result,
    save_uncertainty_set,
)
from .onestage import (
    brute_subset_oracle,
    lambda_step,
    midpoint,
    mu_step,
    reduce_assignment,
    reduce_continuous,
    reduce_kmeans,
    reduce_midpoint,
    reduce_subset,
)
from .reducers import (
    AssignmentReducer,
    ContinuousReducer,
    KMeansReducer,
    MidpointReducer,
    SubsetReducer,
    TwoStageReducer,
)
from .robust import (
    RobustSolution,
    evaluate_one_stage,
    evaluate_two_stage,
    second_stage_selection,
    solve_one_stage,
    solve_two_stage,
)
from .twostage import brute_two_stage, reduce_greedy_two_stage, reduce_subset_two_stage

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "UncertaintySet",
    "ReductionResult",
    "GuaranteeCertificate",
    "RobustInstance",
    "RobustSolution",
    "load_uncertainty_set",
    "save_uncertainty_set",
    "load_reduction_result",
    "save_reduction_result",
    "load_instance",
    "save_instance",
    "filter_dominated",
    "mu_step",
    "lambda_step",
    "reduce_continuous",
    "reduce_assignment",
    "reduce_subset",
    "reduce_kmeans",
    "reduce_midpoint",
    "midpoint",
    "brute_subset_oracle",
    "reduce_subset_two_stage",
    "reduce_greedy_two_stage",
    "brute_two_stage",
    "min_scale",
    "domination_ratios",
    "guarantee_single_one_stage",
    "guarantee_single_two_stage",
    "partition_bound",
    "verify_certificate",
    "certify",
    "VerificationReport",
    "heatmap",
    "Heatmap",
    "evaluate_one_stage",
    "solve_one_stage",
    "second_stage_selection",
    "evaluate_two_stage",
    "solve_two_stage",
    "ContinuousReducer",
    "AssignmentReducer",
    "SubsetReducer",
    "KMeansReducer",
    "MidpointReducer",
    "TwoStageReducer",
]
