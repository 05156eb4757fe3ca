"""Random-subspace derivative-free optimization and its expected-decrease analysis.

The package bundles three layers:

* an optimizer that iterates direct-search or linear-model steps inside
  uniformly random low-dimensional subspaces (:mod:`subspace_dfo.optimizer`,
  :mod:`subspace_dfo.rng`);
* closed-form, quadrature, and asymptotic evaluation of the expected
  per-iteration and per-evaluation objective decrease as a function of the
  subspace dimension p and the ambient dimension d
  (:mod:`subspace_dfo.formulas`, :mod:`subspace_dfo.specfun`);
* seeded Monte Carlo estimation of the same quantities, used both as the
  evaluation path for large p and as the independent check of every formula
  (:mod:`subspace_dfo.montecarlo`, :mod:`subspace_dfo.experiments`).
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    InvalidDimensionError,
    NonFiniteObjectiveError,
    UnsupportedSubspaceDimensionError,
)
from .rng import (
    RngStream,
    SubspaceBasis,
    UnitVector,
    sample_stiefel,
    sample_unit_vector,
    split_stream,
)
from .specfun import GammaRatio, gamma_half_ratio, kershaw_bounds, log_gamma, sin_power_integral
from .formulas import (
    P_MAX,
    VARIANTS,
    FormulaResult,
    NestedIntegral,
    asymptotic_decrease,
    expected_decrease_ds,
    expected_decrease_mb,
    nested_sine_integral,
    parallel_per_work,
    parallel_rounds,
    per_evaluation_ds,
    per_evaluation_mb,
)
from .optimizer import (
    DriverConfig,
    DriverTrace,
    IterationOutcome,
    ObjectiveHandle,
    SubspaceRestriction,
    TraceRecord,
    ds_iteration,
    mb_iteration,
    run_driver,
    simplex_gradient,
)
from .montecarlo import (
    DecreaseEstimate,
    PairedDelta,
    estimate,
    estimate_per_evaluation,
    evaluation_cost,
    paired_compare,
    paired_ratio_gap,
    replicate_decreases,
)
from .experiments import (
    ExperimentSpec,
    GateResult,
    ResultRow,
    SweepSummary,
    default_figure_spec,
    make_objective,
    run_figure_vary_d,
    run_figure_vary_p,
    run_named_figure,
    run_optimizer_experiment,
    run_parallel_sweep,
    run_verify,
)

__all__ = [
    "__version__",
    "DomainError",
    "InvalidDimensionError",
    "NonFiniteObjectiveError",
    "UnsupportedSubspaceDimensionError",
    "RngStream",
    "SubspaceBasis",
    "UnitVector",
    "sample_stiefel",
    "sample_unit_vector",
    "split_stream",
    "GammaRatio",
    "gamma_half_ratio",
    "kershaw_bounds",
    "log_gamma",
    "sin_power_integral",
    "P_MAX",
    "VARIANTS",
    "FormulaResult",
    "NestedIntegral",
    "asymptotic_decrease",
    "expected_decrease_ds",
    "expected_decrease_mb",
    "nested_sine_integral",
    "parallel_per_work",
    "parallel_rounds",
    "per_evaluation_ds",
    "per_evaluation_mb",
    "DriverConfig",
    "DriverTrace",
    "IterationOutcome",
    "ObjectiveHandle",
    "SubspaceRestriction",
    "TraceRecord",
    "ds_iteration",
    "mb_iteration",
    "run_driver",
    "simplex_gradient",
    "DecreaseEstimate",
    "PairedDelta",
    "estimate",
    "estimate_per_evaluation",
    "evaluation_cost",
    "paired_compare",
    "paired_ratio_gap",
    "replicate_decreases",
    "ExperimentSpec",
    "GateResult",
    "ResultRow",
    "SweepSummary",
    "default_figure_spec",
    "make_objective",
    "run_figure_vary_d",
    "run_figure_vary_p",
    "run_named_figure",
    "run_optimizer_experiment",
    "run_parallel_sweep",
    "run_verify",
]
