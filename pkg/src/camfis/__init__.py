"""Adaptive-fidelity importance sampling for PDE-constrained Bayesian inference.

The package fits Gaussian biasing densities on cheap surrogate posteriors,
estimates the weight variance (chi-square divergence) they induce against
the expensive high-fidelity posterior, and picks the surrogate fidelity and
sample count that minimize total cost for a target mean-squared error.
"""

from .bayes import (
    InverseProblem,
    SurrogateHierarchy,
    TestFunction,
    beam_hierarchy,
    heat_hierarchy,
    make_test_function,
)
from .config import ProblemConfig, default_config, load_config
from .densities import GaussianDistribution, PotentialDensity
from .harness import (
    build_problem,
    compare_estimators,
    estimate_truth,
    measure_mse,
    run_algorithm1,
    run_pilot,
)
from .importance import (
    ChiSquareEstimate,
    WeightedSampleSet,
    chi2_estimate,
    effective_sample_size,
    mfis_estimate,
    mse_bound,
    self_normalized_estimate,
)
from .laplace import (
    LaplaceResult,
    NewtonConfig,
    fd_gradient,
    fd_hessian,
    find_mode,
    laplace_approximation,
)
from .rng import derive_stream, master_stream
from .tradeoff import (
    CostModel,
    ErrorModel,
    TradeoffSolution,
    cost_bound_exponential,
    cost_bound_polynomial,
    fit_cost_model,
    fit_error_model,
    required_samples,
    solve_tradeoff,
    speedup_limit,
)

__version__ = "0.1.0"
