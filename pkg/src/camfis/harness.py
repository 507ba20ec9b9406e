"""Campaign orchestration: pilot study, adaptive estimation, truth and MSE runs.

The pilot measures, per candidate fidelity, the surrogate evaluation cost,
the Gaussian-fit training budget and the weight-variance against the
high-fidelity posterior; it then fits the divergence-growth and cost models.
The adaptive run solves the fidelity/sample-count trade-off for a tolerance,
fits the biasing density at the selected fidelity and reweights fresh
samples against the high-fidelity posterior.  Truth and MSE campaigns repeat
independent adaptive runs under derived random streams, so every number in
the output is a pure function of (config, master seed) once the cost
constants are pinned.

Random-stream layout: trial ``i`` of stage ``s`` uses the child stream
``derive_stream(master_seed, s, ...)``; stages are numbered below.
"""

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .bayes import (
    InverseProblem,
    beam_hierarchy,
    heat_hierarchy,
    make_test_function,
)
from .densities import GaussianDistribution
from .importance import chi2_estimate, mfis_estimate
from .laplace import LaplaceError, NewtonConfig, NewtonError, laplace_approximation
from .rng import derive_stream
from .tradeoff import (
    CostModel,
    ErrorModel,
    fit_cost_model,
    fit_error_model,
    required_samples,
    solve_tradeoff,
)

__all__ = [
    "STAGE_DATA",
    "STAGE_PILOT",
    "STAGE_TRUTH",
    "STAGE_MSE",
    "STAGE_COMPARE",
    "STAGE_RUN",
    "ESTIMATOR_ADAPTIVE",
    "ESTIMATOR_HIGH_FIDELITY",
    "ESTIMATOR_SURROGATE",
    "PilotRow",
    "PilotReport",
    "AlgorithmResult",
    "TruthResult",
    "ExperimentRecord",
    "build_problem",
    "run_pilot",
    "run_algorithm1",
    "estimate_truth",
    "measure_mse",
    "compare_estimators",
]

STAGE_DATA = 0
STAGE_PILOT = 1
STAGE_TRUTH = 2
STAGE_MSE = 3
STAGE_COMPARE = 4
STAGE_RUN = 5

ESTIMATOR_ADAPTIVE = "context-aware"
ESTIMATOR_HIGH_FIDELITY = "high-fidelity-alone"
ESTIMATOR_SURROGATE = "surrogate-alone"


@dataclass(frozen=True)
class PilotRow:
    n: int
    h: float
    chi2_mean: float
    chi2_std: float
    laplace_evals: int
    fit_seconds: float
    eval_seconds: float


@dataclass(frozen=True)
class PilotReport:
    rows: tuple                 # PilotRow per surviving fidelity
    error_model: ErrorModel
    cost_model: CostModel


@dataclass(frozen=True)
class AlgorithmResult:
    estimate: float
    n_star: int
    m_star: int
    predicted_cost: float
    predicted_chi2_plus_one: float
    wall_seconds: float
    test_function: object


@dataclass(frozen=True)
class TruthResult:
    f_bar: float
    n_samples: int
    n_trials: int
    test_function: object
    biasing: GaussianDistribution
    laplace_evals: int
    fit_seconds: float


@dataclass(frozen=True)
class ExperimentRecord:
    epsilon: float
    estimator: str
    n_star: int
    m_star: int
    f_bar: float
    mse_hat: float
    mean_wall_seconds: float
    modeled_cost: float
    n_trials: int
    seed: int


def build_problem(cfg, master_seed):
    """Instantiate the inverse problem and draw its single observation."""
    if cfg.problem == "heat":
        hierarchy = heat_hierarchy(cfg.high_fidelity)
    else:
        hierarchy = beam_hierarchy(cfg.high_fidelity)
    prior = GaussianDistribution(
        cfg.prior_mean_array, cfg.prior_variance * np.eye(6)
    )
    noise = GaussianDistribution(
        np.zeros(hierarchy.obs_dim),
        cfg.noise_variance * np.eye(hierarchy.obs_dim),
    )
    rng = derive_stream(master_seed, STAGE_DATA)
    return InverseProblem.generate(
        hierarchy, prior, noise, cfg.theta_truth_array, rng
    )


def _time_per_eval(potential, theta, count):
    # Two warm-up calls flush lazy allocations out of the measurement.
    potential(theta)
    potential(theta)
    start = time.perf_counter()
    for _ in range(count):
        potential(theta)
    return (time.perf_counter() - start) / count


def run_pilot(problem, cfg, master_seed, newton_cfg=None):
    """Measure per-fidelity divergences, costs and training budgets; fit models.

    Per candidate with ``n`` intervals: time the surrogate potential, fit
    the Gaussian biasing density on the surrogate posterior (recording its
    evaluation budget and wall time), then run ``pilot_trials`` independent
    weight-variance estimates of ``pilot_samples`` each against the
    high-fidelity posterior.  A fidelity whose Gaussian fit fails is
    dropped with a warning; fewer than two survivors is an error.

    If the config pins cost constants, they replace the measured ``c0, c1``
    and high-fidelity seconds in the returned cost model (timings are still
    measured and reported in the rows), making everything downstream of the
    pilot independent of wall-clock jitter.
    """
    newton_cfg = newton_cfg or NewtonConfig()
    theta0 = cfg.prior_mean_array
    target = problem.potential()

    rows = []
    evals_budget = []
    for index, n in enumerate(cfg.fidelities):
        h = problem.hierarchy.h_of(n)
        surrogate = problem.potential(n)
        eval_seconds = _time_per_eval(surrogate, theta0, cfg.timing_evals)
        start = time.perf_counter()
        try:
            fit = laplace_approximation(surrogate, theta0, newton_cfg)
        except (LaplaceError, NewtonError) as exc:
            warnings.warn(
                f"dropping fidelity n={n}: Gaussian fit failed ({exc})",
                stacklevel=2,
            )
            continue
        fit_seconds = time.perf_counter() - start

        values = np.empty(cfg.pilot_trials)
        for trial in range(cfg.pilot_trials):
            rng = derive_stream(master_seed, STAGE_PILOT, index, trial)
            est = chi2_estimate(
                target, fit.approximation, cfg.pilot_samples, rng, fidelity=h
            )
            values[trial] = est.value_plus_one
        rows.append(
            PilotRow(
                n=int(n),
                h=h,
                chi2_mean=float(np.mean(values)),
                chi2_std=float(np.std(values)),
                laplace_evals=fit.model_evals,
                fit_seconds=fit_seconds,
                eval_seconds=eval_seconds,
            )
        )
        evals_budget.append(fit.model_evals)

    if len(rows) < 2:
        raise RuntimeError("fewer than 2 fidelities survived the pilot")

    error_model = fit_error_model([(r.h, r.chi2_mean) for r in rows])
    c0, c1 = fit_cost_model([(r.h, r.eval_seconds) for r in rows])
    high_fid_seconds = _time_per_eval(target, theta0, cfg.timing_evals)
    if cfg.pinned_c0 is not None:
        c0 = cfg.pinned_c0
    if cfg.pinned_c1 is not None:
        c1 = cfg.pinned_c1
    if cfg.pinned_C is not None:
        high_fid_seconds = cfg.pinned_C
    cost_model = CostModel(
        c0=c0,
        c1=c1,
        high_fidelity_seconds=high_fid_seconds,
        training_evals=int(max(evals_budget)),
    )
    return PilotReport(rows=tuple(rows), error_model=error_model, cost_model=cost_model)


def _fit_biasing(problem, cfg, n, newton_cfg):
    """Timed Gaussian fit of the fidelity-``n`` posterior."""
    surrogate = problem.potential(n)
    start = time.perf_counter()
    fit = laplace_approximation(surrogate, cfg.prior_mean_array, newton_cfg)
    return fit, time.perf_counter() - start


def run_algorithm1(
    problem,
    cfg,
    report,
    epsilon,
    master_seed,
    test_function=None,
    newton_cfg=None,
    stage=STAGE_RUN,
    trial=0,
):
    """One adaptive estimate at tolerance ``epsilon``.

    Steps: solve the trade-off for ``(n*, m*)``; re-fit the biasing density
    at the selected fidelity (re-fit, not reused from the pilot, so the
    reported wall time is the cost the trade-off models); draw ``m*``
    samples; reweight against the high-fidelity posterior.  When no frozen
    ``test_function`` is supplied, it is built from the fresh fit.
    """
    newton_cfg = newton_cfg or NewtonConfig()
    candidates = [problem.hierarchy.h_of(r.n) for r in report.rows]
    solution = solve_tradeoff(
        candidates,
        report.error_model,
        report.cost_model,
        epsilon,
        cfg.f_sup_factor,
    )
    n_star = int(round(1.0 / solution.h_star))

    start = time.perf_counter()
    fit, _ = _fit_biasing(problem, cfg, n_star, newton_cfg)
    if test_function is None:
        test_function = make_test_function(fit)
    target = problem.potential()
    rng = derive_stream(master_seed, stage, trial)
    estimate = mfis_estimate(
        test_function, target, fit.approximation, solution.m_star, rng
    )
    wall_seconds = time.perf_counter() - start
    return AlgorithmResult(
        estimate=float(estimate),
        n_star=n_star,
        m_star=solution.m_star,
        predicted_cost=solution.predicted_cost,
        predicted_chi2_plus_one=solution.predicted_chi2_plus_one,
        wall_seconds=wall_seconds,
        test_function=test_function,
    )


def estimate_truth(problem, cfg, master_seed, newton_cfg=None):
    """Reference value: mean of independent high-fidelity runs.

    Fits the biasing density on the high-fidelity posterior itself, freezes
    the test function from that fit, and averages ``truth_trials``
    independent estimates of ``truth_samples`` each.  The frozen test
    function is what every later estimator must reuse, so that all of them
    estimate the same integrand.
    """
    newton_cfg = newton_cfg or NewtonConfig()
    fit, fit_seconds = _fit_biasing(problem, cfg, None, newton_cfg)
    test_function = make_test_function(fit)
    target = problem.potential()
    estimates = np.empty(cfg.truth_trials)
    for trial in range(cfg.truth_trials):
        rng = derive_stream(master_seed, STAGE_TRUTH, trial)
        estimates[trial] = mfis_estimate(
            test_function, target, fit.approximation, cfg.truth_samples, rng
        )
    return TruthResult(
        f_bar=float(np.mean(estimates)),
        n_samples=cfg.truth_samples,
        n_trials=cfg.truth_trials,
        test_function=test_function,
        biasing=fit.approximation,
        laplace_evals=fit.model_evals,
        fit_seconds=fit_seconds,
    )


def measure_mse(
    problem,
    cfg,
    report,
    epsilon,
    truth,
    master_seed,
    estimator=ESTIMATOR_ADAPTIVE,
    n_trials=None,
    newton_cfg=None,
    stage=STAGE_MSE,
    eps_index=0,
    estimator_index=0,
):
    """Measured MSE of one estimator at tolerance ``epsilon``.

    The estimator tag selects the biasing fidelity: the trade-off solution
    for the adaptive estimator, the high-fidelity mesh, or the coarsest
    candidate; the sample count is always the required count at that
    fidelity.  The Gaussian fit is deterministic given the fidelity, so it
    is fitted once, timed, and its cost amortized into every trial's wall
    time; trials then differ only through their derived random streams.
    """
    newton_cfg = newton_cfg or NewtonConfig()
    n_trials = cfg.mse_trials if n_trials is None else int(n_trials)
    em, cm = report.error_model, report.cost_model

    if estimator == ESTIMATOR_ADAPTIVE:
        candidates = [problem.hierarchy.h_of(r.n) for r in report.rows]
        solution = solve_tradeoff(candidates, em, cm, epsilon, cfg.f_sup_factor)
        n_fit = int(round(1.0 / solution.h_star))
        m = solution.m_star
    elif estimator == ESTIMATOR_HIGH_FIDELITY:
        n_fit = problem.hierarchy.high_fidelity_n
        m = required_samples(
            em, problem.hierarchy.h_of(n_fit), epsilon, cfg.f_sup_factor
        )
    elif estimator == ESTIMATOR_SURROGATE:
        n_fit = min(r.n for r in report.rows)
        m = required_samples(
            em, problem.hierarchy.h_of(n_fit), epsilon, cfg.f_sup_factor
        )
    else:
        raise ValueError(f"unknown estimator tag {estimator!r}")

    fit, fit_seconds = _fit_biasing(problem, cfg, n_fit, newton_cfg)
    target = problem.potential()
    h_fit = problem.hierarchy.h_of(n_fit)
    modeled = m * cm.high_fidelity_seconds + cm.training_evals * cm.cost(h_fit)

    deviations = np.empty(n_trials)
    sample_seconds = np.empty(n_trials)
    for trial in range(n_trials):
        rng = derive_stream(master_seed, stage, eps_index, estimator_index, trial)
        start = time.perf_counter()
        value = mfis_estimate(
            truth.test_function, target, fit.approximation, m, rng
        )
        sample_seconds[trial] = time.perf_counter() - start
        deviations[trial] = value - truth.f_bar
    return ExperimentRecord(
        epsilon=float(epsilon),
        estimator=estimator,
        n_star=n_fit,
        m_star=int(m),
        f_bar=truth.f_bar,
        mse_hat=float(np.mean(deviations**2)),
        mean_wall_seconds=float(fit_seconds + np.mean(sample_seconds)),
        modeled_cost=float(modeled),
        n_trials=n_trials,
        seed=int(master_seed),
    )


def compare_estimators(problem, cfg, report, truth, master_seed, newton_cfg=None):
    """Three-way MSE comparison over the configured tolerance grid.

    For each tolerance: the adaptive estimator at its selected fidelity, the
    high-fidelity-alone estimator, and the coarsest-surrogate estimator, all
    with their required sample counts, all estimating the frozen test
    function against the same reference value.
    """
    estimators = (ESTIMATOR_ADAPTIVE, ESTIMATOR_HIGH_FIDELITY, ESTIMATOR_SURROGATE)
    records = []
    for eps_index, epsilon in enumerate(cfg.tolerances):
        for est_index, estimator in enumerate(estimators):
            records.append(
                measure_mse(
                    problem,
                    cfg,
                    report,
                    epsilon,
                    truth,
                    master_seed,
                    estimator=estimator,
                    newton_cfg=newton_cfg,
                    stage=STAGE_COMPARE,
                    eps_index=eps_index,
                    estimator_index=est_index,
                )
            )
    return records
