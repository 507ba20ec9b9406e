"""Divergence-growth and cost models, and the fidelity/sample-count solve.

The weight-variance of the multi-fidelity estimator grows with the surrogate
discretization error as ``k0_tilde * exp(k1 * delta(h))``; evaluating the
surrogate costs ``c0 + c1 / h`` seconds.  Given both fitted models, a
tolerance on the estimator MSE fixes the required sample count at each
fidelity, and the best fidelity minimizes (training + sampling) cost by
brute force over the finitely many candidates that actually exist.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ErrorModel",
    "CostModel",
    "TradeoffSolution",
    "fit_error_model",
    "fit_cost_model",
    "required_samples",
    "tradeoff_objective",
    "solve_tradeoff",
    "cost_bound_exponential",
    "cost_bound_polynomial",
    "speedup_limit",
]

_MAX_EXPONENT = 700.0  # exp() overflows just above this in double precision


@dataclass(frozen=True)
class ErrorModel:
    """Fidelity-to-divergence model ``chi2 + 1 = k0_tilde * exp(k1 * delta(h))``.

    ``delta_form`` selects the discretization-error law: ``"polynomial"``
    gives ``delta(h) = h**rate`` (rate 2 for the second-order solvers here,
    with any leading coefficient absorbed into ``k1``), ``"exponential"``
    gives ``delta(h) = rate**(-1/h)``.
    """

    k0_tilde: float
    k1: float
    delta_form: str = "polynomial"
    rate: float = 2.0

    def __post_init__(self):
        if self.k0_tilde <= 0:
            raise ValueError("k0_tilde must be positive")
        if self.delta_form not in ("polynomial", "exponential"):
            raise ValueError(f"unknown delta_form {self.delta_form!r}")

    def delta(self, h):
        h = np.asarray(h, dtype=float)
        if self.delta_form == "polynomial":
            out = h**self.rate
        else:
            out = self.rate ** (-1.0 / h)
        return out if out.ndim else float(out)

    def predict_chi2_plus_one(self, h):
        return self.k0_tilde * np.exp(self.k1 * self.delta(h))


@dataclass(frozen=True)
class CostModel:
    """Per-evaluation surrogate cost ``c(h) = c0 + c1 / h`` (seconds), the
    high-fidelity per-evaluation cost, and the training evaluation count."""

    c0: float
    c1: float
    high_fidelity_seconds: float
    training_evals: int

    def __post_init__(self):
        if self.c0 < 0 or self.c1 < 0:
            raise ValueError("cost coefficients must be nonnegative")
        if self.high_fidelity_seconds <= 0:
            raise ValueError("high-fidelity cost must be positive")
        if self.training_evals < 1:
            raise ValueError("training evaluation count must be at least 1")

    def cost(self, h):
        return self.c0 + self.c1 / np.asarray(h, dtype=float)


@dataclass(frozen=True)
class TradeoffSolution:
    h_star: float
    m_star: int
    predicted_cost: float
    predicted_chi2_plus_one: float


def fit_error_model(points, delta_form="polynomial", rate=2.0):
    """Least-squares fit of ``log(chi2+1)`` against ``delta(h)``.

    ``points`` is a sequence of ``(h, chi2_plus_one)`` pairs with at least
    two distinct ``delta(h)`` values and all divergences >= 1.
    """
    points = list(points)
    if any(c < 1.0 for _, c in points):
        raise ValueError("chi2_plus_one values must be >= 1")
    probe = ErrorModel(1.0, 0.0, delta_form=delta_form, rate=rate)
    deltas = np.array([probe.delta(h) for h, _ in points])
    if np.unique(deltas).size < 2:
        raise ValueError("need at least 2 distinct fidelities to fit")
    logs = np.log([c for _, c in points])
    slope, intercept = np.polyfit(deltas, logs, 1)
    return ErrorModel(
        k0_tilde=float(np.exp(intercept)),
        k1=float(slope),
        delta_form=delta_form,
        rate=rate,
    )


def fit_cost_model(points):
    """Least squares of seconds against ``1/h``; returns ``(c0, c1)``.

    A negative fitted intercept is clamped to zero with a warning (the cost
    model must stay nonnegative for the trade-off solve to be meaningful).
    """
    points = list(points)
    inv_h = np.array([1.0 / h for h, _ in points])
    if np.unique(inv_h).size < 2:
        raise ValueError("need at least 2 distinct fidelities to fit")
    seconds = np.array([s for _, s in points])
    c1, c0 = np.polyfit(inv_h, seconds, 1)
    if c0 < 0.0:
        warnings.warn(
            f"fitted baseline cost {c0:.3e} s is negative; clamping to 0",
            stacklevel=2,
        )
        c0 = 0.0
    return float(c0), float(c1)


def _samples_real(error_model, h, epsilon, f_sup_factor):
    if epsilon <= 0:
        raise ValueError("tolerance must be positive")
    exponent = error_model.k1 * error_model.delta(h)
    if exponent > _MAX_EXPONENT:
        raise ValueError(
            f"required-sample exponent {exponent:.1f} overflows; fidelity "
            f"h={h} is far outside the fitted range"
        )
    return f_sup_factor * (error_model.k0_tilde / epsilon) * math.exp(exponent)


def required_samples(error_model, h, epsilon, f_sup_factor=1.0):
    """Samples needed at fidelity ``h`` for MSE tolerance ``epsilon``:
    ``ceil(f_sup_factor * (k0_tilde / epsilon) * exp(k1 * delta(h)))``.

    ``f_sup_factor`` defaults to 1 (the working choice for a unit-bounded
    test function); set it to ``4 * sup|f|^2`` for the strict MSE bound.
    """
    return int(math.ceil(_samples_real(error_model, h, epsilon, f_sup_factor)))


def tradeoff_objective(h, error_model, cost_model, epsilon, f_sup_factor=1.0):
    """Modeled total cost at fidelity ``h``: sampling plus training seconds,
    with the sample count kept real-valued (no ceiling) for optimization."""
    m_hat = _samples_real(error_model, h, epsilon, f_sup_factor)
    return (
        m_hat * cost_model.high_fidelity_seconds
        + cost_model.training_evals * cost_model.cost(h)
    )


def solve_tradeoff(candidates, error_model, cost_model, epsilon, f_sup_factor=1.0):
    """Brute-force minimization of the modeled cost over candidate fidelities.

    Ties are broken toward the larger ``h`` (the cheaper surrogate).  The
    returned sample count is the ceiling at the chosen fidelity, and the
    predicted cost is evaluated with that integer count.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate fidelity list is empty")
    best_h, best_obj = None, math.inf
    for h in candidates:
        obj = tradeoff_objective(h, error_model, cost_model, epsilon, f_sup_factor)
        if obj < best_obj or (obj == best_obj and h > best_h):
            best_h, best_obj = h, obj
    m_star = required_samples(error_model, best_h, epsilon, f_sup_factor)
    return TradeoffSolution(
        h_star=float(best_h),
        m_star=m_star,
        predicted_cost=float(
            m_star * cost_model.high_fidelity_seconds
            + cost_model.training_evals * cost_model.cost(best_h)
        ),
        predicted_chi2_plus_one=float(error_model.predict_chi2_plus_one(best_h)),
    )


def _check_bound_args(alpha, beta, epsilon):
    if alpha <= 1.0 or beta <= 1.0:
        raise ValueError("rate parameters must exceed 1")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("tolerance must lie in (0, 1]")


def cost_bound_exponential(alpha, beta, epsilon, C, M, k0_prime, k1):
    """Total-cost bound when the surrogate error decays like ``alpha**(-1/h)``
    and its evaluation cost grows like ``beta**(1/h)``."""
    _check_bound_args(alpha, beta, epsilon)
    sample_exp = 1.0 / (1.0 + math.log(beta, alpha))
    train_exp = 1.0 / (1.0 + math.log(alpha, beta))
    return (C * k0_prime / epsilon) * math.exp(
        k1 * epsilon**sample_exp
    ) + M * epsilon ** (-train_exp)


def cost_bound_polynomial(alpha, beta, epsilon, C, M, k0_prime, k1):
    """Total-cost bound when the surrogate error decays like ``h**alpha``
    and its evaluation cost grows like ``h**(-beta)``."""
    _check_bound_args(alpha, beta, epsilon)
    return (C * k0_prime / epsilon) * math.exp(
        k1 * epsilon ** (alpha / (alpha + beta))
    ) + M * epsilon ** (-beta / (alpha + beta))


def speedup_limit(k1, delta_at_hbar):
    """Tight-tolerance limit of the cost ratio of a fixed-fidelity estimator
    at error level ``delta_at_hbar`` to the adaptive one: ``exp(k1 * delta)``,
    which exceeds 1 whenever ``k1 * delta > 0``."""
    if not (np.isfinite(k1) and np.isfinite(delta_at_hbar)):
        raise ValueError("inputs must be finite")
    return math.exp(k1 * delta_at_hbar)
