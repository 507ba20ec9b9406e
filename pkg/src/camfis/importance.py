"""Self-normalized and multi-fidelity importance sampling.

Weights are handled exclusively in log space with a max-shift before any
exponentiation: posterior potentials reach O(1e3) for poor samples, so the
raw density ratios of the textbook formulas would overflow.  The divergence
estimator returns the ``chi^2 + 1`` quantity (what the sample statistic
converges to); every downstream formula consumes ``chi^2 + 1`` so there is
no off-by-one drift between modules.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightedSampleSet",
    "ChiSquareEstimate",
    "DegenerateWeightsError",
    "compute_log_weights",
    "self_normalized_estimate",
    "mfis_estimate",
    "chi2_estimate",
    "chi2_from_sample_set",
    "effective_sample_size",
    "mse_bound",
]


class DegenerateWeightsError(RuntimeError):
    """Every importance weight vanished: the target potential was +inf at
    all samples, which signals a broken forward model rather than a valid
    zero estimate."""


@dataclass(frozen=True)
class WeightedSampleSet:
    """Samples from a biasing density with their log importance weights.

    ``log_weights[i] = -phi(samples[i]) - log q(samples[i])`` where ``phi``
    is the target potential and ``q`` the (normalized) biasing density.
    """

    samples: np.ndarray      # (m, d)
    log_weights: np.ndarray  # (m,)

    def __post_init__(self):
        if len(self.samples) != len(self.log_weights) or len(self.samples) < 1:
            raise ValueError("samples and log_weights must have equal length >= 1")

    @property
    def size(self):
        return len(self.log_weights)

    def shifted_weights(self):
        """Weights ``exp(lw - max lw)``; the max entry is exactly 1."""
        shift = np.max(self.log_weights)
        if not np.isfinite(shift):
            raise DegenerateWeightsError(
                "all importance weights are zero (target potential +inf at "
                "every sample)"
            )
        return np.exp(self.log_weights - shift)

    def normalized_weights(self):
        w = self.shifted_weights()
        return w / np.sum(w)


@dataclass(frozen=True)
class ChiSquareEstimate:
    """Monte Carlo estimate of ``chi^2(p || q) + 1`` from m biased samples."""

    value_plus_one: float
    sample_size: int
    fidelity: float = field(default=float("nan"))


def compute_log_weights(target, biasing, samples):
    """Log importance weights of ``samples`` for ``target`` under ``biasing``.

    ``target`` is a :class:`~camfis.densities.PotentialDensity` (evaluation
    counted, exactly one per sample); ``biasing`` is anything exposing a
    normalized vectorized ``log_pdf``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] < 1:
        raise ValueError("need at least one sample")
    log_w = -target.eval_many(samples) - biasing.log_pdf(samples)
    return WeightedSampleSet(samples=samples, log_weights=log_w)


def _apply(f, samples):
    return np.array([float(f(t)) for t in samples])


def self_normalized_estimate(f, target, biasing, samples):
    """Self-normalized importance sampling estimate of ``E_p[f]``.

    Uses ``sum(f w) / sum(w)`` with max-shifted weights.  With all weights
    equal this reduces to the plain sample mean of ``f`` (same summation
    order in numerator and denominator), and ``f == 1`` returns exactly 1.
    """
    ws = compute_log_weights(target, biasing, samples)
    w = ws.shifted_weights()
    fv = _apply(f, ws.samples)
    return float(np.sum(fv * w) / np.sum(w))


def mfis_estimate(f, target, biasing, m, rng):
    """Multi-fidelity importance sampling estimate with ``m`` fresh samples.

    Draws ``m`` i.i.d. samples from ``biasing`` and reweights them against
    the expensive target: exactly ``m`` target-potential evaluations, and no
    surrogate evaluations (the surrogate only ever enters through the
    biasing density it was used to fit).
    """
    if int(m) < 1:
        raise ValueError("sample count must be at least 1")
    samples = biasing.sample(rng, int(m))
    return self_normalized_estimate(f, target, biasing, samples)


def chi2_from_sample_set(ws, fidelity=float("nan")):
    """``m * sum(w^2) / (sum w)^2`` computed stably from log weights.

    The numerator is shifted by twice the max log weight and the denominator
    by the max log weight, so the ratio is evaluated without overflow.  The
    statistic converges to ``chi^2(p || q) + 1`` and is >= 1 for every
    finite sample by Cauchy-Schwarz.
    """
    shift = np.max(ws.log_weights)
    if not np.isfinite(shift):
        raise DegenerateWeightsError(
            "all importance weights are zero (target potential +inf at "
            "every sample)"
        )
    num = np.sum(np.exp(2.0 * (ws.log_weights - shift)))
    den = np.sum(np.exp(ws.log_weights - shift)) ** 2
    return ChiSquareEstimate(
        value_plus_one=float(ws.size * num / den),
        sample_size=ws.size,
        fidelity=fidelity,
    )


def chi2_estimate(target, biasing, m, rng, fidelity=float("nan")):
    """Estimate ``chi^2(target || biasing) + 1`` from ``m`` biased samples."""
    if int(m) < 2:
        raise ValueError("divergence estimation needs at least 2 samples")
    samples = biasing.sample(rng, int(m))
    return chi2_from_sample_set(
        compute_log_weights(target, biasing, samples), fidelity=fidelity
    )


def effective_sample_size(m, chi2_plus_one):
    """Equivalent i.i.d. sample count ``m / (chi^2 + 1)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if chi2_plus_one < 1.0:
        raise ValueError("chi2_plus_one must be >= 1")
    return m / chi2_plus_one

def mse_bound(f_sup, m, chi2_plus_one):
    """Upper bound ``4 |f|_sup^2 (chi^2 + 1) / m`` on the estimator MSE."""
    if f_sup < 0:
        raise ValueError("f_sup must be nonnegative")
    if m < 1:
        raise ValueError("m must be at least 1")
    return 4.0 * f_sup**2 * chi2_plus_one / m
