"""Bayesian inverse problems over the PDE forward models.

Couples a fidelity-indexed family of parameter-to-observable maps with a
Gaussian prior and Gaussian observation noise.  The negative log-posterior
at fidelity ``n`` is

    0.5 * ||y - G_n(theta)||^2_{Gamma^-1} + 0.5 * (theta - mu)^T Spr^-1 (theta - mu)

with both quadratic forms evaluated through cached Cholesky factors.  The
module also provides the +/-1 half-space test function centered at a fitted
Gaussian: a bounded integrand whose expectation under the fit is exactly
zero, so it exercises the estimators where their variance is largest.
"""

from dataclasses import dataclass

import numpy as np

from . import forward_models
from .densities import GaussianDistribution, PotentialDensity

__all__ = [
    "SurrogateHierarchy",
    "heat_hierarchy",
    "beam_hierarchy",
    "InverseProblem",
    "TestFunction",
    "make_test_function",
]

PARAMETER_DIM = 6


class SurrogateHierarchy:
    """Fidelity-indexed observable maps plus the designated high-fidelity map.

    ``observe(theta, n)`` evaluates the map with ``n`` mesh intervals;
    ``n=None`` selects the high-fidelity mesh.  ``h = 1/n`` is the mesh
    width used everywhere as the fidelity parameter.
    """

    def __init__(self, name, observe_fn, obs_dim, high_fidelity_n):
        self.name = name
        self._observe = observe_fn
        self.obs_dim = int(obs_dim)
        self.high_fidelity_n = int(high_fidelity_n)

    def observe(self, theta, n=None):
        return self._observe(theta, self.high_fidelity_n if n is None else int(n))

    @staticmethod
    def h_of(n):
        return 1.0 / int(n)


def heat_hierarchy(high_fidelity_n):
    return SurrogateHierarchy(
        "heat", forward_models.heat_observe, 120, high_fidelity_n
    )


def beam_hierarchy(high_fidelity_n):
    return SurrogateHierarchy(
        "beam", forward_models.eb_observe, 40, high_fidelity_n
    )


class InverseProblem:
    """A generated data set with its prior, noise model and model hierarchy.

    Instances are immutable after construction: the data vector is drawn
    once (a single observation) and every posterior potential then refers
    to that fixed ``y``.
    """

    def __init__(self, hierarchy, data, noise, prior, theta_truth):
        data = np.asarray(data, dtype=float)
        if data.shape != (hierarchy.obs_dim,):
            raise ValueError("data dimension does not match the observable map")
        if noise.dim != hierarchy.obs_dim:
            raise ValueError("noise dimension does not match the observable map")
        self.hierarchy = hierarchy
        self.data = data
        self.noise = noise
        self.prior = prior
        self.theta_truth = np.asarray(theta_truth, dtype=float)

    @classmethod
    def generate(cls, hierarchy, prior, noise, theta_truth, rng):
        """Draw ``y = G(theta_truth) + eta`` with the high-fidelity map."""
        clean = hierarchy.observe(theta_truth)
        eta = noise.sample(rng, 1)[0]
        return cls(hierarchy, clean + eta, noise, prior, theta_truth)

    def potential_value(self, theta, n=None):
        """Negative log-posterior (up to the constant) at fidelity ``n``."""
        residual = self.data - self.hierarchy.observe(theta, n)
        misfit = 0.5 * self.noise.mahalanobis_sq(self.noise.mean + residual)
        return float(misfit + 0.5 * self.prior.mahalanobis_sq(theta))

    def potential(self, n=None):
        """Posterior potential at fidelity ``n`` with a fresh eval counter.

        A forward-solve failure propagates as an exception; it is never
        masked as an infinite potential, because a crash of the model is a
        bug to surface, not a region of zero probability.
        """
        return PotentialDensity(
            lambda theta: self.potential_value(theta, n), dim=PARAMETER_DIM
        )


@dataclass(frozen=True)
class TestFunction:
    """Half-space indicator ``+1`` on one side of a hyperplane, ``-1`` on the
    other; the plane passes through ``center`` orthogonal to ``direction``."""

    center: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.center.shape:
            raise ValueError("parameter dimension mismatch")
        return 1.0 if float((theta - self.center) @ self.direction) >= 0.0 else -1.0

    def evaluate_many(self, thetas):
        dots = (np.atleast_2d(thetas) - self.center) @ self.direction
        return np.where(dots >= 0.0, 1.0, -1.0)


def make_test_function(fit):
    """Test function from a Gaussian fit: plane through the mean, normal to
    the leading eigenvector of the covariance.

    The eigenvector sign is fixed by making its first nonzero component
    positive, so repeated runs build the identical function.  Accepts a
    Gaussian or anything carrying one as ``.approximation``.
    """
    gaussian = getattr(fit, "approximation", fit)
    eigvals, eigvecs = np.linalg.eigh(gaussian.cov)
    direction = eigvecs[:, -1].copy()
    nonzero = np.nonzero(np.abs(direction) > 1e-12)[0]
    if nonzero.size == 0:
        raise ValueError("degenerate eigenvector")
    if direction[nonzero[0]] < 0:
        direction = -direction
    direction /= np.linalg.norm(direction)
    return TestFunction(center=gaussian.mean.copy(), direction=direction)
