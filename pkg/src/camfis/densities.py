"""Densities in potential form, and Gaussians with a cached Cholesky factor.

An un-normalized density ``exp(-phi)`` is represented by its potential
``phi`` alone; nothing here ever materializes the density in linear space,
and normalizing constants are never computed (downstream estimators are
self-normalizing).  Potential evaluations are counted exactly, which is how
model-evaluation budgets are measured.
"""

import numpy as np
import scipy.linalg

__all__ = ["PotentialDensity", "GaussianDistribution"]


class PotentialDensity:
    """Un-normalized density represented by its potential (negative log).

    Parameters
    ----------
    potential : callable
        Maps a parameter vector of shape ``(dim,)`` to a float.  May return
        ``+inf`` to mark forbidden regions.
    dim : int
        Parameter dimension.
    batch : callable, optional
        Vectorized evaluation over an ``(m, dim)`` array, returning ``(m,)``.
        Must agree with ``potential`` row by row; used as a fast path only.

    ``eval_count`` increases by exactly one per single evaluation and by
    ``m`` per batch of ``m``, so totals are exact regardless of the path.
    """

    def __init__(self, potential, dim, batch=None):
        self._potential = potential
        self._batch = batch
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        self.eval_count = 0

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ValueError(
                f"parameter has shape {theta.shape}, expected ({self.dim},)"
            )
        self.eval_count += 1
        return float(self._potential(theta))

    def eval_many(self, thetas):
        """Potential at each row of ``thetas``; counts one eval per row."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim != 2 or thetas.shape[1] != self.dim:
            raise ValueError(
                f"samples have shape {thetas.shape}, expected (m, {self.dim})"
            )
        if self._batch is not None:
            values = np.asarray(self._batch(thetas), dtype=float)
            if values.shape != (thetas.shape[0],):
                raise ValueError("batch evaluation returned a wrong shape")
            self.eval_count += thetas.shape[0]
            return values
        return np.array([self(t) for t in thetas])

    @classmethod
    def from_gaussian(cls, gaussian):
        """Potential of a Gaussian (its normalized negative log-density)."""
        return cls(
            potential=lambda t: -gaussian.log_pdf(t),
            dim=gaussian.dim,
            batch=lambda ts: -gaussian.log_pdf(ts),
        )


class GaussianDistribution:
    """Multivariate normal given by mean and SPD covariance.

    The covariance is factorized once (lower Cholesky ``factor``); the
    log-density, Mahalanobis form and sampler all reuse the factor.
    Construction fails if the covariance is not symmetric positive
    definite.  Instances are immutable and safe to share.
    """

    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError("mean/covariance shapes are inconsistent")
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-14):
            raise ValueError("covariance must be symmetric")
        try:
            factor = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance is not positive definite") from exc
        self.mean = mean
        self.cov = cov
        self.factor = factor
        self.dim = mean.size
        # Explicit inverse factor: the quadratic form is then a single
        # matmul, much cheaper than a triangular solve per call at d <= 120.
        self._factor_inv = scipy.linalg.solve_triangular(
            factor, np.eye(self.dim), lower=True, check_finite=False
        )
        self._log_norm = 0.5 * self.dim * np.log(2.0 * np.pi) + np.sum(
            np.log(np.diag(factor))
        )

    def mahalanobis_sq(self, theta):
        """Squared Mahalanobis distance ``(x-mu)^T cov^-1 (x-mu)``.

        Accepts a single vector ``(dim,)`` or a batch ``(m, dim)``.
        """
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dim:
            raise ValueError(
                f"parameter dimension {theta.shape[-1]} != {self.dim}"
            )
        z = (theta - self.mean) @ self._factor_inv.T
        return np.sum(z * z, axis=-1)

    def log_pdf(self, theta):
        """Normalized log-density at ``theta`` (vector or batch)."""
        return -0.5 * self.mahalanobis_sq(theta) - self._log_norm

    def sample(self, rng, n):
        """Draw ``n`` samples as an ``(n, dim)`` array: ``mu + L z``."""
        n = int(n)
        if n < 1:
            raise ValueError("sample count must be at least 1")
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ self.factor.T

    def __repr__(self):
        return f"GaussianDistribution(dim={self.dim})"
