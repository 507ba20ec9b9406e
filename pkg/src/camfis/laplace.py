"""Gaussian (Laplace) fit of a potential: damped Newton + FD derivatives.

The mode is found by damped Newton with central finite differences for both
gradient and Hessian; the fitted covariance is the inverse Hessian at the
mode.  At parameter dimension 6 the full FD Hessian costs 73 potential
evaluations, so the Newton system is assembled and solved directly by
Cholesky (an inner iterative solve would buy nothing at this size).  All
potential evaluations are counted; the total is the training budget that
the cost model consumes.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .densities import GaussianDistribution

__all__ = [
    "NewtonConfig",
    "ModeResult",
    "LaplaceResult",
    "NewtonError",
    "LaplaceError",
    "fd_gradient",
    "fd_hessian",
    "find_mode",
    "laplace_approximation",
]


class NewtonError(RuntimeError):
    """Mode search failed; carries the last iterate in ``last_theta``."""

    def __init__(self, message, last_theta=None):
        super().__init__(message)
        self.last_theta = last_theta


class LaplaceError(RuntimeError):
    """The Hessian at the mode is not positive definite, so no Gaussian
    fit exists there."""


@dataclass(frozen=True)
class NewtonConfig:
    """Settings for the damped Newton mode search.

    ``fd_step`` is relative: coordinate ``i`` uses ``fd_step * (1 + |theta_i|)``.
    The default 1e-5 balances FD truncation against cancellation at double
    precision; ``grad_tol`` is the gradient-norm convergence threshold.
    """

    fd_step: float = 1e-5
    grad_tol: float = 1e-8
    max_iter: int = 50
    backtrack_factor: float = 0.5
    max_backtracks: int = 40

    def __post_init__(self):
        if self.fd_step <= 0 or self.grad_tol <= 0 or self.max_iter < 1:
            raise ValueError("fd_step, grad_tol must be > 0 and max_iter >= 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")

    def steps_at(self, theta):
        return self.fd_step * (1.0 + np.abs(np.asarray(theta, dtype=float)))


@dataclass(frozen=True)
class ModeResult:
    theta: np.ndarray
    iterations: int          # accepted Newton steps
    final_grad_norm: float
    backtrack_evals: int     # potential evaluations spent on line search


@dataclass(frozen=True)
class LaplaceResult:
    approximation: GaussianDistribution
    model_evals: int         # total potential evaluations, final Hessian included
    iterations: int
    final_grad_norm: float
    backtrack_evals: int


def _steps(theta, step):
    s = np.broadcast_to(np.asarray(step, dtype=float), theta.shape).copy()
    if np.any(s <= 0):
        raise ValueError("finite-difference step must be positive")
    return s


def fd_gradient(pot, theta, step):
    """Central-difference gradient; exactly ``2 d`` potential evaluations.

    ``step`` may be a scalar or a per-coordinate array.  Central differences
    are exact on quadratics for any step size.
    """
    theta = np.asarray(theta, dtype=float)
    s = _steps(theta, step)
    d = theta.size
    grad = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = s[i]
        hi = pot(theta + e)
        lo = pot(theta - e)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError(f"non-finite potential in gradient stencil, coordinate {i}")
        grad[i] = (hi - lo) / (2.0 * s[i])
    return grad


def fd_hessian(pot, theta, step):
    """Central-difference Hessian; ``1 + 2d + 2 d (d-1)`` evaluations.

    Diagonal entries use the 3-point second difference, off-diagonal entries
    the 4-point cross stencil; the result is symmetric by construction.
    """
    theta = np.asarray(theta, dtype=float)
    s = _steps(theta, step)
    d = theta.size
    hess = np.empty((d, d))
    center = pot(theta)
    if not np.isfinite(center):
        raise ValueError("non-finite potential at the Hessian center point")
    for i in range(d):
        e = np.zeros(d)
        e[i] = s[i]
        hi = pot(theta + e)
        lo = pot(theta - e)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError(f"non-finite potential in Hessian stencil, coordinate {i}")
        hess[i, i] = (hi - 2.0 * center + lo) / s[i] ** 2
    for i in range(d):
        for j in range(i + 1, d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = s[i]
            ej[j] = s[j]
            pp = pot(theta + ei + ej)
            pm = pot(theta + ei - ej)
            mp = pot(theta - ei + ej)
            mm = pot(theta - ei - ej)
            vals = (pp, pm, mp, mm)
            if not all(np.isfinite(v) for v in vals):
                raise ValueError(
                    f"non-finite potential in Hessian stencil, coordinates ({i}, {j})"
                )
            hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4.0 * s[i] * s[j])
    return hess


def _newton_factor(hess):
    """Cholesky of the Hessian, regularized by an escalating ridge.

    Adds ``lam * I`` with ``lam = 1e-8 * (1 + max diag)`` and multiplies by
    10 up to 10 times.  Used only during iteration, never at the mode.
    """
    try:
        return scipy.linalg.cho_factor(hess, lower=True)
    except scipy.linalg.LinAlgError:
        pass
    lam = 1e-8 * (1.0 + np.max(np.diag(hess)))
    eye = np.eye(hess.shape[0])
    for _ in range(10):
        try:
            return scipy.linalg.cho_factor(hess + lam * eye, lower=True)
        except scipy.linalg.LinAlgError:
            lam *= 10.0
    raise NewtonError("Hessian could not be regularized to positive definite")


def find_mode(pot, theta0, cfg=None):
    """Minimize the potential by damped Newton from ``theta0``.

    Each iteration solves ``H step = -g`` (Cholesky, with a ridge if the FD
    Hessian is not positive definite away from the mode) and backtracks
    until the potential decreases.  Terminates when the gradient norm drops
    to ``cfg.grad_tol``; exceeding ``max_iter`` raises :class:`NewtonError`
    with the last iterate attached.
    """
    cfg = cfg or NewtonConfig()
    theta = np.asarray(theta0, dtype=float).copy()
    value = pot(theta)
    if not np.isfinite(value):
        raise ValueError("potential is not finite at the starting point")
    backtrack_evals = 0
    iterations = 0
    while True:
        grad = fd_gradient(pot, theta, cfg.steps_at(theta))
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= cfg.grad_tol:
            return ModeResult(theta, iterations, grad_norm, backtrack_evals)
        if iterations >= cfg.max_iter:
            raise NewtonError(
                f"no convergence in {cfg.max_iter} Newton steps "
                f"(gradient norm {grad_norm:.3e})",
                last_theta=theta,
            )
        hess = fd_hessian(pot, theta, cfg.steps_at(theta))
        factor = _newton_factor(hess)
        direction = scipy.linalg.cho_solve(factor, -grad)
        scale = 1.0
        for _ in range(cfg.max_backtracks):
            trial = theta + scale * direction
            trial_value = pot(trial)
            backtrack_evals += 1
            if np.isfinite(trial_value) and trial_value < value:
                theta, value = trial, trial_value
                break
            scale *= cfg.backtrack_factor
        else:
            raise NewtonError(
                "backtracking found no decrease along the Newton direction",
                last_theta=theta,
            )
        iterations += 1


def laplace_approximation(pot, theta0, cfg=None):
    """Gaussian fit of ``exp(-pot)``: mean at a mode, covariance from the
    inverse Hessian there.

    The covariance is obtained by Cholesky of the final FD Hessian followed
    by triangular inversion; if that Cholesky fails the fit does not exist
    and :class:`LaplaceError` is raised (no regularization is permitted at
    the mode).  ``model_evals`` counts every potential evaluation consumed,
    the final Hessian included.
    """
    cfg = cfg or NewtonConfig()
    start_count = pot.eval_count
    mode = find_mode(pot, theta0, cfg)
    hess = fd_hessian(pot, mode.theta, cfg.steps_at(mode.theta))
    try:
        factor = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError as exc:
        raise LaplaceError(
            "Hessian at the mode is not positive definite: no Gaussian fit "
            "exists for this potential"
        ) from exc
    inv_factor = scipy.linalg.solve_triangular(
        factor, np.eye(hess.shape[0]), lower=True, check_finite=False
    )
    cov = inv_factor.T @ inv_factor
    cov = 0.5 * (cov + cov.T)
    return LaplaceResult(
        approximation=GaussianDistribution(mode.theta, cov),
        model_evals=pot.eval_count - start_count,
        iterations=mode.iterations,
        final_grad_norm=mode.final_grad_norm,
        backtrack_evals=mode.backtrack_evals,
    )
