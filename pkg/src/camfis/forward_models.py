"""1D PDE forward models at selectable mesh fidelity.

Two parameter-to-observable maps over six-dimensional coefficient fields on
(0, 1):

* steady diffusion ``-(exp(k) u')' = 1`` with ``u(0) = 0`` and a flux-free
  right end, discretized by linear finite elements (tridiagonal, solved by
  banded Cholesky), observed at 120 equispaced points;
* a clamped-free fourth-order beam ``(E u'')'' = 1`` discretized by second
  order finite differences (pentadiagonal, banded LU), observed at 40
  equispaced points.

Both coefficient fields are smoothed piecewise constants built from logistic
blends, so they are infinitely differentiable in ``x`` and the observable
maps are smooth in the parameters.  Fidelity is the number of mesh
intervals ``n`` (mesh width ``h = 1/n``); both discretizations converge at
second order in ``h``.
"""

import numpy as np
import scipy.linalg

__all__ = [
    "NUM_SEGMENTS",
    "SMOOTHING_WIDTH",
    "BREAKPOINTS",
    "HEAT_OBSERVATION_POINTS",
    "BEAM_OBSERVATION_POINTS",
    "sigmoid_indicator",
    "SmoothedPiecewiseField",
    "heat_solve",
    "heat_observe",
    "eb_solve",
    "eb_observe",
]

NUM_SEGMENTS = 6
SMOOTHING_WIDTH = 0.005
# Segment boundaries (i-1)/6, i = 1..7; the blends use the interior five.
BREAKPOINTS = np.arange(NUM_SEGMENTS + 1) / NUM_SEGMENTS

HEAT_OBSERVATION_POINTS = np.arange(1, 121) / 120.0   # excludes the fixed x=0
BEAM_OBSERVATION_POINTS = np.arange(40) / 39.0        # (i-1)/39, i = 1..40

_GAUSS_OFFSET = 0.5 / np.sqrt(3.0)  # 2-point Gauss nodes at 0.5 +/- this


def sigmoid_indicator(x, alpha, width=SMOOTHING_WIDTH):
    """Logistic step ``1 / (1 + exp(-(x - alpha)/width))`` in (0, 1).

    Evaluated overflow-safe on both tails; accepts scalars or arrays.
    """
    t = (np.asarray(x, dtype=float) - alpha) / width
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    ez = np.exp(t[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


class SmoothedPiecewiseField:
    """Smoothed piecewise-constant field with six segment values.

    Segment ``i`` of (0,1) carries value ``values[i]``; neighboring values
    are blended through logistic steps of the given width, so the field is
    smooth, stays within the range of the segment values, and matches each
    segment value away from the breakpoints.
    """

    def __init__(self, values, width=SMOOTHING_WIDTH):
        values = np.asarray(values, dtype=float)
        if values.shape != (NUM_SEGMENTS,):
            raise ValueError(f"expected {NUM_SEGMENTS} segment values")
        self.values = values
        self.width = float(width)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        field = np.full_like(x, self.values[0]) if x.ndim else self.values[0]
        for i in range(1, NUM_SEGMENTS):
            blend = sigmoid_indicator(x, BREAKPOINTS[i], self.width)
            field = (1.0 - blend) * field + blend * self.values[i]
        return field if x.ndim else float(field)


def _check_fidelity(n, minimum):
    n = int(n)
    if n < minimum:
        raise ValueError(f"fidelity must be at least {minimum} intervals, got {n}")
    return n


def heat_solve(theta, n):
    """Nodal solution of ``-(exp(k) u')' = 1`` on ``n`` linear elements.

    The element stiffness integrates ``exp(k)`` by 2-point Gauss quadrature
    (keeps the observables second-order accurate for the smooth field); the
    unit load integrates exactly.  The Dirichlet node is eliminated and the
    SPD tridiagonal system is solved by banded Cholesky.  Returns the
    ``n + 1`` nodal values, ``u(0) = 0`` included.
    """
    n = _check_fidelity(n, 4)
    theta = np.asarray(theta, dtype=float)
    h = 1.0 / n
    field = SmoothedPiecewiseField(theta)
    lefts = np.arange(n) * h
    gauss = np.concatenate(
        [lefts + (0.5 - _GAUSS_OFFSET) * h, lefts + (0.5 + _GAUSS_OFFSET) * h]
    )
    coeff = np.exp(field(gauss))
    # Integrated conductivity per element: (h/2) (a(g1) + a(g2)).
    w = 0.5 * h * (coeff[:n] + coeff[n:])

    # Unknowns u_1..u_n after eliminating u_0 = 0.
    diag = np.empty(n)
    diag[:-1] = (w[:-1] + w[1:]) / h**2
    diag[-1] = w[-1] / h**2
    upper = -w[1:] / h**2
    rhs = np.full(n, h)
    rhs[-1] = 0.5 * h

    ab = np.zeros((2, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    interior = scipy.linalg.solveh_banded(ab, rhs, lower=False, check_finite=False)
    return np.concatenate([[0.0], interior])


def heat_observe(theta, n):
    """Diffusion observables: the FE solution at 120 equispaced points.

    Evaluation of the piecewise-linear finite element function, i.e. linear
    interpolation between nodes (a mesh node is reproduced exactly).
    """
    nodal = heat_solve(theta, n)
    nodes = np.linspace(0.0, 1.0, int(n) + 1)
    return np.interp(HEAT_OBSERVATION_POINTS, nodes, nodal)


def eb_solve(theta, n):
    """Grid solution of ``(E u'')'' = 1`` with a clamped left and free right end.

    ``E`` is the smoothed piecewise field over ``|theta_i|``, evaluated at the
    grid points.  The operator is the composition of two second differences;
    the boundary closures are all second order:

    * ``u(0) = 0`` directly, ``u'(0) = 0`` via the ghost value ``u_{-1} = u_1``;
    * ``u''(1) = 0`` via ``u_{n+1} = 2 u_n - u_{n-1}`` (which makes the
      moment vanish at the tip), ``u'''(1) = 0`` via the central third
      difference, which closes the last row with ``E`` at the ghost point
      ``1 + h``.

    The pentadiagonal system is solved by banded LU.  Returns the ``n + 1``
    grid values.
    """
    n = _check_fidelity(n, 6)
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) < 1e-8):
        raise ValueError("stiffness parameters must be bounded away from zero")
    h = 1.0 / n
    field = SmoothedPiecewiseField(np.abs(theta))
    x = np.linspace(0.0, 1.0, n + 1)
    E = field(x)
    E_ghost = field(1.0 + h)

    size = n + 1
    main = np.zeros(size)
    sup1 = np.zeros(size - 1)
    sup2 = np.zeros(size - 2)
    sub1 = np.zeros(size - 1)
    sub2 = np.zeros(size - 2)
    rhs = np.ones(size)

    # Clamped end: u_0 = 0.
    main[0] = 1.0
    rhs[0] = 0.0

    # Row 1 folds in the slope ghost u_{-1} = u_1.
    sub1[0] = -2.0 * E[0] - 2.0 * E[1]
    main[1] = 2.0 * E[0] + 4.0 * E[1] + E[2]
    sup1[1] = -2.0 * E[1] - 2.0 * E[2]
    sup2[1] = E[2]

    # Interior rows j = 2..n-2: E_{j-1} u_{j-2} - 2(E_{j-1}+E_j) u_{j-1}
    # + (E_{j-1}+4E_j+E_{j+1}) u_j - 2(E_j+E_{j+1}) u_{j+1} + E_{j+1} u_{j+2}.
    j = np.arange(2, n - 1)
    sub2[j - 2] = E[j - 1]
    sub1[j - 1] = -2.0 * (E[j - 1] + E[j])
    main[j] = E[j - 1] + 4.0 * E[j] + E[j + 1]
    sup1[j] = -2.0 * (E[j] + E[j + 1])
    sup2[j] = E[j + 1]

    # Row n-1: the tip moment vanishes, so the w_n term drops out.
    sub2[n - 3] = E[n - 2]
    sub1[n - 2] = -2.0 * (E[n - 2] + E[n - 1])
    main[n - 1] = E[n - 2] + 4.0 * E[n - 1]
    sup1[n - 1] = -2.0 * E[n - 1]

    # Row n: both tip ghosts eliminated; E appears at the ghost point 1 + h.
    tip = E[n - 1] + E_ghost
    sub2[n - 2] = tip
    sub1[n - 1] = -2.0 * tip
    main[n] = tip

    scale = 1.0 / h**4
    ab = np.zeros((5, size))
    ab[0, 2:] = sup2 * scale
    ab[1, 1:] = sup1 * scale
    ab[2, :] = main * scale
    ab[2, 0] = 1.0  # the Dirichlet row is not scaled
    ab[3, :-1] = sub1 * scale
    ab[4, :-2] = sub2 * scale
    try:
        return scipy.linalg.solve_banded((2, 2), ab, rhs, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise RuntimeError("beam system is singular") from exc


def eb_observe(theta, n):
    """Beam observables: the linear grid interpolant at 40 equispaced points
    ``(i - 1)/39``, ``i = 1..40`` (the first point is the clamped end)."""
    grid = eb_solve(theta, n)
    x = np.linspace(0.0, 1.0, int(n) + 1)
    return np.interp(BEAM_OBSERVATION_POINTS, x, grid)
