"""Variational free energy over Parisi measures (Crisanti-Sommers form).

For a probability measure zeta on [0, 1) with CDF x(t) = zeta([0, t]) and
top of support q_hat, the functional is

    P(zeta) = (1/2) [ beta^2 Int_0^1 xi'(t) x(t) dt
                      + Int_0^{q_hat} dt / phi(t) + log(1 - q_hat) ],
    phi(t) = Int_t^1 x(s) ds,

and the free energy is F = min over zeta of P. Both integrals are exact in
closed form for atomic measures: x is a step function, so the first term is
a finite sum over inter-atom segments and phi is piecewise linear, making
dt/phi a log of a linear function per segment (or length/phi where the
local CDF is constant). No quadrature error anywhere.

Minimization is over CDF values on a fixed grid 0 = g_0 < ... < g_m = q_max.
Replacing q_hat by the fixed endpoint q_max (integrating dt/phi up to q_max
and adding log(1 - q_max)) reproduces P exactly whenever the true q_hat is
<= q_max, because on [q_hat, q_max] the integrand is 1/(1-t) and the surplus
integral telescopes against the log. With the endpoint fixed, the objective
is smooth and convex in the CDF vector (the first term is linear, 1/phi is
a convex decreasing function of an affine map), so projected gradient with
isotonic projection onto the monotone chain converges globally.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import FeasibilityError, TruncationWarning
from .mixtures import MixtureFn, evaluate

__all__ = ["ParisiMeasure", "CdfOnGrid", "MinimizeResult", "cs_functional",
           "rs_value", "minimize_cs", "minimizer_expectation", "make_grid",
           "DEFAULT_GRID"]

DEFAULT_GRID = (512, 1.0 - 1e-4)


@dataclass(frozen=True)
class ParisiMeasure:
    """Atomic probability measure on [0, 1): sorted locations and weights."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.atleast_1d(np.asarray(self.locations, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if loc.shape != w.shape or loc.ndim != 1 or loc.size == 0:
            raise ValueError("locations and weights must be matching 1-d vectors")
        if np.any(np.diff(loc) <= 0):
            raise ValueError("atom locations must be strictly increasing")
        if loc[0] < 0.0 or loc[-1] >= 1.0:
            raise ValueError("atom locations must lie in [0, 1)")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "locations", loc.copy())
        object.__setattr__(self, "weights", w.copy())

    @classmethod
    def dirac(cls, t: float) -> "ParisiMeasure":
        return cls(np.array([t]), np.array([1.0]))

    @property
    def q_hat(self) -> float:
        return float(self.locations[-1])


@dataclass(frozen=True)
class CdfOnGrid:
    """Nondecreasing CDF values on a grid 0 = g_0 < ... < g_m = q_max < 1."""

    grid: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        x = np.asarray(self.cdf, dtype=float)
        if g.shape != x.shape or g.ndim != 1 or g.size < 2:
            raise ValueError("grid and cdf must be matching 1-d vectors")
        if g[0] != 0.0 or not np.all(np.diff(g) > 0) or g[-1] >= 1.0:
            raise ValueError("grid must be strictly increasing from 0 to q_max < 1")
        if np.any(np.diff(x) < -1e-12) or x[0] < -1e-12 or x[-1] != 1.0:
            raise ValueError("cdf must be a monotone chain ending at 1")
        object.__setattr__(self, "grid", g.copy())
        object.__setattr__(self, "cdf", np.clip(x, 0.0, 1.0))

    def atom_weights(self) -> np.ndarray:
        """Mass placed at each grid point where the CDF jumps."""
        w = np.empty_like(self.cdf)
        w[0] = self.cdf[0]
        w[1:] = np.diff(self.cdf)
        return w

    def expectation(self, g: Callable) -> float:
        vals = np.broadcast_to(np.asarray(g(self.grid), dtype=float),
                               self.grid.shape)
        return float(self.atom_weights() @ vals)


@dataclass(frozen=True)
class MinimizeResult:
    value: float
    cdf: CdfOnGrid
    kkt_residual: float
    converged: bool
    iterations: int


def rs_value(t: float, xi: MixtureFn, beta: float) -> float:
    """Value at the single atom delta_t:
    (beta^2/2)(xi(1) - xi(t)) + t/(2(1-t)) + log(1-t)/2."""
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"atom location must lie in [0, 1), got {t}")
    b2 = beta * beta
    return 0.5 * (b2 * (evaluate(xi, 1.0) - evaluate(xi, t))
                  + t / (1.0 - t) + math.log1p(-t))


def cs_functional(zeta: ParisiMeasure, xi: MixtureFn, beta: float,
                  q_top: float | None = None) -> float:
    """Exact functional value on an atomic measure.

    ``q_top`` extends the dt/phi integral to a fixed endpoint >= q_hat and
    replaces log(1 - q_hat) by log(1 - q_top); by the telescoping identity
    this leaves the value unchanged. Default uses q_hat itself.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    loc, w = zeta.locations, zeta.weights
    q_hat = zeta.q_hat
    if q_top is None:
        q_top = q_hat
    elif q_top < q_hat or q_top >= 1.0:
        raise ValueError("q_top must lie in [q_hat, 1)")

    cum = np.cumsum(w)  # CDF value on each inter-atom segment
    # first term over segments [loc_i, loc_{i+1}] with final segment to 1
    edges = np.concatenate([loc, [1.0]])
    xi_edges = evaluate(xi, edges)
    first = beta * beta * float(cum @ np.diff(xi_edges))

    # phi at the atom points, from the top down; phi(q_hat) = 1 - q_hat
    n = len(loc)
    phi = np.empty(n)
    phi[-1] = 1.0 - q_hat
    for i in range(n - 2, -1, -1):
        phi[i] = phi[i + 1] + cum[i] * (loc[i + 1] - loc[i])
    if np.any(phi <= 0):
        raise FeasibilityError("phi must stay positive on [0, q_hat]")

    integral = 0.0
    if loc[0] > 0.0:  # zero-CDF segment [0, loc_0]: phi constant there
        integral += loc[0] / phi[0]
    for i in range(n - 1):  # slope cum[i] > 0: closed-form log
        integral += (math.log(phi[i]) - math.log(phi[i + 1])) / cum[i]
    if q_top > q_hat:  # full-CDF segment: phi(t) = 1 - t
        integral += math.log1p(-q_hat) - math.log1p(-q_top)

    return 0.5 * (first + integral + math.log1p(-q_top))


def make_grid(m: int, q_max: float = DEFAULT_GRID[1]) -> np.ndarray:
    """Optimization grid: uniform on [0, 0.9] plus geometric accumulation
    of 1 - g toward q_max; band mixtures at large p need resolution near 1."""
    if m < 16:
        raise ValueError("grid needs at least 16 intervals")
    if not 0.0 < q_max < 1.0:
        raise ValueError("q_max must lie in (0, 1)")
    if q_max <= 0.92:
        return np.linspace(0.0, q_max, m + 1)
    m_u = int(0.6 * m)
    uniform = np.linspace(0.0, 0.9, m_u, endpoint=False)
    geo = 1.0 - np.exp(np.linspace(math.log(0.1), math.log(1.0 - q_max),
                                   m + 1 - m_u))
    return np.unique(np.concatenate([uniform, geo]))


def minimize_cs(xi: MixtureFn, beta: float,
                grid_spec: tuple[int, float] = DEFAULT_GRID,
                max_iter: int = 20000, tol_rel: float = 1e-10,
                tol_kkt: float = 1e-7) -> MinimizeResult:
    """Minimize the discretized functional over monotone CDF vectors.

    Accelerated projected gradient (backtracking line search, adaptive
    restart) with projection onto {0 <= x_0 <= ... <= x_{m-1} <= 1} given by
    clipped isotonic regression. Convergence requires both objective
    stagnation below ``tol_rel`` and max KKT violation below ``tol_kkt``; on
    budget exhaustion the best iterate is returned with converged=False.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    m, q_max = int(grid_spec[0]), float(grid_spec[1])
    grid = make_grid(m, q_max)
    prob = _CsProblem(xi, beta, grid)

    x = np.ones(len(grid) - 1)  # delta_0 start: exact in the RS phase
    fx, _ = prob.value_grad(x)
    y, t_acc, step = x.copy(), 1.0, 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        fy, gy = prob.value_grad(y)
        while True:
            xn = _project_chain(y - step * gy)
            fxn, _ = prob.value_grad(xn)
            d = xn - y
            if fxn <= fy + gy @ d + (d @ d) / (2.0 * step) + 1e-18:
                break
            step *= 0.5
            if step < 1e-18:
                break
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        y_next = xn + ((t_acc - 1.0) / t_next) * (xn - x)
        if fxn > fx:  # restart momentum from the best iterate
            y, t_acc = x.copy(), 1.0
            continue
        rel = abs(fx - fxn) / max(abs(fxn), 1.0)
        x, fx = xn, fxn
        y, t_acc = y_next, t_next
        step *= 1.3
        if rel < tol_rel and it > 5:
            if _kkt_residual(prob, x) < tol_kkt:
                converged = True
                break

    fx, gx = prob.value_grad(x)
    kkt = _kkt_residual(prob, x, gx)
    cdf = CdfOnGrid(grid, np.concatenate([x, [1.0]]))
    boundary_mass = 1.0 - x[-1]
    if boundary_mass > 1e-6:
        warnings.warn("minimizer support reached q_max "
                      f"(boundary mass {boundary_mass:.2e}); increase q_max",
                      TruncationWarning, stacklevel=2)
    return MinimizeResult(value=float(fx), cdf=cdf, kkt_residual=float(kkt),
                          converged=converged, iterations=it)


def minimizer_expectation(cdf: CdfOnGrid, g: Callable) -> float:
    """Expectation of g under the atomic measure implied by the CDF."""
    return cdf.expectation(g)


# --------------------------
# discretized objective
# --------------------------

class _CsProblem:
    """Value and analytic gradient of the fixed-endpoint objective.

    With x the CDF on grid[:-1] (grid[-1] pinned to CDF 1), lengths
    L_j = g_{j+1} - g_j and phi_j = (1 - q_max) + sum_{i >= j} x_i L_i:

        2 P(x) = beta^2 (x . dxi + xi(1) - xi(q_max)) + log(1 - q_max)
                 + sum_j (L_j / phi_{j+1}) f(u_j),    u_j = x_j L_j / phi_{j+1},

    where f(u) = log(1+u)/u. Differentiating, a shift of x_k moves phi_j for
    all j <= k in lockstep, and d seg_j / d(common phi shift) collapses to
    -L_j / (phi_j phi_{j+1}) with no cancellation.
    """

    def __init__(self, xi: MixtureFn, beta: float, grid: np.ndarray):
        self.L = np.diff(grid)
        xg = evaluate(xi, grid)
        self.dxi = np.diff(xg)
        self.b2 = beta * beta
        self.const = self.b2 * (evaluate(xi, 1.0) - xg[-1]) + math.log1p(-grid[-1])
        self.phi_end = 1.0 - grid[-1]

    def value_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        xl = x * self.L
        phi = np.empty(len(x) + 1)
        phi[-1] = self.phi_end
        phi[:-1] = self.phi_end + np.cumsum(xl[::-1])[::-1]
        ratio = self.L / phi[1:]
        u = x * ratio
        val = 0.5 * (self.b2 * (x @ self.dxi)
                     + (ratio * _f_logratio(u)).sum() + self.const)
        dseg = ratio * ratio * _df_logratio(u)
        shift = -self.L / (phi[:-1] * phi[1:])
        prefix = np.concatenate([[0.0], np.cumsum(shift[:-1])])
        grad = 0.5 * (self.b2 * self.dxi + dseg + self.L * prefix)
        return float(val), grad


def _f_logratio(u: np.ndarray) -> np.ndarray:
    # log(1+u)/u, series below 1e-6 to avoid 0/0
    out = np.empty_like(u)
    small = u < 1e-6
    us = u[small]
    out[small] = 1.0 - 0.5 * us + us * us / 3.0
    ub = u[~small]
    out[~small] = np.log1p(ub) / ub
    return out


def _df_logratio(u: np.ndarray) -> np.ndarray:
    # d/du of log(1+u)/u, series below 1e-4 where the closed form cancels
    out = np.empty_like(u)
    small = u < 1e-4
    us = u[small]
    out[small] = -0.5 + 2.0 * us / 3.0 - 0.75 * us * us
    ub = u[~small]
    out[~small] = (ub / (1.0 + ub) - np.log1p(ub)) / (ub * ub)
    return out


def _project_chain(v: np.ndarray) -> np.ndarray:
    # euclidean projection onto the monotone chain intersected with [0, 1];
    # clipping the unconstrained isotonic fit is exact for box bounds
    return np.clip(isotonic_regression(v).x, 0.0, 1.0)


def _kkt_residual(prob: _CsProblem, x: np.ndarray,
                  grad: np.ndarray | None = None) -> float:
    if grad is None:
        _, grad = prob.value_grad(x)
    return float(np.max(np.abs(x - _project_chain(x - grad))))
