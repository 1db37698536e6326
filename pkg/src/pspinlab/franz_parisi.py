"""Franz-Parisi potential, its bounds and derivatives, window scans.

The potential at overlap q is computed through the variational route

    V(q) = F(xi_q) + beta^2 q^p + log(1 - q^2) / 2,

where F(xi_q) is the minimized band free energy from :mod:`parisi`. The
replica-symmetric upper bound (single atom at t = q/(1+q)) has closed form

    V_RS(q) = (beta^2 / 2)(1 + q^p) + q/2 + log(1 - q)/2.

Derivatives use the envelope identity at the numerical minimizer zeta_q:

    dV/dq = -beta^2 p q E_{x~zeta_q}[(1 - x)(q^2 + (1-q^2) x)^{p-1}]
            + beta^2 p q^{p-1} - q / (1 - q^2),
    dF/dbeta = beta E_{x~zeta_q}[xi_q(1) - xi_q(x)].

An increasing window of V on a grid accumulating at 1 is the numerical
signature of shattering; detection requires strict increase over at least
three consecutive grid points above a noise floor tied to the solver's KKT
residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScanError, SolverError
from .mixtures import band_mixture, evaluate
from .parisi import DEFAULT_GRID, MinimizeResult, minimize_cs

__all__ = ["FpPoint", "FpWindow", "fp_value", "fp_rs_bound", "fp_derivative",
           "fp_dbeta", "find_window", "window_grid", "half_band_grid"]

FP_THRESHOLD = 0.9999  # window start needed for the clustering condition


@dataclass(frozen=True)
class FpPoint:
    """Potential, RS bound, envelope derivative and band free energy at q."""

    q: float
    value: float
    rs_bound: float
    derivative: float
    band_free_energy: float
    kkt_residual: float = 0.0
    converged: bool = True


@dataclass(frozen=True)
class FpWindow:
    """Maximal strictly-increasing interval found by a window scan."""

    q_under: float
    q_bar: float
    passes_fp: bool
    n_points: int = 0

    @property
    def exists(self) -> bool:
        return self.n_points >= 3


def fp_value(p: int, beta: float, q: float,
             grid_spec: tuple[int, float] = DEFAULT_GRID) -> FpPoint:
    """Potential at overlap q via the band free energy, plus all per-point
    fields (RS bound, envelope derivative, solver diagnostics)."""
    p, q = _check_pq(p, q)
    res = _band_solution(p, beta, q, grid_spec)
    value = res.value + beta * beta * q ** p + 0.5 * math.log1p(-q * q)
    return FpPoint(
        q=q,
        value=value,
        rs_bound=fp_rs_bound(p, beta, abs(q)),
        derivative=_envelope_derivative(p, beta, q, res),
        band_free_energy=res.value,
        kkt_residual=res.kkt_residual,
        converged=res.converged,
    )


def fp_rs_bound(p: int, beta: float, q: float) -> float:
    """(beta^2/2)(1 + q^p) + q/2 + log(1-q)/2 for q in [0, 1)."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"RS bound needs q in [0, 1), got {q}")
    return 0.5 * (beta * beta * (1.0 + q ** p) + q + math.log1p(-q))


def fp_derivative(p: int, beta: float, q: float,
                  grid_spec: tuple[int, float] = DEFAULT_GRID,
                  solution: MinimizeResult | None = None) -> float:
    """Envelope derivative of the potential at q in (0, 1)."""
    p, q = _check_pq(p, q)
    if not 0.0 < abs(q) < 1.0:
        raise ValueError("derivative needs q in (0, 1)")
    if solution is None:
        solution = _band_solution(p, beta, q, grid_spec)
    return _envelope_derivative(p, beta, q, solution)


def fp_dbeta(p: int, beta: float, q: float,
             grid_spec: tuple[int, float] = DEFAULT_GRID,
             solution: MinimizeResult | None = None) -> float:
    """Temperature derivative of the band free energy,
    beta * E[xi_q(1) - xi_q(x)] under the minimizing measure."""
    p, q = _check_pq(p, q)
    if solution is None:
        solution = _band_solution(p, beta, q, grid_spec)
    xi_q = band_mixture(p, q)
    top = evaluate(xi_q, 1.0)
    exp_xi = solution.cdf.expectation(lambda t: evaluate(xi_q, t))
    return beta * (top - exp_xi)


def find_window(p: int, beta: float, q_grid: np.ndarray,
                grid_spec: tuple[int, float] = DEFAULT_GRID,
                min_run: int = 3) -> FpWindow:
    """Scan the potential on a grid in (0.99, 1) and report the maximal
    strictly increasing run of at least ``min_run`` consecutive points.

    passes_fp is set when the run starts at or above 0.9999. Any per-point
    solver failure aborts with a ScanError listing the failed points.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    if len(q_grid) < 32:
        raise ValueError("window grid needs at least 32 points")
    if np.any(np.diff(q_grid) <= 0):
        raise ValueError("window grid must be strictly increasing")
    if q_grid[0] <= 0.99 or q_grid[-1] >= 1.0:
        raise ValueError("window grid must lie inside (0.99, 1)")

    points: list[FpPoint] = []
    failures: list[tuple[float, str]] = []
    for q in q_grid:
        try:
            pt = fp_value(p, beta, q, grid_spec)
            if not pt.converged:
                failures.append((float(q), "band solver did not converge"))
            points.append(pt)
        except (SolverError, FloatingPointError) as exc:  # pragma: no cover
            failures.append((float(q), str(exc)))
    if failures:
        raise ScanError(f"{len(failures)} window grid points failed",
                        failures=failures, partial=points)

    values = np.array([pt.value for pt in points])
    noise = 10.0 * max(pt.kkt_residual for pt in points)
    start, length = _longest_increasing_run(values, noise)
    if length < min_run:
        return FpWindow(q_under=math.nan, q_bar=math.nan, passes_fp=False,
                        n_points=0)
    q_under = float(q_grid[start])
    q_bar = float(q_grid[start + length - 1])
    return FpWindow(q_under=q_under, q_bar=q_bar,
                    passes_fp=q_under >= FP_THRESHOLD, n_points=length)


def window_grid(p: int, n: int = 48, v_max: float = 5.0,
                v_min: float = 0.05) -> np.ndarray:
    """Geometric grid toward 1 parametrized by v = p(1 - q), clipped to
    stay inside (0.99, 1); for small p this degrades to a generic geometric
    grid on (0.99, 1)."""
    if p < 3:
        raise ValueError("p must be >= 3")
    hi = min(v_max / p, 0.0099)
    lo = min(v_min / p, hi / 4.0)
    one_minus_q = np.exp(np.linspace(math.log(hi), math.log(lo), n))
    return 1.0 - one_minus_q


def half_band_grid(p: int, n: int = 32) -> np.ndarray:
    """Grid covering [1 - 1/(2p), 1): where the potential derivative is
    provably positive for large p, beta near the static boundary."""
    if p < 51:
        raise ValueError("half-band grid lies inside (0.99, 1) only for p >= 51")
    return window_grid(p, n=n, v_max=0.5, v_min=0.02)


# --------------------------
# internals
# --------------------------

def _band_solution(p: int, beta: float, q: float,
                   grid_spec: tuple[int, float]) -> MinimizeResult:
    try:
        return minimize_cs(band_mixture(p, q), beta, grid_spec)
    except SolverError as exc:
        raise SolverError(
            f"band solver failed at p={p}, beta={beta}, q={q}: {exc}",
            bracket=exc.bracket, best=exc.best) from exc


def _envelope_derivative(p: int, beta: float, q: float,
                         res: MinimizeResult) -> float:
    if q == 0.0:
        return 0.0
    b2 = beta * beta
    q2 = q * q

    def integrand(x: np.ndarray) -> np.ndarray:
        base = q2 + (1.0 - q2) * x
        with np.errstate(divide="ignore"):
            powed = np.exp((p - 1) * np.log(base, where=base > 0,
                                            out=np.full_like(base, -np.inf)))
        return (1.0 - x) * powed

    expect = res.cdf.expectation(integrand)
    return (-b2 * p * q * expect + b2 * p * q ** (p - 1) - q / (1.0 - q2))


def _longest_increasing_run(values: np.ndarray, noise: float) -> tuple[int, int]:
    """(start, n_points) of the longest run with every step > noise."""
    best_start, best_len = 0, 1
    start, length = 0, 1
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > noise:
            length += 1
        else:
            start, length = i, 1
        if length > best_len:
            best_start, best_len = start, length
    return best_start, best_len


def _check_pq(p, q) -> tuple[int, float]:
    if int(p) != p or int(p) < 2:
        raise ValueError(f"p must be an integer >= 2, got {p!r}")
    q = float(q)
    if not abs(q) < 1.0:
        raise ValueError(f"overlap must satisfy |q| < 1, got {q}")
    return int(p), q
