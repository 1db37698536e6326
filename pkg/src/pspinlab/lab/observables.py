"""Correlation functions, overlap/transport chaos estimators, W2 distance."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .. import phase
from .disorder import Configuration, Disorder, correlate_disorder, derived_rng
from .langevin import LangevinConfig, langevin_run
from .samplers import ReplicaExchange, equilibrium_sample

__all__ = ["ChaosConfig", "correlation_curve", "overlap_chaos", "w2_empirical",
           "chaos_scan"]

W2_MAX_POINTS = 1024  # keeps the cubic assignment solver under a minute


@dataclass(frozen=True)
class ChaosConfig:
    epsilon: float
    n_samples: int
    sampler: str = "replica-exchange"
    eta: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        e = self.epsilon
        object.__setattr__(self, "eta", float(np.sqrt(2.0 * e - e * e)))


def correlation_curve(d: Disorder, beta: float, cfg: LangevinConfig,
                      n_trajectories: int, seed: int = 0,
                      method: str = "replica-exchange",
                      threads: int = 1) -> list[tuple[float, float, float]]:
    """C_N(t) = mean over stationary trajectories of <sigma_0, sigma_t>/N,
    with standard errors, on the monotone time grid of recorded strides.
    Trajectories are independent and run on ``threads`` workers."""
    if n_trajectories < 1:
        raise ValueError("need at least one trajectory")
    items = [(d, beta, cfg, method, seed, i) for i in range(n_trajectories)]
    results = _map_parallel(_one_trajectory, items, threads)
    times = results[0][0]
    arr = np.asarray([overlaps for _, overlaps in results])
    mean = arr.mean(axis=0)
    stderr = (arr.std(axis=0, ddof=1) / np.sqrt(n_trajectories)
              if n_trajectories > 1 else np.zeros(arr.shape[1]))
    return list(zip(times, mean.tolist(), stderr.tolist()))


def _one_trajectory(item):
    d, beta, cfg, method, seed, i = item
    eq_seed = int(derived_rng(seed, i, 0).integers(2 ** 63))
    dyn_seed = int(derived_rng(seed, i, 1).integers(2 ** 63))
    sigma0, _ = equilibrium_sample(d, beta, method=method, seed=eq_seed)
    traj = langevin_run(d, sigma0,
                        LangevinConfig(beta=cfg.beta, step=cfg.step,
                                       n_steps=cfg.n_steps,
                                       record_every=cfg.record_every,
                                       seed=dyn_seed))
    times = [t for t, _ in traj]
    return times, [float(sigma0 @ s) / d.n for _, s in traj]


def _map_parallel(fn, items, threads: int) -> list:
    if threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def overlap_chaos(d: Disorder, beta: float, chaos: ChaosConfig,
                  seed: int = 0, burn_in: int = 300,
                  thin: int = 20) -> tuple[float, float]:
    """E[(<sigma, sigma'>/N)^2] for sigma ~ Gibbs(G), sigma' ~ Gibbs(G^eps),
    estimated from paired draws of two independent chains."""
    _warn_if_low_temperature(d.p, beta)
    d_eps = correlate_disorder(d, chaos.epsilon,
                               int(derived_rng(seed, "eps").integers(2 ** 63)))
    if chaos.sampler == "replica-exchange":
        a = _re_draws(d, beta, chaos.n_samples, derived_seed=(seed, 0),
                      burn_in=burn_in, thin=thin)
        b = _re_draws(d_eps, beta, chaos.n_samples, derived_seed=(seed, 1),
                      burn_in=burn_in, thin=thin)
    else:
        a = [equilibrium_sample(d, beta, method=chaos.sampler,
                                seed=int(derived_rng(seed, 0, i).integers(2 ** 63)))[0]
             for i in range(chaos.n_samples)]
        b = [equilibrium_sample(d_eps, beta, method=chaos.sampler,
                                seed=int(derived_rng(seed, 1, i).integers(2 ** 63)))[0]
             for i in range(chaos.n_samples)]
    sq = np.array([(float(x @ y) / d.n) ** 2 for x, y in zip(a, b)])
    stderr = (sq.std(ddof=1) / np.sqrt(len(sq))) if len(sq) > 1 else 0.0
    return float(sq.mean()), float(stderr)


def w2_empirical(a: list[Configuration], b: list[Configuration]) -> float:
    """Exact normalized Wasserstein-2 distance between the two empirical
    uniform measures: optimal assignment under cost |x - y|^2 / N."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 2:
        raise ValueError("need two equal-size lists of configurations")
    m = a_arr.shape[0]
    if m > W2_MAX_POINTS:
        raise ValueError(f"at most {W2_MAX_POINTS} points per side, got {m}")
    cost = cdist(a_arr, b_arr, "sqeuclidean") / a_arr.shape[1]
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].mean()))


def chaos_scan(n: int, p: int, beta: float, epsilons, n_samples: int,
               n_disorders: int, seed: int = 0, burn_in: int = 300,
               thin: int = 15, threads: int = 1) -> list[dict]:
    """Overlap and transport chaos estimates per epsilon, averaged over
    disorders. For each disorder the unperturbed draws are shared across
    the epsilon column, so the epsilon = 0 row is the independent-samples
    baseline for the same measure. Disorders run on ``threads`` workers."""
    eps = sorted(float(e) for e in epsilons)
    items = [(n, p, beta, eps, n_samples, seed, j, burn_in, thin)
             for j in range(n_disorders)]
    per_disorder = _map_parallel(_chaos_one_disorder, items, threads)
    rows = []
    for i, e in enumerate(eps):
        ovl = np.asarray([r[i][0] for r in per_disorder])
        w2 = np.asarray([r[i][1] for r in per_disorder])
        k = len(ovl)
        rows.append({
            "epsilon": e,
            "overlap_sq": float(ovl.mean()),
            "overlap_sq_stderr": float(ovl.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0,
            "w2": float(w2.mean()),
            "w2_stderr": float(w2.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0,
        })
    return rows


def _chaos_one_disorder(item):
    n, p, beta, eps, n_samples, seed, j, burn_in, thin = item
    from .disorder import sample_disorder

    d = sample_disorder(n, p,
                        seed=int(derived_rng(seed, j, "d").integers(2 ** 63)))
    base = _re_draws(d, beta, n_samples, derived_seed=(seed, j, 0),
                     burn_in=burn_in, thin=thin)
    out = []
    for e in eps:
        d_eps = correlate_disorder(
            d, e,
            seed=int(derived_rng(seed, j, "eps", int(e * 1e9)).integers(2 ** 63)))
        other = _re_draws(d_eps, beta, n_samples,
                          derived_seed=(seed, j, 1, int(e * 1e9)),
                          burn_in=burn_in, thin=thin)
        sq = [(float(x @ y) / n) ** 2 for x, y in zip(base, other)]
        out.append((float(np.mean(sq)), w2_empirical(base, other)))
    return out


def _re_draws(d: Disorder, beta: float, n: int, derived_seed: tuple,
              burn_in: int, thin: int) -> list[Configuration]:
    sampler = ReplicaExchange(
        d, beta, seed=int(derived_rng(*derived_seed).integers(2 ** 63)))
    sampler.run(burn_in=burn_in)
    draws = sampler.draw(n, thin=thin)
    sampler.check_mixing()
    return draws


def _warn_if_low_temperature(p: int, beta: float) -> None:
    try:
        bc, _ = phase.beta_c(p)
    except ValueError:
        return
    if beta >= bc:
        warnings.warn(f"beta = {beta} is at or beyond the static boundary "
                      f"{bc:.4f}; equilibrium sampling is unreliable",
                      stacklevel=3)
