"""Hamiltonian, gradients and landscape probes for tensor disorder.

H(sigma) = N^{-(p-1)/2} <G, sigma^{(x)p}> evaluated by sequential
tensor-vector contractions. The entries are i.i.d. (not symmetrized), so the
exact gradient sums the p slot contractions rather than using a symmetry
shortcut; Euler's identity <sigma, grad H> = p H(sigma) then holds exactly.
"""

from __future__ import annotations

import numpy as np

from .disorder import Configuration, Disorder, derived_rng, sphere_project

__all__ = ["hamiltonian", "gradient", "spherical_gradient", "hessian",
           "sup_norm_estimate"]


def hamiltonian(d: Disorder, sigma: Configuration) -> float:
    """p-1 tensor-vector contractions then a dot product; O(N^p)."""
    sigma = _check_dims(d, sigma)
    a = d.entries
    for _ in range(d.p - 1):
        a = a @ sigma
    return _scale(d) * float(a @ sigma)


def gradient(d: Disorder, sigma: Configuration) -> np.ndarray:
    """Exact ambient gradient: sum over the p slots of contracting all
    other slots with sigma."""
    sigma = _check_dims(d, sigma)
    g = np.zeros(d.n)
    for slot in range(d.p):
        g += _contract_leaving(d.entries, (slot,), {}, sigma)
    return _scale(d) * g


def spherical_gradient(d: Disorder, sigma: Configuration) -> np.ndarray:
    """Ambient gradient projected orthogonal to sigma."""
    g = gradient(d, sigma)
    return g - sigma * (float(sigma @ g) / d.n)


def hessian(d: Disorder, sigma: Configuration) -> np.ndarray:
    """Exact ambient Hessian: sum over ordered pairs of distinct slots."""
    sigma = _check_dims(d, sigma)
    h = np.zeros((d.n, d.n))
    for s1 in range(d.p):
        for s2 in range(d.p):
            if s1 != s2:
                h += _contract_leaving(d.entries, (s1, s2), {}, sigma)
    return _scale(d) * h


def sup_norm_estimate(d: Disorder, j: int, n_restarts: int = 8,
                      seed: int = 0, n_steps: int = 200) -> float:
    """Best-effort estimate of sup over the sphere of the injective norm of
    the j-th derivative tensor (j in {0, 1, 2}), by Riemannian ascent from
    random starts. A lower bound on the true supremum.
    """
    if j not in (0, 1, 2):
        raise ValueError("j must be 0, 1 or 2")
    if n_restarts < 1:
        raise ValueError("need at least one restart")
    best = -np.inf
    for k in range(n_restarts):
        sigma = sphere_project(derived_rng(seed, k).standard_normal(d.n))
        best = max(best, _ascend(d, j, sigma, n_steps))
    return best


# --------------------------
# internals
# --------------------------

def _scale(d: Disorder) -> float:
    return float(d.n) ** (-(d.p - 1) / 2.0)


def _check_dims(d: Disorder, sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (d.n,):
        raise ValueError(f"configuration has shape {sigma.shape}, "
                         f"expected ({d.n},)")
    return sigma


def _contract_leaving(tensor: np.ndarray, keep: tuple[int, ...],
                      vec_at: dict[int, np.ndarray],
                      default: np.ndarray) -> np.ndarray:
    """Contract every slot not in ``keep`` with its assigned vector
    (``default`` unless overridden), leaving the kept slots free in order."""
    others = [s for s in range(tensor.ndim) if s not in keep]
    a = np.transpose(tensor, axes=others + list(keep))
    for s in others:
        a = np.tensordot(a, vec_at.get(s, default), axes=([0], [0]))
    return a


def _objective(d: Disorder, j: int, sigma: np.ndarray):
    """Value f_j(sigma) = sup_x <D^j H, x^{(x)j}> and its ambient gradient
    in sigma (Danskin: differentiate at the maximizing x)."""
    if j == 0:
        return hamiltonian(d, sigma), gradient(d, sigma)
    if j == 1:
        g = gradient(d, sigma)
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            return 0.0, np.zeros(d.n)
        x = g / norm
        return norm, hessian(d, sigma) @ x
    m = hessian(d, sigma)
    vals, vecs = np.linalg.eigh(m)
    x = vecs[:, -1]
    return float(vals[-1]), _third_directional(d, sigma, x)


def _third_directional(d: Disorder, sigma: np.ndarray,
                       x: np.ndarray) -> np.ndarray:
    """Gradient in sigma of <Hess H(sigma) x, x>: third-derivative tensor
    contracted with x, x over ordered triples of distinct slots."""
    g = np.zeros(d.n)
    p = d.p
    if p < 3:
        return g
    for s1 in range(p):
        for s2 in range(p):
            for s3 in range(p):
                if len({s1, s2, s3}) == 3:
                    g += _contract_leaving(d.entries, (s3,),
                                           {s1: x, s2: x}, sigma)
    return _scale(d) * g


def _ascend(d: Disorder, j: int, sigma: np.ndarray, n_steps: int) -> float:
    f, g = _objective(d, j, sigma)
    step = 0.5
    for _ in range(n_steps):
        rg = g - sigma * (float(sigma @ g) / d.n)
        scale = float(np.linalg.norm(rg))
        if scale < 1e-12:
            break
        improved = False
        while step > 1e-12:
            cand = sphere_project(sigma + (step * np.sqrt(d.n) / scale) * rg)
            fc, gc = _objective(d, j, cand)
            if fc > f:
                sigma, f, g = cand, fc, gc
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return f
