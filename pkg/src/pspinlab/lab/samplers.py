"""Approximate Gibbs samplers: replica exchange and Langevin burn-in.

The Gibbs measure is ~ exp(beta H) against the uniform measure on the
sphere. Replica exchange runs a geometric ladder of K inverse temperatures
from beta/8 up to beta, each rung doing full-vector sphere-Metropolis moves
(isotropic Gaussian perturbation then renormalization, a symmetric proposal
on the sphere), with neighbor swap attempts every sweep. Proposal scales
adapt toward a target acceptance during burn-in only, so the post-burn-in
chain satisfies detailed balance.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..errors import MixingWarning
from .disorder import (Configuration, Disorder, derived_rng,
                       random_configuration, sphere_project)
from .energy import hamiltonian
from .langevin import LangevinConfig, langevin_run

__all__ = ["ReplicaExchange", "equilibrium_sample"]

METHODS = ("replica-exchange", "langevin-equilibrated")


class ReplicaExchange:
    """Parallel tempering on the sphere with a geometric temperature ladder."""

    def __init__(self, d: Disorder, beta: float, n_rungs: int = 8,
                 seed: int = 0, target_accept: float = 0.4,
                 initial_step: float = 0.5):
        if beta < 0:
            raise ValueError("beta must be >= 0")
        if n_rungs < 2:
            raise ValueError("need at least two rungs")
        self.d = d
        self.beta = float(beta)
        ratio = (1.0 / 8.0) ** (1.0 / (n_rungs - 1))
        self.betas = beta * ratio ** np.arange(n_rungs - 1, -1, -1)
        self.rng = derived_rng(seed, "replica-exchange")
        self.configs = [random_configuration(d.n, self.rng)
                        for _ in range(n_rungs)]
        self.energies = [hamiltonian(d, s) for s in self.configs]
        self.steps = np.full(n_rungs, float(initial_step))
        self.target_accept = target_accept
        self._accepts = np.zeros(n_rungs)
        self._proposals = np.zeros(n_rungs)
        self._swap_accepts = np.zeros(n_rungs - 1)
        self._swap_attempts = np.zeros(n_rungs - 1)
        self.energy_trace: list[float] = []

    def sweep(self, adapt: bool = False) -> None:
        """One Metropolis proposal per rung, then neighbor swap attempts."""
        n = self.d.n
        for k, bk in enumerate(self.betas):
            prop = sphere_project(self.configs[k]
                                  + self.steps[k] * self.rng.standard_normal(n))
            e_prop = hamiltonian(self.d, prop)
            self._proposals[k] += 1
            accepted = np.log(self.rng.random()) < bk * (e_prop - self.energies[k])
            if accepted:
                self.configs[k] = prop
                self.energies[k] = e_prop
                self._accepts[k] += 1
            if adapt:
                # stochastic approximation toward the target acceptance rate
                move = (1.0 - self.target_accept) if accepted \
                    else -self.target_accept
                self.steps[k] *= math.exp(0.1 * move)
        for k in range(len(self.betas) - 1):
            self._swap_attempts[k] += 1
            log_r = (self.betas[k + 1] - self.betas[k]) \
                * (self.energies[k] - self.energies[k + 1])
            if np.log(self.rng.random()) < log_r:
                self.configs[k], self.configs[k + 1] = \
                    self.configs[k + 1], self.configs[k]
                self.energies[k], self.energies[k + 1] = \
                    self.energies[k + 1], self.energies[k]
                self._swap_accepts[k] += 1
        self.energy_trace.append(self.energies[-1])

    def run(self, burn_in: int = 500) -> None:
        for _ in range(burn_in):
            self.sweep(adapt=True)

    def draw(self, n_samples: int, thin: int = 20) -> list[Configuration]:
        """Thinned samples at the target inverse temperature."""
        out = []
        for _ in range(n_samples):
            for _ in range(thin):
                self.sweep(adapt=False)
            out.append(self.configs[-1].copy())
        return out

    def diagnostics(self) -> dict:
        with np.errstate(invalid="ignore", divide="ignore"):
            acc = np.where(self._proposals > 0,
                           self._accepts / np.maximum(self._proposals, 1), 0.0)
            swap = np.where(self._swap_attempts > 0,
                            self._swap_accepts / np.maximum(self._swap_attempts, 1),
                            0.0)
        return {
            "betas": self.betas.tolist(),
            "acceptance": acc.tolist(),
            "swap_acceptance": swap.tolist(),
            "steps": self.steps.tolist(),
            "energy_trace": self.energy_trace[-200:],
        }

    def check_mixing(self) -> None:
        diag = self.diagnostics()
        swaps = np.asarray(diag["swap_acceptance"])
        if self._swap_attempts.min() >= 50 and np.any(swaps < 0.01):
            warnings.warn(f"swap acceptance below 1% on some rung: {swaps}",
                          MixingWarning, stacklevel=3)


def equilibrium_sample(d: Disorder, beta: float,
                       method: str = "replica-exchange", seed: int = 0,
                       burn_in: int = 500,
                       langevin_step: float = 0.01,
                       langevin_time: float = 30.0
                       ) -> tuple[Configuration, dict]:
    """One approximate Gibbs sample with sampler diagnostics attached."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method == "replica-exchange":
        sampler = ReplicaExchange(d, beta, seed=seed)
        sampler.run(burn_in=burn_in)
        sample = sampler.draw(1, thin=1)[0]
        sampler.check_mixing()
        return sample, sampler.diagnostics()
    start = random_configuration(d.n, derived_rng(seed, "langevin-init"))
    n_steps = max(int(langevin_time / langevin_step), 1)
    cfg = LangevinConfig(beta=beta, step=langevin_step, n_steps=n_steps,
                         record_every=n_steps, seed=seed)
    traj = langevin_run(d, start, cfg)
    final = traj[-1][1]
    diag = {"method": "langevin-equilibrated", "burn_time": langevin_time,
            "energy": hamiltonian(d, final) / d.n}
    return final, diag
