"""Finite-N Monte Carlo laboratory for spherical p-spin models."""

from .disorder import (Configuration, Correlation, Disorder, Lineage, Spike,
                       correlate_disorder, plant, random_configuration,
                       reconstruct, sample_disorder, sphere_check,
                       sphere_project)
from .energy import (gradient, hamiltonian, hessian, spherical_gradient,
                     sup_norm_estimate)
from .langevin import LangevinConfig, langevin_run
from .samplers import ReplicaExchange, equilibrium_sample
from .observables import (ChaosConfig, correlation_curve, overlap_chaos,
                          w2_empirical)

__all__ = [
    "Configuration", "Correlation", "Disorder", "Lineage", "Spike",
    "sample_disorder", "plant", "correlate_disorder", "reconstruct",
    "random_configuration", "sphere_project", "sphere_check",
    "hamiltonian", "gradient", "spherical_gradient", "hessian",
    "sup_norm_estimate",
    "LangevinConfig", "langevin_run",
    "ReplicaExchange", "equilibrium_sample",
    "ChaosConfig", "correlation_curve", "overlap_chaos", "w2_empirical",
]
