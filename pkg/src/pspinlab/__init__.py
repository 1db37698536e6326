"""Numerical toolkit for spherical p-spin glass models.

Variational free energies over Parisi measures, static/dynamical phase
boundaries, the Franz-Parisi potential and its near-1 increasing window,
plus a finite-N Monte Carlo laboratory (Gaussian tensor disorder, spherical
Langevin dynamics, replica exchange, disorder-chaos estimators).
"""

__version__ = "0.1.0"

from . import mixtures, phase, parisi, franz_parisi, lab  # noqa: F401
