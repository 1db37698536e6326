"""Exception and warning types shared across the package."""

from __future__ import annotations


class SolverError(RuntimeError):
    """A bracketed minimization failed to converge within its budget.

    Carries the best bracket/value seen so callers can inspect or retry.
    """

    def __init__(self, message, bracket=None, best=None):
        super().__init__(message)
        self.bracket = bracket
        self.best = best


class FeasibilityError(ValueError):
    """A functional evaluation hit an infeasible intermediate (phi <= 0).

    Cannot occur for valid probability measures; guards corrupted input.
    """


class SizeError(ValueError):
    """Requested tensor exceeds the entry budget."""


class DivergenceError(RuntimeError):
    """An SDE iterate left the representable range (step size too large)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ScanError(RuntimeError):
    """A grid scan had per-point failures; partial results are attached."""

    def __init__(self, message, failures=None, partial=None):
        super().__init__(message)
        self.failures = failures or []
        self.partial = partial


class TruncationWarning(UserWarning):
    """Minimizer support reached the grid endpoint q_max; enlarge q_max."""


class StabilityWarning(UserWarning):
    """Langevin step size looks large for the local gradient scale."""


class MixingWarning(UserWarning):
    """Sampler diagnostics indicate poor mixing (e.g. low swap rate)."""
