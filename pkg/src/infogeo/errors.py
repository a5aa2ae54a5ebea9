"""Exception types raised by the library."""


class InfogeoError(Exception):
    """Base class for all library errors."""


class NonAbsorbingError(InfogeoError):
    """The goal is not reachable from every transient state under a policy."""


class AllTruncatedError(InfogeoError):
    """No sampled trajectory reached the goal within the step budget."""


class DivergenceError(InfogeoError):
    """An accumulated quantity does not converge because the goal is unreachable."""


class NumericalUnderflowError(InfogeoError):
    """Every Boltzmann weight of some state vanished."""


class OverlappingSupportsError(InfogeoError, ValueError):
    """Two sub-policy supports share more than the subgoal."""


class MissingPairEntryError(InfogeoError, KeyError):
    """A pairwise free energy needed for a computation is absent or unconverged."""

    def __str__(self):
        return Exception.__str__(self)


class NoConvergenceError(InfogeoError):
    """An iterative solver hit its iteration budget.

    ``result`` holds the last iterate (flagged as not converged) when the
    solver can still produce one, so callers may record it instead of
    discarding the work.
    """

    def __init__(self, message, result=None, residuals=None):
        super().__init__(message)
        self.result = result
        self.residuals = residuals
