"""Exception types shared across the package."""


class LatticeWalkError(Exception):
    """Base class for all latticewalk errors."""


class InvalidArgumentError(LatticeWalkError, ValueError):
    """An argument violates a documented precondition."""


class TruncationError(LatticeWalkError):
    """Amplitude would cross the lattice edge; results would silently lose norm."""


class ResolutionError(InvalidArgumentError):
    """A sampling grid is too coarse to resolve the requested quantity."""


class InsufficientDataError(LatticeWalkError):
    """Too few usable data points for the requested estimate."""


class SingularMassError(InvalidArgumentError):
    """The effective mass diverges at this coin angle."""


class ConvergenceError(LatticeWalkError):
    """An iterative search failed to converge.

    Carries the best parameters found so far in ``best_result``.
    """

    def __init__(self, message, best_result=None):
        super().__init__(message)
        self.best_result = best_result


class ParseError(LatticeWalkError, ValueError):
    """A data file is malformed; the message names the offending line."""


class MissingConstantError(InvalidArgumentError):
    """A physical-parameter file is missing required fields.

    ``missing`` lists the absent field names.
    """

    def __init__(self, missing):
        super().__init__("missing required constants: " + ", ".join(sorted(missing)))
        self.missing = sorted(missing)
