"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid scenario or dimension configuration."""


class NumericalFailure(RuntimeError):
    """A numerical routine did not converge or stalled."""


class UndefinedSplitError(ValueError):
    """Bandwidth split requested with both link capacities equal to zero."""


class BDRankError(RuntimeError):
    """Block diagonalization found no usable null-space direction for a user.

    Attributes
    ----------
    user : int
        Index of the offending user.
    """

    def __init__(self, user, message=None):
        self.user = user
        super().__init__(message or f"no interference-free direction left for user {user}")
