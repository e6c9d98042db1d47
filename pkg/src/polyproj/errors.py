"""Exception types shared across modules."""


class DegenerateInputError(ValueError):
    """Input points are not in general position (e.g. a repeated point,
    or n+1 vertices on a common facet hyperplane)."""

    def __init__(self, message, tuple_=None):
        super().__init__(message)
        self.tuple = tuple_


class RankDeficientError(ValueError):
    """Symmetrized input does not span the ambient space."""


class InvalidStateError(RuntimeError):
    pass


class ConditioningWarning(UserWarning):
    pass
