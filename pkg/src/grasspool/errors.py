"""Exception and warning types raised across grasspool."""


class GrassPoolError(Exception):
    """Base class for all grasspool errors."""


class ShapeMismatch(GrassPoolError, ValueError):
    pass


class RankDeficient(GrassPoolError, ValueError):
    pass


class NonFinite(GrassPoolError, ValueError):
    pass


class CallbackFailure(GrassPoolError, RuntimeError):
    """An objective or gradient callback returned NaN or Inf."""


class DegenerateSequence(GrassPoolError, ValueError):
    pass


class EmptySequence(GrassPoolError, ValueError):
    pass


class SingleClass(GrassPoolError, ValueError):
    pass


class ParseError(GrassPoolError, ValueError):
    pass


class DimensionMismatch(ParseError):
    """Rows of a sequence file disagree on their length."""


class NotPsdWarning(UserWarning):
    """A Gram matrix had eigenvalues below the tolerated negative floor."""
