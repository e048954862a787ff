"""Exception hierarchy shared by every module."""


class QGError(Exception):
    """Base class for all library errors."""


class GraphError(QGError, ValueError):
    """Malformed or invalid graph / voltage data."""


class GroupError(QGError, ValueError):
    """Invalid group table or representation data."""


class SingularParameterError(QGError, ValueError):
    """A wavenumber hits a pole ik*d_j = +-lambda_j of the vertex factor."""


class ExcludedPointError(QGError, ValueError):
    """Evaluation at sigma with sigma**2 == exp(2ikL_e) for some edge."""


class LimitExceededError(QGError, ValueError):
    """A combinatorial guard (cycle length, series order) was exceeded."""


class NumericalError(QGError, ArithmeticError):
    """Iterative routine failed to converge or a build-time identity broke."""
