"""Exception hierarchy shared across the package."""


class PermsafeError(Exception):
    """Base class for all errors raised by this package."""


class MissingTarget(PermsafeError):
    """Requested target column is not present in the CSV header."""


class ParseError(PermsafeError):
    """A cell could not be parsed as a finite number under the reject policy."""


class EmptyData(PermsafeError):
    """Fewer than two usable rows, or no feature columns, after ingestion."""


class IndexOutOfRange(PermsafeError):
    """Column index outside the valid range."""


class DegenerateColumn(PermsafeError):
    """Feature column is constant; rank-based transforms are undefined."""


class SingularDesign(PermsafeError):
    """Regression design matrix is rank deficient beyond recovery."""


class NotPositiveDefinite(PermsafeError):
    """Covariance matrix is not positive definite after shrinkage."""


class ZeroTargetVariance(PermsafeError):
    """Target variance is zero; a variance-normalized index is undefined."""


class PredictorFailure(PermsafeError):
    """A predictor raised or returned non-finite values during evaluation."""


class UnknownExpression(PermsafeError):
    """Analytic expression id is not registered."""


class InvalidK(PermsafeError):
    """k outside [1, N] for a k-nearest-neighbour fit."""


class InsufficientRows(PermsafeError):
    """Not enough rows for the number of regressors."""


class RhoNotZero(PermsafeError):
    """Analytic ground truth requires independent features (rho = 0)."""
