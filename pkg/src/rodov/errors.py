"""Exception types raised across the package."""


class RodovError(Exception):
    """Base class for all errors raised by this package."""


# piecewise
class NonZeroMeanInput(RodovError, ValueError):
    pass


class IdenticallyZero(RodovError, ValueError):
    pass


class LevelOutOfRange(RodovError, ValueError):
    pass


# splines / scaling
class NegativeParameter(RodovError, ValueError):
    pass


class NotApplicable(RodovError, ValueError):
    pass


class NonPositiveLambda(RodovError, ValueError):
    pass


class InvalidParams(RodovError, ValueError):
    pass


class KOutOfRange(RodovError, ValueError):
    pass


# matcher
class Infeasible(RodovError):
    """Targets lie below the Euler (zero-plateau) baseline."""


class NoBracket(RodovError):
    """Geometric bracket growth was exhausted without a sign change."""


class NonMonotone(RodovError):
    """An objective assumed monotone was observed not to be."""


# rearrange
class NegativeInput(RodovError, ValueError):
    pass


class TOutOfRange(RodovError, ValueError):
    pass


# verify
class DerivativeUnavailable(RodovError, ValueError):
    pass


class HypothesisFailed(RodovError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EqualityPreconditionFailed(RodovError):
    pass


class BadExponents(RodovError, ValueError):
    pass
