"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for invalid input,
3 for input that is well-formed but mathematically refused, 4 for a
numeric failure.
"""


class ZetaApointsError(Exception):
    exit_code = 4


class InvalidInput(ZetaApointsError, ValueError):
    exit_code = 2


class Refused(ZetaApointsError):
    exit_code = 3


class NumericFailure(ZetaApointsError, ArithmeticError):
    exit_code = 4


# zeta-kernel
class PoleProximity(InvalidInput):
    pass


class AccuracyNotReached(NumericFailure):
    pass


# apoint-engine
class ContourTooClose(NumericFailure):
    pass


class EvalFailure(NumericFailure):
    pass


class CountMismatch(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class DerivativeVanishes(NumericFailure):
    pass


class CacheIncomplete(InvalidInput):
    pass


# function-families
class DomainError(InvalidInput):
    pass


class ZeroAmplitude(Refused):
    pass


class Inadmissible(Refused):
    pass


# oscillatory-lab
class QuadratureFailure(NumericFailure):
    pass


class InvariantViolated(InvalidInput):
    pass


# equidist-stats
class EmptyPrefix(InvalidInput):
    pass
