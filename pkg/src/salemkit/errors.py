"""Exception hierarchy.

Each class carries the process exit code the command line maps it to:
2 for invalid input, 3 for degenerate derived parameters, 4 for unreadable files.
"""


class SalemkitError(Exception):
    exit_code = 2


class ValidationError(SalemkitError):
    exit_code = 2


class DegenerateError(SalemkitError):
    exit_code = 3


class ParseError(SalemkitError):
    exit_code = 4


# scales and trees
class NonIncreasingScales(ValidationError):
    pass


class ScaleTooSmall(ValidationError):
    pass


class DigitOutOfRange(ValidationError):
    pass


class MissingChildren(ValidationError):
    pass


class DepthExceedsScales(ValidationError):
    pass


class MixedDepths(ValidationError):
    pass


# samplers
class NotDyadic(ValidationError):
    pass


class BelowMinimumScale(ValidationError):
    pass


class DegenerateAlpha(ValidationError):
    pass


class ModulusNotDivisible(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InfeasibleMarginals(ValidationError):
    pass


class NotAPartition(ValidationError):
    pass


# measures
class LevelMismatch(ValidationError):
    pass


class NonLatticeDelta(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


# constructions
class InvalidS(ValidationError):
    pass


class InvalidParameters(ValidationError):
    pass


class LambdaTooLarge(DegenerateError):
    pass


class DegenerateParameters(DegenerateError):
    pass


class DivisibilityViolated(DegenerateError):
    pass


class ScaleAlignment(DegenerateError):
    pass


class SubtreeNotSparse(DegenerateError):
    pass


# analysis
class EmptySchedule(ValidationError):
    pass


class PointOffSupport(ValidationError):
    pass


class MissingTestData(ValidationError):
    pass


class EmptyBohrSet(DegenerateError):
    pass
