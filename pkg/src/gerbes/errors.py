"""Exception hierarchy.

``ValidationError`` subclasses signal malformed or inconsistent input.
``ObstructionError`` subclasses signal that the input is well formed but the
requested object does not exist (a class is nonzero, a cycle does not bound).
"""


class GerbeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GerbeError):
    pass


class ObstructionError(GerbeError):
    pass


# complexes, chains, cochains
class DuplicateVertexInSimplex(ValidationError):
    pass


class InconsistentInput(ValidationError):
    pass


class DegreeOutOfRange(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class NotACycle(ValidationError):
    pass


class NotNullHomologous(ObstructionError):
    pass


# covers and Cech data
class CoverNotGood(ValidationError):
    pass


class NotACocycle(ValidationError):
    pass


class BranchAmbiguity(ValidationError):
    pass


class NonIntegralResult(ValidationError):
    pass


class ClassNonTrivial(ObstructionError):
    pass


class PartitionInvalid(ValidationError):
    pass


# fibered products
class ArityOutOfRange(ValidationError):
    pass


class NotClosed(ValidationError):
    pass


# gerbes
class RefinementNotGood(ValidationError):
    pass


class PullbackCoverNotGood(ValidationError):
    pass


class NotALift(ValidationError):
    pass


class ObstructionNotCentral(GerbeError):
    pass


# connections and holonomy
class GlueMismatch(ValidationError):
    pass


class ChartUnknown(ValidationError):
    pass


class NotAnIntegerCocycle(ValidationError):
    pass


class NonIntegralAmbiguity(ObstructionError):
    pass


class SubordinationInvalid(ValidationError):
    pass


class DeligneInvalid(ValidationError):
    pass


# path groupoid
class EndpointMismatch(ValidationError):
    pass


class NotSimplyConnected(ValidationError):
    pass


class NonIntegralForm(ValidationError):
    pass


class NotConnected(ValidationError):
    pass
