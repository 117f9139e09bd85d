"""Exception types shared across the package."""


class UFLError(Exception):
    """Base class for all errors raised by uflkit."""


class NegativeCost(UFLError):
    pass


class EmptyDimension(UFLError):
    pass


class NonFiniteEntry(UFLError):
    pass


class EmptyOpenSet(UFLError):
    pass


class NumericalFailure(UFLError):
    pass


class InfeasibleInput(UFLError):
    pass


class GammaOutOfRange(UFLError):
    pass


class NotNeighbors(UFLError):
    pass


class TooLarge(UFLError):
    pass


class DeltaOutOfRange(UFLError):
    pass


class TruncatedFile(UFLError):
    pass


class MalformedToken(UFLError):
    pass
