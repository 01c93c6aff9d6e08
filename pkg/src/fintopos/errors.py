"""Exception types shared across the package."""


class FinTopError(Exception):
    """Base class for every domain error raised by fintopos."""


class CycleDetected(FinTopError, ValueError):
    pass


class NotOpen(FinTopError, ValueError):
    pass


class NotSober(FinTopError, AssertionError):
    pass


class NotACover(FinTopError, ValueError):
    pass


class ShrinkingUnavailable(FinTopError):
    """No cover {U'_a} with closure(U'_a) inside U_a exists."""


class CoreConditionFailed(FinTopError, AssertionError):
    """The refined cover violates one of its two postconditions."""


class NotALattice(FinTopError, ValueError):
    pass


class NotDistributive(FinTopError, ValueError):
    pass


class NotContinuous(FinTopError, ValueError):
    pass


class NotFunctorial(FinTopError, ValueError):
    pass


class TooLarge(FinTopError, ValueError):
    pass


class SpaceMismatch(FinTopError, ValueError):
    pass


class VanishingViolated(FinTopError, AssertionError):
    """H^k != 0 above the Krull dimension. Always a bug, never an outcome."""


class DimensionExceeded(FinTopError, ValueError):
    pass


class NotAGroup(FinTopError, ValueError):
    pass


class NotKan(FinTopError, ValueError):
    pass


class NotRegular(FinTopError, ValueError):
    """Face-poset subdivision needs every simplex to have distinct faces."""


class ParseError(FinTopError, ValueError):
    pass
