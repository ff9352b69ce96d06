"""Exception hierarchy shared by every hmgame module."""


class HMGError(Exception):
    """Base class for all library errors."""


class ValidationError(HMGError, ValueError):
    """An input object violates its structural invariants."""


class DimensionMismatch(ValidationError):
    pass


class SymbolOutOfRange(ValidationError):
    pass


class InvalidInitialModel(ValidationError):
    pass


class DegenerateGame(HMGError):
    """The 2x2 indifference system is singular and no pure equilibrium exists."""


class ZeroProbabilityObservation(HMGError):
    """An observation sequence has probability exactly zero under a model."""


class MissingModel(HMGError):
    pass


class EmptyHistory(HMGError, ValueError):
    pass
