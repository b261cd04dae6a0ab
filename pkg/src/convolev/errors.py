"""Exception hierarchy shared by all modules."""


class ConvolevError(Exception):
    """Base class for library errors."""


class ParameterDomainError(ConvolevError, ValueError):
    """A constructor parameter lies outside its admissible range."""


class NumericDomainError(ConvolevError, ValueError):
    """A numerical routine was asked to evaluate outside its convergent domain."""


class DomainError(ConvolevError, ValueError):
    """A kernel or integral was evaluated outside its time domain."""


class QuadratureError(ConvolevError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class TruncationTooSmallError(ConvolevError, RuntimeError):
    """The jump truncation level would produce an unmanageable number of events."""


class DimensionError(ConvolevError, ValueError):
    """Operands have incompatible dimensions."""


class EmptyIntersectionError(ConvolevError):
    """Two intervals have an empty intersection."""


class PreconditionError(ConvolevError, ValueError):
    """An experiment precondition (e.g. a separation certificate) failed."""


class WeightSumError(ConvolevError, ValueError):
    """Partition weights do not sum to one."""
