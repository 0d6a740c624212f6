"""Exception types shared across the library."""


class SetMeansError(Exception):
    """Base class for all domain errors raised by this library."""


class ZeroMeasure(SetMeansError):
    """An average over a set of Lebesgue measure zero was requested."""


class Uncountable(SetMeansError):
    """An enumeration was requested for a set with an uncountable leaf."""


class InIdeal(SetMeansError):
    """The set belongs to the ideal, so the ideal-relative limits are undefined."""


class NotIsolatedDense(SetMeansError):
    """The set is not the closure of its isolated points."""


class Unsupported(SetMeansError):
    """The operation is not defined for this combination of set shapes."""


class NonTerminating(SetMeansError):
    """The derived-set chain never reaches the empty set."""


class OutOfBase(SetMeansError):
    """A point of the set falls outside the sampling base interval."""


class OutOfRange(SetMeansError):
    """A target value lies outside the attainable range."""


class Degenerate(SetMeansError):
    """The set has a single accumulation value, so divergence cannot be forced."""


class NoWitness(SetMeansError):
    """No representable subsequence converging to the required extreme exists."""


class SemanticError(SetMeansError):
    """A structurally valid expression violates a construction constraint."""


class UndefinedMean(SetMeansError):
    """The requested mean has no defined value on this set."""


class BudgetExceeded(SetMeansError):
    """An internal enumeration or materialization budget was exhausted."""
