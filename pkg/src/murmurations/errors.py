"""Exception hierarchy shared by all modules."""


class MurmurError(Exception):
    """Base class for library errors."""


class DomainError(MurmurError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(DomainError):
    """Experiment parameters violate the regime the computation assumes."""


class PrecisionError(MurmurError, ArithmeticError):
    """A numerical result could not be certified to the requested accuracy."""


class TruncationError(PrecisionError):
    """A truncated series could not be certified within the configured budget."""


class ResourceError(MurmurError, MemoryError):
    """A table would exceed the configured memory budget."""


class DegeneracyError(MurmurError, ArithmeticError):
    """A Hecke operator has a repeated eigenvalue."""


class ConsistencyError(MurmurError, ArithmeticError):
    """An internal cross-check failed; indicates a bug upstream."""
