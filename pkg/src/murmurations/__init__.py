"""Numerical study of murmurations for level-one holomorphic modular forms."""
from .errors import (ConsistencyError, DegeneracyError, DomainError, MurmurError,
                     ParameterError, PrecisionError, ResourceError, TruncationError)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError", "DegeneracyError", "DomainError", "MurmurError",
    "ParameterError", "PrecisionError", "ResourceError", "TruncationError",
]
