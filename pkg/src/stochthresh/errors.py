"""Exception types shared across the package.

Everything derives from :class:`ValueError` so callers that do not care about
the fine-grained category can catch one thing.  The CLI maps these to exit
code 1 (data / domain problems) while argument-parsing mistakes surface as
usage errors (exit code 2).
"""

from __future__ import annotations

__all__ = [
    "StochthreshError",
    "ParameterDomainError",
    "DegenerateInputError",
    "DegenerateFeatureError",
    "UnsupportedSpecError",
    "RegimeError",
    "DomainError",
    "SchemaError",
    "ParseError",
    "SizeError",
    "ShapeError",
]


class StochthreshError(ValueError):
    """Base class for all errors raised by this package."""


class ParameterDomainError(StochthreshError):
    """A numeric parameter lies outside its documented domain."""


class DegenerateInputError(StochthreshError):
    """Input data is empty or otherwise carries no usable information."""


class DegenerateFeatureError(StochthreshError):
    """A feature column has zero variance and cannot be standardized."""


class UnsupportedSpecError(StochthreshError):
    """The requested operation is not defined for this spec/kind."""


class RegimeError(StochthreshError):
    """Bound preconditions (parameter regime) are violated."""


class DomainError(StochthreshError):
    """A point lies outside the domain of a regression function."""


class SchemaError(StochthreshError):
    """Tabular input does not match the expected schema."""


class ParseError(StochthreshError):
    """Tabular input contains a cell that cannot be parsed."""


class SizeError(StochthreshError):
    """A requested split/size allocation is infeasible."""


class ShapeError(StochthreshError):
    """Array arguments have incompatible shapes or dimensions."""
