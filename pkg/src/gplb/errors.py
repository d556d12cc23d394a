"""Exception types shared across the package.

The split mirrors how callers should react: DomainError means an argument
is outside the mathematical domain of an operation, ContractError means
two individually valid objects do not fit together, QuadratureError means
a numerical routine could not reach its tolerance, ConfigError means an
experiment description is inconsistent, and SchemaVersionError guards the
on-disk report format.
"""

from __future__ import annotations

__all__ = [
    "DomainError",
    "ContractError",
    "QuadratureError",
    "ConfigError",
    "SchemaVersionError",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ContractError(ValueError):
    """Inputs are individually valid but mutually inconsistent.

    Typical causes: coefficient vectors expressed in a different basis than
    the spectrum they are combined with, shape mismatches, or a family that
    violates a precondition another object relies on (e.g. unequal norms).
    """


class QuadratureError(RuntimeError):
    """Numerical integration failed to converge to the requested tolerance."""

    def __init__(self, message: str, *, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(ValueError):
    """An experiment configuration is invalid or infeasible."""


class SchemaVersionError(ValueError):
    """A report file declares a schema version this code does not support."""

    def __init__(self, found, supported):
        super().__init__(
            f"report schema version {found!r} is not supported "
            f"(this build reads version {supported!r})"
        )
        self.found = found
        self.supported = supported
