"""Exception hierarchy shared by every tailscope module."""

from __future__ import annotations


class TailscopeError(Exception):
    """Base class for all errors raised by tailscope."""


class ParameterDomainError(TailscopeError, ValueError):
    """A model or operation parameter lies outside its legal domain."""


class AtomicPointError(TailscopeError, ValueError):
    """A density was requested at a point carrying positive probability mass."""


class UnsupportedError(TailscopeError, NotImplementedError):
    """The requested quantity has no implementation for this model."""


class EmptyInputError(TailscopeError, ValueError):
    pass


class DegenerateSampleError(TailscopeError, ValueError):
    """The empirical standard deviation of a sample is zero."""


class BoundaryError(TailscopeError, ValueError):
    """An estimate sits on the boundary where no finite value exists."""


class QuadratureError(TailscopeError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The ``diagnostics`` mapping carries whatever the integrator reported
    (bounds, error estimate, subdivision count, integrator message).
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class SpecValidationError(TailscopeError, ValueError):
    """An experiment specification or CLI request is malformed."""
