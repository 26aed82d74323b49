"""
Exception hierarchy for the core engine.

Each error subclasses the builtin a caller would otherwise catch, so plain
``except ValueError`` handlers keep working.
"""


class NetworkValidationError(ValueError):
    """Species or reaction declarations are inconsistent."""


class ParameterError(ValueError):
    """A controller, schedule or cost parameter is outside its domain."""


class StructureError(ValueError):
    """Linear structure required by an analysis does not hold (non-Hurwitz A, g = 0)."""


class EquilibriumError(RuntimeError):
    """Newton iteration failed or converged to a non-positive point."""


class IntegrationError(RuntimeError):
    """ODE integration failed (step-size underflow, non-finite state, negative undershoot)."""


class CompilationError(ValueError):
    """A formal network cannot be compiled to a strand-displacement circuit."""


class SsaError(RuntimeError):
    """Stochastic simulation cannot start or continue."""


class ScenarioError(ValueError):
    """A scenario document fails to parse or validate."""


class OutputError(RuntimeError):
    """An artifact could not be written."""
