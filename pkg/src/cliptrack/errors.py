class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class InfeasibleError(ValueError):
    """The clipped feasible set is empty (floor * K > 1)."""


class ConfigError(ValueError):
    """Invalid learner, environment or experiment configuration."""


class InvariantViolation(RuntimeError):
    """A runtime invariant (simplex membership, lemma, ...) failed."""


class ConvergenceError(ArithmeticError):
    """An iterative solver hit its iteration cap."""
