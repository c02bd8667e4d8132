"""Exception and warning types shared by all modules."""


class InvalidArgumentError(ValueError):
    """Input has the wrong shape, type or fails a structural predicate."""


class DegenerateBasisError(ValueError):
    """A Gram matrix built from a proposed basis is singular."""


class DomainError(ValueError):
    """Input lies outside the domain of a map (e.g. not positive definite)."""


class SingularityError(ArithmeticError):
    """A regularity requirement failed (coinciding eigenvalues, sin = 0, ...)."""


class ConditioningWarning(RuntimeWarning):
    """A factorization was performed on a badly conditioned matrix."""
