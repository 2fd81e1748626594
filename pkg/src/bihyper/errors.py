"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the declared domain of an operation."""


class MarginError(DomainError):
    """A finite-difference stencil would leave the admissible domain."""


class DegenerateInputError(ValueError):
    """Input is rank deficient or makes a leading coefficient vanish."""


class PreconditionError(ValueError):
    """A geometric precondition (orthonormality, unit length) is violated."""
