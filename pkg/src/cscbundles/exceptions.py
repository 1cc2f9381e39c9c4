"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (e.g. a non-unit vector)."""


class InadmissibleModulusError(DomainError):
    """The elliptic modulus does not give a positive right-hand side for gamma.

    Attributes
    ----------
    k_sq_range : tuple of float or None
        Open interval of admissible squared moduli for the requested
        orientation, or ``None`` when no elliptic modulus is admissible.
    """

    def __init__(self, message, k_sq_range=None):
        super().__init__(message)
        self.k_sq_range = k_sq_range
