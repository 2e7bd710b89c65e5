"""Exception hierarchy shared by all modules."""


class DissipativityError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DissipativityError, ValueError):
    """Matrix or vector dimensions do not fit together."""


class DefinitenessError(DissipativityError):
    """A matrix expected to be positive semidefinite is indefinite."""

    def __init__(self, message, min_eigenvalue):
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.6g})")
        self.min_eigenvalue = min_eigenvalue


class EigensolverError(DissipativityError):
    def __init__(self, dim):
        super().__init__(f"Hermitian eigensolver did not converge for a {dim}x{dim} matrix")
        self.dim = dim


class SpectralCompatibilityError(DissipativityError):
    """The Lyapunov operator X -> A*X + XA is singular (or too large to assemble)."""


class StabilizabilityError(DissipativityError):
    def __init__(self, offending):
        self.offending = tuple(offending)
        listed = ", ".join(f"{complex(z):.6g}" for z in self.offending)
        super().__init__(f"(A, B) is not stabilizable; uncontrollable unstable eigenvalues: {listed}")


class ConvergenceError(DissipativityError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DivergenceError(DissipativityError):
    def __init__(self, last_finite_index):
        super().__init__(f"state became non-finite after step {last_finite_index}")
        self.last_finite_index = last_finite_index


class UnsupportedCaseError(DissipativityError):
    """Input falls outside the restrictions of the LQ machinery (e.g. singular R)."""


class DegenerateRateError(UnsupportedCaseError):
    """The Lur'e factor L is not square invertible, so no feedback law is read off."""


class PreconditionError(DissipativityError, ValueError):
    pass


class SizeError(DissipativityError, ValueError):
    pass


class AlignmentError(DissipativityError, ValueError):
    pass


class DomainError(DissipativityError, ValueError):
    pass


class ConfigError(DissipativityError, ValueError):
    """Malformed or inconsistent analysis configuration."""
