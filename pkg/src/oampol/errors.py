"""Exception types shared across the toolkit.

Grouped by how the command-line front end reports them: ValidationError
maps to exit code 2 (bad or out-of-contract input), NumericalError to
exit code 3 (a computation failed or produced an unusable result).
Filesystem problems use the builtin OSError family and map to exit 4.
"""


class ToolkitError(Exception):
    """Base class for every toolkit-specific error."""


class ValidationError(ToolkitError):
    """Malformed input or an argument outside its documented contract."""


class NumericalError(ToolkitError):
    """A numerical procedure failed or its result is unusable."""


class NonHermitianInput(NumericalError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class NegativeEigenvalue(NumericalError):
    """An operator that must be positive has an eigenvalue below -1e-6."""


class SingularSystem(NumericalError):
    """The tomography design matrix is rank deficient."""


class DegenerateParameters(NumericalError):
    """A parametrized density matrix has (near-)zero normalization."""


class ZeroDenominator(NumericalError):
    """Background normalization denominator is not positive."""


class RegionTooSmall(ValidationError):
    """A histogram region has too few bins for a stable estimate."""


class EmptySignal(NumericalError):
    """The four computational-basis coincidences sum to nothing."""


class EmptyState(NumericalError):
    """No amplitude survives a filtering stage."""


class AllZeroCoefficients(ValidationError):
    """A state expansion was requested with all coefficients zero."""
