"""Exception types shared across the package."""


class SpinChainError(Exception):
    """Base class for every package-specific error."""


class EmptySector(SpinChainError):
    """No product configuration satisfies the requested total Sz."""


class IndexOutOfRange(SpinChainError, IndexError):
    """A site index is outside the chain or a pair repeats a site."""


class UnsupportedSpin(SpinChainError):
    """A spin length is not a positive half-integer, or an operation
    requires specific spin lengths the sites do not have."""


class SpecMismatch(SpinChainError):
    """A basis was built for a different site layout than the model."""


class BasisMismatch(SpinChainError):
    """Two state vectors do not live in the same sector basis."""


class NoConvergence(SpinChainError):
    """Iterative solver exhausted its iteration budget."""


class DimensionTooSmall(SpinChainError):
    """The sector is smaller than the number of requested Ritz pairs."""


class DimensionCap(SpinChainError):
    """The sector exceeds the configured dense-solver cap."""


class StepTooSmall(SpinChainError):
    """A finite-difference step is below the supported floor."""


class DegenerateGroundState(SpinChainError):
    """The sector ground state is degenerate within tolerance."""


class DimensionMismatch(SpinChainError):
    """Two matrices that must share a shape do not."""


class NotPSD(SpinChainError):
    """A density matrix has a negative eigenvalue beyond noise level."""


class NegativeEigenvalue(SpinChainError):
    """A spectrum that must be nonnegative has a negative entry."""


class DomainViolation(SpinChainError):
    """An input sits outside the formula's domain of validity."""


class NonPositiveFidelity(SpinChainError):
    """A fidelity evaluated to zero or below; its log is undefined."""


class SectorChange(SpinChainError):
    """The ground state moved to a different symmetry sector."""


class NoInteriorPeak(SpinChainError):
    """The maximum sits on a grid endpoint, so no peak can be refined."""
