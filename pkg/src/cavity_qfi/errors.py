"""Exception hierarchy shared by every module of the package."""


class CavityQfiError(Exception):
    """Base class for all package errors."""


# matrix core
class NonHermitianInput(CavityQfiError):
    pass


class DimensionTooLarge(CavityQfiError):
    pass


class DimensionMismatch(CavityQfiError):
    pass


class InvalidDensityMatrix(CavityQfiError):
    pass


# estimation engine
class SingularOutcome(CavityQfiError):
    pass


class InvalidPovm(CavityQfiError):
    pass


class UnsupportedDerivativeComponent(CavityQfiError):
    """The derivative has weight between two directions outside the support."""


class NonNormalizedSpectrum(CavityQfiError):
    pass


class NonOrthonormalBasis(CavityQfiError):
    pass


class NonUnitVector(CavityQfiError):
    pass


# cavity / Bogoliubov
class InvalidGeometry(CavityQfiError):
    pass


class WindowTooSmall(CavityQfiError):
    pass


class TruncationInsufficient(CavityQfiError):
    pass


class QuadratureNonConvergent(CavityQfiError):
    pass


class UnitarityDefectExceeded(CavityQfiError):
    pass


# closed-form states
class PerturbationOutOfRange(CavityQfiError):
    pass


# command line
class SpecValidation(CavityQfiError):
    pass


class IoFailure(CavityQfiError):
    pass
