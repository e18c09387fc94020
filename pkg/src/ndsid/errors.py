"""Exception hierarchy shared by every ndsid module."""


class NdsidError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(NdsidError):
    """Matrix dimensions are incompatible with the requested operation."""


class NotSquare(NdsidError):
    """A square matrix was required."""


class DivisionByZeroFunction(NdsidError):
    """Inversion of the zero rational function."""


class SingularMatrix(NdsidError):
    """Inverse requested for a matrix whose determinant is identically zero."""


class InvalidIndex(NdsidError):
    """Canonical pencil block requested with an inadmissible size."""


class IllPosedSubsystem(NdsidError):
    """I - G(i)P(i) is singular, so the subsystem LFT cannot be realized."""


class IllPosedNds(NdsidError):
    """I - Phi*A_zv is singular, so the network interconnection is ill posed."""


class PreconditionViolated(NdsidError):
    """A checker was invoked on a model outside its stated hypothesis."""


class FactorizationInvalid(NdsidError):
    """A supplied transfer-matrix factorization does not hold exactly."""


class InvalidParam(NdsidError):
    """Circuit or experiment parameter outside its admissible range."""


class SamplingExhausted(NdsidError):
    """Rejection sampling failed to produce a well-posed sample within the retry bound."""


class PoleOnGrid(NdsidError):
    """Frequency response overflowed; a pole sits on (or too near) the scan grid."""


class DivergentSimulation(NdsidError):
    """Time-domain simulation blew up before the horizon was reached."""


class ModelFormatError(NdsidError):
    """Model file failed validation (bad JSON, bad shapes, bad entries)."""
