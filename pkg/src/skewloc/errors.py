"""Exception types shared across the library.

Every failure mode that callers are expected to handle gets its own class so
that tests and the CLI can react precisely (exit codes, retries with nudged
parameters, and so on).
"""


class SkewlocError(Exception):
    """Base class for all library errors."""


# ---- linear algebra -------------------------------------------------------

class NotHermitian(SkewlocError):
    pass


class NotSkew(SkewlocError):
    pass


class OddDimension(SkewlocError):
    pass


class SingularMatrix(SkewlocError):
    pass


class NumericalFailure(SkewlocError):
    pass


class DimensionMismatch(SkewlocError):
    pass


class BoundaryEigenvalue(SkewlocError):
    """A truncation radius coincides with an eigenvalue of |D|; nudge rho."""


# ---- symmetry -------------------------------------------------------------

class ParityMismatch(SkewlocError):
    pass


class NotProjection(SkewlocError):
    pass


class NotUnitary(SkewlocError):
    pass


class OutOfRange(SkewlocError):
    pass


class OddParity(SkewlocError):
    pass


class NotZ2Case(SkewlocError):
    pass


class SymmetryMismatch(SkewlocError):
    pass


class SymmetryViolation(SkewlocError):
    pass


# ---- flows ----------------------------------------------------------------

class SingularEndpoint(SkewlocError):
    pass


class UnderSampled(SkewlocError):
    pass


class MidpointDegeneracy(SkewlocError):
    pass


class AmbiguousKernel(SkewlocError):
    pass


class KindMismatch(SkewlocError):
    pass


class FlowDisagreement(SkewlocError):
    """Two independent flow representations of the same index differ."""


# ---- localizer ------------------------------------------------------------

class ZeroGap(SkewlocError):
    pass


class BoundViolation(SkewlocError):
    """The localizer gap fell below g/2; the truncation is not trustworthy."""


class RealityViolation(SkewlocError):
    """i R* L R has a large imaginary part; the symmetry input is wrong."""


class NotChiralCase(SkewlocError):
    pass


# ---- models / io ----------------------------------------------------------

class GaplessParameter(SkewlocError):
    pass


class ParseError(SkewlocError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
