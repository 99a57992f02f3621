"""Exception types raised by the trpca package."""


class TrpcaError(Exception):
    """Base class for all trpca errors."""


class DimMismatch(TrpcaError):
    """Operand dimensions are incompatible."""


class ImagResidualTooLarge(TrpcaError):
    """Inverse FFT produced a significant imaginary part, which signals a
    conjugate-symmetry bug upstream rather than ordinary rounding noise."""


class ZeroTensor(TrpcaError):
    """Operation is undefined for an all-zero tensor."""


class NoConvergence(TrpcaError):
    """An iterative kernel failed to converge on pathological input."""


class InvalidParam(TrpcaError):
    """A scalar parameter is outside its admissible range."""


class NonFinite(TrpcaError):
    """A solver iterate developed NaN or Inf entries."""


class ZeroReference(TrpcaError):
    """Relative error against an all-zero reference is undefined."""


class InvalidSpec(TrpcaError):
    """A synthetic-data specification violates its own constraints."""


class TooSmall(TrpcaError):
    """Input is smaller than the sliding window it must accommodate."""


class BadMagic(TrpcaError):
    """File does not start with the expected magic bytes."""


class BadMaxval(TrpcaError):
    """PPM maxval is unsupported (only 255 is)."""


class BadDtype(TrpcaError):
    """Tensor file declares an unsupported element type."""


class TruncatedFile(TrpcaError):
    """File ended before the declared payload was complete."""


class SizeMismatch(TrpcaError):
    """Payload size disagrees with the declared dimensions."""
