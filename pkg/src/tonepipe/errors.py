"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class DomainError(ValueError):
    """Numeric input lies outside the domain an operation is defined on."""


class CodecError(ValueError):
    """Byte stream cannot be decoded as the expected image format."""


class UnsupportedFormatError(CodecError):
    """Recognized container, but a variant this codec does not handle."""


class DegenerateFitError(RuntimeError):
    """Least-squares design matrix is numerically rank deficient.

    Carries the offending fit report so callers can inspect the condition
    estimate instead of receiving garbage coefficients.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
