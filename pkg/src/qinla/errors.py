"""Exception hierarchy shared by all modules."""


class QinlaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QinlaError, ValueError):
    """An argument lies outside the domain of the requested function."""


class DimensionMismatch(DomainError):
    """Array shapes are inconsistent (odd-sized CM, mode-count mismatch, ...)."""


class NonPhysical(DomainError):
    """A covariance matrix violates the uncertainty principle."""


class NumericalFailure(QinlaError, ArithmeticError):
    """A numerical routine failed to reach its residual tolerance."""


class PhysicalityViolation(QinlaError):
    """An effective (post-NLA) parameter set does not describe a physical system.

    Attributes
    ----------
    constraint : str
        Name of the violated constraint, e.g. ``"tau_g<=1"``.
    value : float
        Offending value.
    """

    def __init__(self, constraint, value, message=None):
        self.constraint = constraint
        self.value = value
        if message is None:
            message = f"physicality constraint {constraint} violated (value={value!r})"
        super().__init__(message)


class GainOutOfRange(PhysicalityViolation):
    """NLA gain exceeds the maximum allowed by the channel parameters."""

    def __init__(self, gain, g_max):
        self.gain = gain
        self.g_max = g_max
        super().__init__(
            "g<=g_max",
            gain,
            f"NLA gain g={gain:.6g} exceeds g_max={g_max:.6g} (constraint tau_g<=1)",
        )


class CutoffTooSmall(QinlaError):
    """Fock-space truncation is too coarse for the requested accuracy."""


class CertificationFailure(QinlaError):
    """Fock oracle and Gaussian route disagree beyond tolerance."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
