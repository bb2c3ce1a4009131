"""Exception types raised by covertjam."""


class CovertError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(CovertError, ValueError):
    pass


class DegenerateChannelError(CovertError, ValueError):
    """Beamformer undefined because the legitimate channel has zero norm."""


class DegenerateDetectionError(CovertError, ValueError):
    """Detector is trivially perfect or blind (a zero scale parameter)."""


class SingularPointError(CovertError, ZeroDivisionError):
    """The reformulated covertness constraint divides by zero at this alpha."""


class InfeasibleError(CovertError):
    """No power split satisfies the covertness constraint."""


class NumericFailureError(CovertError, RuntimeError):
    pass
