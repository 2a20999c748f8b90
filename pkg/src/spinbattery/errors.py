"""Exception types raised by the simulator."""


class SpinBatteryError(Exception):
    """Base class for simulator errors."""


class NumericalError(SpinBatteryError):
    """A numerical procedure failed; carries the offending parameters in its message."""


class EigensolverError(NumericalError):
    pass


class KrylovConvergenceError(NumericalError):
    pass


class CutoffConvergenceError(NumericalError):
    pass
