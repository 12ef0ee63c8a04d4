"""Exception types shared across the package."""


class SwitchSimError(Exception):
    """Base class for all switchsim errors."""


class NonDoublyStochastic(SwitchSimError):
    """Rate matrix row or column sums deviate from 1 beyond tolerance."""


class BadEpsilon(SwitchSimError):
    """Heavy-traffic gap outside (0, 1)."""


class ReconfigWhileReconfiguring(SwitchSimError):
    """Schedule change requested while a previous change is still in progress."""


class DimensionMismatch(SwitchSimError):
    """Operands have incompatible shapes."""


class TooLarge(SwitchSimError):
    """Input exceeds the size guard of an exhaustive routine."""


class BadFrame(SwitchSimError):
    """Frame length does not leave room for the reconfiguration delay."""


class NoConvergence(SwitchSimError):
    """Iterative projection failed to converge within the iteration cap."""


class ConfigInvalid(SwitchSimError):
    """Simulation or sweep configuration violates an invariant."""


class InsufficientBatches(SwitchSimError):
    """Too few batch means to form a confidence interval."""


class TooFewIntervals(SwitchSimError):
    """Too few completed schedule intervals for a renewal estimate."""


class NegativeArgument(SwitchSimError):
    """Bound argument fell outside the domain of the inverse hysteresis map."""


class NonPositiveData(SwitchSimError):
    """Log-log regression requires strictly positive coordinates."""
