class WiretapError(Exception):
    """Base class for library errors."""


class ConvergenceError(WiretapError, RuntimeError):
    """An iterative numerical method did not reach its tolerance."""


class QuadratureError(ConvergenceError):
    pass


class BudgetExceededError(WiretapError, ValueError):
    """Requested enumeration or allocation exceeds the configured cap."""
