"""Exception types raised by the solvers."""


class NspShockError(RuntimeError):
    """Base class for solver failures (CLI exit code 1)."""


class NewtonDiverged(NspShockError):
    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else []


class DomainTooShort(NspShockError):
    """Endpoint values do not match the far-field states; increase L."""


class AmplitudeTooLarge(NspShockError):
    """Continuation in amplitude failed to reach the requested value."""


class TailUnresolved(NspShockError):
    """Not enough nodes in the exponential tail window for a rate fit."""


class FarFieldMismatch(NspShockError):
    """A KdV-Burgers profile drifts from its far-field value at the boundary."""


class ComplexRates(NspShockError):
    """Phase-plane eigenvalues at the left state are complex (oscillatory regime)."""


class SingularSystem(NspShockError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NotContracting(NspShockError):
    def __init__(self, message, ratios=None):
        super().__init__(message)
        self.ratios = list(ratios) if ratios is not None else []


class PositivityLost(NspShockError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class CFLViolation(NspShockError):
    pass
