"""Exception hierarchy shared by every nvforge module.

Library code raises these; `cli.py` maps them to exit codes and `app.py` to
HTTP responses.
"""


class NvForgeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(NvForgeError):
    """Bad command-line usage (exit code 2)."""


class ConfigurationError(NvForgeError, ValueError):
    """Invalid parameters, presets or configuration files."""


class PhysicsError(NvForgeError, RuntimeError):
    """A physics routine produced an impossible state."""


class ScatteringError(PhysicsError):
    def __init__(self, message: str, epsilon: float, b: float):
        super().__init__(f"{message} (epsilon={epsilon:.6g}, b={b:.6g})")
        self.epsilon = epsilon
        self.b = b


class FitError(NvForgeError, RuntimeError):
    """A fit diverged or its preconditions were violated."""


class IndeterminateThicknessError(FitError):
    pass


class EmptyHistogramError(NvForgeError, ValueError):
    pass


class DepthMismatchError(NvForgeError, ValueError):
    pass


class InsufficientSamplesError(NvForgeError, ValueError):
    pass


class UnreachableTargetError(NvForgeError, ValueError):
    pass


class LinewidthBelowLifetimeError(NvForgeError, ValueError):
    pass
