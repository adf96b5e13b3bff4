"""Exception hierarchy for curveflow."""


class CurveflowError(Exception):
    """Base class for all curveflow errors."""


class DomainError(CurveflowError):
    """An argument lies outside its admissible domain (annulus, positive cone, ...)."""


class ConvexityError(CurveflowError):
    """Strict convexity was lost; carries the first offending grid node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DataError(CurveflowError):
    """Prescribed data violated its contract (e.g. f must be positive)."""


class BarrierError(CurveflowError):
    """No admissible barrier exists in the given annulus, or a barrier check failed."""


class StallError(CurveflowError):
    """Time stepping stalled (dt underflow); carries a diagnostics snapshot."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class MonitorError(CurveflowError):
    """A runtime monitor (barrier sandwich, monotonicity, pinching) was violated."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class OracleError(CurveflowError):
    """An independent verification oracle failed to converge."""


class ConfigError(CurveflowError):
    """Invalid run configuration (schema violation or inconsistent choices)."""


class ExpressionError(CurveflowError):
    """Expression parse or evaluation error; carries byte position and expectation."""

    def __init__(self, message, position=None, expected=None):
        super().__init__(message)
        self.position = position
        self.expected = expected
