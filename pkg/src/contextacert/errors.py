"""Exception hierarchy shared by every module of the package."""


class ContextaCertError(Exception):
    """Base class for all errors raised by contextacert."""


# -- graphs -------------------------------------------------------------------
class GraphError(ContextaCertError, ValueError):
    pass


class OutOfRangeVertex(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class TooSmall(GraphError):
    pass


class TooLarge(GraphError):
    pass


class ParseError(GraphError):
    """Malformed graph text. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, cause=None):
        self.line = line
        self.cause = cause
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


# -- linear algebra -----------------------------------------------------------
class NumericsError(ContextaCertError, ArithmeticError):
    pass


class NonFinite(NumericsError):
    pass


class ConvergenceFailure(NumericsError):
    pass


class NotPSD(NumericsError):
    pass


class AsymmetricCirculant(NumericsError):
    pass


class NotSymmetric(NumericsError):
    pass


# -- SDP ----------------------------------------------------------------------
class SdpError(ContextaCertError):
    pass


class NotHermitian(SdpError):
    pass


class NumericalBreakdown(SdpError):
    pass


class MaxIterExceeded(SdpError):
    """Raised by callers that demand a Solved status; carries the best iterate."""

    def __init__(self, message, solution=None):
        self.solution = solution
        super().__init__(message)


class DualRepairFailed(SdpError):
    pass


# -- closed forms -------------------------------------------------------------
class BadParity(ContextaCertError, ValueError):
    pass


class ConstructionInvalid(ContextaCertError):
    pass


# -- certification ------------------------------------------------------------
class InfeasibleDual(ContextaCertError):
    pass


class ComplementarityGapTooLarge(ContextaCertError):
    pass


class NotSelfTestable(ContextaCertError):
    """A self-testable graph was required but the input is not one."""


# -- experiments --------------------------------------------------------------
class InvalidRealization(ContextaCertError, ValueError):
    pass


class LengthMismatch(ContextaCertError, ValueError):
    pass


class RepairDiverged(ContextaCertError):
    pass


class DimensionMismatch(ContextaCertError, ValueError):
    pass
