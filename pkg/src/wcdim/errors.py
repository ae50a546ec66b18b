"""Exception hierarchy shared by all wcdim modules."""


class WcdimError(Exception):
    """Base class for every error raised by this package."""


# coefficients / moran
class EvaluatesOutsideUnit(WcdimError, ValueError):
    pass


class InvalidCoefficient(WcdimError, ValueError):
    pass


class GridTooCoarse(WcdimError, RuntimeError):
    pass


# expressions
class ExpressionSyntaxError(WcdimError, ValueError):
    def __init__(self, message: str, column: int = 1):
        super().__init__(f"{message} (column {column})")
        self.column = column


class ExpressionDomainError(WcdimError, ArithmeticError):
    pass


class UnboundVariable(WcdimError, KeyError):
    pass


# metric spaces and maps
class DimensionMismatch(WcdimError, ValueError):
    pass


class NoConvergence(WcdimError, RuntimeError):
    def __init__(self, max_iter: int, reason: str = ""):
        msg = f"fixed-point iteration did not converge within {max_iter} steps"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.max_iter = max_iter


# attractors
class GridTooLarge(WcdimError, ValueError):
    pass


class EmptySet(WcdimError, ValueError):
    pass


class OutsideDomain(WcdimError, RuntimeError):
    pass


# covers
class DegenerateK(WcdimError, ValueError):
    pass


class TooManyWords(WcdimError, RuntimeError):
    pass


class DepthTooShallow(WcdimError, ValueError):
    pass


# box counting
class ScaleTooSmall(WcdimError, ValueError):
    pass


class DegenerateFit(WcdimError, ValueError):
    pass


# scene files
class SceneError(WcdimError):
    """Any problem found while reading a scene; carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class SceneSyntaxError(SceneError):
    pass


class DuplicateMapName(SceneError):
    pass


class FewerThanTwoMaps(SceneError):
    pass


class CoefficientOutOfRange(SceneError):
    pass
