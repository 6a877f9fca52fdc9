"""Exception hierarchy shared by every module of the package."""


class MtmfError(Exception):
    """Base class for all errors raised by :mod:`mtmf`."""


class ExprError(MtmfError):
    """Problems with an expression tree."""


class ExprSyntaxError(ExprError):
    """Malformed expression text.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = ""
        if text:
            pointer = f"\n  {text}\n  {' ' * position}^"
        super().__init__(f"{message} (at position {position}){pointer}")


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of a partial function (log, sqrt, 1/x...)."""


class NonDifferentiableError(ExprError):
    """Symbolic differentiation hit a node without a derivative."""


class NotPolynomialError(ExprError):
    """An expression could not be reduced to explicit polynomial form."""


class ArityError(MtmfError, ValueError):
    """Mismatched number of variables."""


class SeriesOverflowError(MtmfError, ArithmeticError):
    """A series term became non-finite; ``n`` is the offending index."""

    def __init__(self, n: int, message: str = ""):
        self.n = n
        super().__init__(message or f"non-finite series term at n={n}")


class QuadratureError(MtmfError):
    """Adaptive quadrature failed to reach its tolerance."""


class BudgetExceededError(MtmfError):
    """A combinatorial or expression-size budget was exceeded."""


class RankDeficiencyError(MtmfError):
    """Gram-Schmidt met a (numerically) linearly dependent input."""

    def __init__(self, index: int, ratio: float):
        self.index = index
        self.ratio = ratio
        super().__init__(
            f"input {index} is numerically dependent on the previous ones "
            f"(residual norm ratio {ratio:.3e})"
        )


class SingularSystemError(MtmfError):
    """A linear system (boundary conditions, Wronskian) is singular."""

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(message)


class RecoveryError(MtmfError):
    """Coefficient recovery refused (e.g. the base function vanishes)."""
