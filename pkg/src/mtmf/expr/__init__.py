"""Closed-form expression engine: parse, evaluate, differentiate, simplify."""
from .diff import diff, mixed_derivative, nth_derivative
from .evaluate import compile_expr, evaluate, evaluate_columns, evaluate_many
from .nodes import (
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Indicator,
    Mul,
    Neg,
    Param,
    Pow,
    Var,
    to_expr,
)
from .parse import parse
from .printing import to_text
from .poly import as_polynomial, format_polynomial, poly_expr, substitute
from .simplify import simplify

__all__ = [
    "Add", "as_polynomial", "format_polynomial", "poly_expr", "substitute", "Const", "Div", "Expr", "Func", "Indicator", "Mul", "Neg", "ONE",
    "Param", "Pow", "Var", "ZERO", "compile_expr", "diff", "evaluate",
    "evaluate_columns", "evaluate_many", "mixed_derivative", "nth_derivative",
    "parse", "simplify", "to_expr", "to_text",
]
