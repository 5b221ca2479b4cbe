"""Well-formedness constraint language: parsing, checking, evaluation."""

from .ast import ConstraintExpr
from .evaluator import ConstraintResult, Violation, eval_all, eval_constraint
from .parser import parse_constraint, print_constraint
from .typecheck import typecheck

__all__ = [
    "ConstraintExpr",
    "ConstraintResult",
    "Violation",
    "eval_all",
    "eval_constraint",
    "parse_constraint",
    "print_constraint",
    "typecheck",
]
