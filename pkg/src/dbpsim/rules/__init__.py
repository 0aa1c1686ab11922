"""Rule language: grammar, parser, canonical printer, and evaluator."""

from .ast import (
    Binary,
    Call,
    Expr,
    Lit,
    Rule,
    RuleKind,
    RuleSet,
    RuleSetError,
    Unary,
    Value,
    Var,
)
from .errors import EvalError, ParseError
from .evaluator import BACKEND, TraceView, applicable_rules, eval_expr, rule_sort_key
from .parser import parse_expr, parse_rule
from .printer import print_expr, print_rule

__all__ = [
    "BACKEND",
    "Binary",
    "Call",
    "EvalError",
    "Expr",
    "Lit",
    "ParseError",
    "Rule",
    "RuleKind",
    "RuleSet",
    "RuleSetError",
    "TraceView",
    "Unary",
    "Value",
    "Var",
    "applicable_rules",
    "eval_expr",
    "parse_expr",
    "parse_rule",
    "print_expr",
    "print_rule",
    "rule_sort_key",
]
