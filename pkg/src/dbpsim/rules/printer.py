"""Canonical pretty-printer. parse(print(rule)) is structurally equal to rule."""

from __future__ import annotations

from .ast import Binary, Call, Expr, Lit, Rule, RuleKind, Unary, Var

_PREC = {
    "or": 1,
    "and": 2,
    "<": 4, "<=": 4, ">": 4, ">=": 4, "==": 4, "!=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
}
_NOT_PREC = 3
_NEG_PREC = 7
_ATOM_PREC = 8

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t"}


def format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def _quote(s: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def _prec(node: Expr) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _NOT_PREC if node.op == "not" else _NEG_PREC
    return _ATOM_PREC


def print_expr(node: Expr) -> str:
    if isinstance(node, Lit):
        if isinstance(node.value, bool):
            return "true" if node.value else "false"
        if isinstance(node.value, float):
            return format_number(node.value)
        return _quote(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(node.args)})"
    if isinstance(node, Unary):
        if node.op == "not":
            inner = print_expr(node.operand)
            if _prec(node.operand) < _NOT_PREC:
                inner = f"({inner})"
            return f"not {inner}"
        inner = print_expr(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Binary):
        p = _PREC[node.op]
        left = print_expr(node.left)
        right = print_expr(node.right)
        # Left-associative reparse: a same-precedence right child and any
        # lower-precedence child must keep parentheses. Comparisons do not
        # chain, so a comparison child on either side is parenthesized.
        if _prec(node.left) < p or (p == 4 and _prec(node.left) == 4):
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise AssertionError(f"unhandled node {node!r}")


def print_rule(rule: Rule) -> str:
    """Canonical text form; priority is always explicit, even when 0."""
    head = f"rule {rule.id} priority {rule.priority}"
    cond = print_expr(rule.condition)
    if rule.kind is RuleKind.SELECTION:
        return f"{head} when {cond} select {rule.target}"
    if rule.kind is RuleKind.VETO:
        return f"{head} when {cond} forbid {rule.target}"
    if rule.kind is RuleKind.CONTEXT:
        sets = ", ".join(f"{name} := {print_expr(e)}" for name, e in rule.assignments)
        return f"{head} when {cond} set {sets}"
    text = f"{head} goal when {cond}"
    if rule.progress is not None:
        text += f" progress {print_expr(rule.progress)} {rule.direction}"
    return text
