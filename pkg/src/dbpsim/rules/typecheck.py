"""Static type checking for rule expressions.

Arithmetic takes numbers, logic takes booleans, == and != take both sides of
one type, ordering comparisons take numbers. With a declared-variable
environment every referenced name must be declared and used at its declared
type; without one, variable types are inferred from use and conflicting uses
are rejected. All violations are reported at parse+check time with
positions, never at evaluation time.
"""

from __future__ import annotations

from .ast import BUILTINS, Binary, Call, Expr, Lit, Unary, Var
from .errors import ParseError

NUM, BOOL, STR = "num", "bool", "str"

_TYPE_NAMES = {NUM: "number", BOOL: "boolean", STR: "string"}


class _TVar:
    __slots__ = ("resolved",)

    def __init__(self):
        self.resolved: object = None


def _resolve(t):
    while isinstance(t, _TVar) and t.resolved is not None:
        t = t.resolved
    return t


def _type_name(t) -> str:
    t = _resolve(t)
    if isinstance(t, _TVar):
        return "unknown"
    return _TYPE_NAMES[t]


class TypeChecker:
    def __init__(self, var_types: dict[str, str] | None = None):
        # None means open-world inference; a dict means closed declarations.
        self.declared = var_types
        self.inferred: dict[str, _TVar] = {}

    def _var_type(self, node: Var):
        if self.declared is not None:
            if node.name not in self.declared:
                raise ParseError(
                    f"unknown variable {node.name!r}", node.pos[0], node.pos[1]
                )
            return self.declared[node.name]
        if node.name not in self.inferred:
            self.inferred[node.name] = _TVar()
        return self.inferred[node.name]

    def _unify(self, a, b, pos: tuple[int, int], what: str) -> None:
        a, b = _resolve(a), _resolve(b)
        if a is b:
            return
        if isinstance(a, _TVar):
            a.resolved = b
            return
        if isinstance(b, _TVar):
            b.resolved = a
            return
        if a != b:
            raise ParseError(
                f"{what}: expected {_type_name(a)}, got {_type_name(b)}",
                pos[0],
                pos[1],
            )

    def check(self, node: Expr, expected=None, what: str = "expression"):
        t = self._infer(node)
        if expected is not None:
            self._unify(expected, t, node.pos, what)
        return _resolve(t)

    def _infer(self, node: Expr):
        if isinstance(node, Lit):
            if isinstance(node.value, bool):
                return BOOL
            if isinstance(node.value, float):
                return NUM
            return STR
        if isinstance(node, Var):
            return self._var_type(node)
        if isinstance(node, Unary):
            if node.op == "not":
                self.check(node.operand, BOOL, "operand of 'not'")
                return BOOL
            self.check(node.operand, NUM, "operand of unary '-'")
            return NUM
        if isinstance(node, Call):
            return BUILTINS[node.func][1]
        if isinstance(node, Binary):
            op = node.op
            if op in ("and", "or"):
                self.check(node.left, BOOL, f"left operand of {op!r}")
                self.check(node.right, BOOL, f"right operand of {op!r}")
                return BOOL
            if op in ("+", "-", "*", "/"):
                self.check(node.left, NUM, f"left operand of {op!r}")
                self.check(node.right, NUM, f"right operand of {op!r}")
                return NUM
            if op in ("<", "<=", ">", ">="):
                self.check(node.left, NUM, f"left operand of {op!r}")
                self.check(node.right, NUM, f"right operand of {op!r}")
                return BOOL
            # == and != require both sides to share one type.
            lt = self._infer(node.left)
            rt = self._infer(node.right)
            self._unify(lt, rt, node.pos, f"operands of {op!r} must have equal types")
            return BOOL
        raise AssertionError(f"unhandled node {node!r}")
