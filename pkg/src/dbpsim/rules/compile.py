"""Flattens expression trees into short stack programs for the VM backends.

Conditions are evaluated once per rule per simulation step; over a large
batch run this loop dominates, so expressions compile once to opcode arrays
and the inner loop never touches the AST.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from . import ops
from .ast import Binary, Call, Expr, Lit, Unary, Var

_BINOPS = {
    "+": ops.OP_ADD,
    "-": ops.OP_SUB,
    "*": ops.OP_MUL,
    "/": ops.OP_DIV,
    "<": ops.OP_LT,
    "<=": ops.OP_LE,
    ">": ops.OP_GT,
    ">=": ops.OP_GE,
    "==": ops.OP_EQ,
    "!=": ops.OP_NE,
}


@dataclass(frozen=True)
class Program:
    codes: array  # array('i') opcodes
    args: array   # array('i') operands, parallel to codes
    consts: tuple
    names: tuple[str, ...]


class _Emitter:
    def __init__(self):
        self.codes: list[int] = []
        self.args: list[int] = []
        self.consts: list = []
        self.names: list[str] = []

    def emit(self, code: int, arg: int = 0) -> int:
        self.codes.append(code)
        self.args.append(arg)
        return len(self.codes) - 1

    def const_index(self, value) -> int:
        for i, c in enumerate(self.consts):
            if type(c) is type(value) and c == value:
                return i
        self.consts.append(value)
        return len(self.consts) - 1

    def name_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            self.names.append(name)
            return len(self.names) - 1

    def walk(self, node: Expr) -> None:
        if isinstance(node, Lit):
            self.emit(ops.OP_CONST, self.const_index(node.value))
        elif isinstance(node, Var):
            self.emit(ops.OP_LOAD, self.name_index(node.name))
        elif isinstance(node, Unary):
            self.walk(node.operand)
            self.emit(ops.OP_NOT if node.op == "not" else ops.OP_NEG)
        elif isinstance(node, Call):
            if node.func == "executedCount":
                self.emit(ops.OP_EXEC_COUNT, self.name_index(node.args[0]))
            elif node.func == "elapsed":
                self.emit(ops.OP_ELAPSED)
            else:
                self.emit(ops.OP_LAST_EXEC)
        elif isinstance(node, Binary):
            if node.op in ("and", "or"):
                self.walk(node.left)
                jump_op = (
                    ops.OP_JUMP_IF_FALSE_OR_POP
                    if node.op == "and"
                    else ops.OP_JUMP_IF_TRUE_OR_POP
                )
                patch_at = self.emit(jump_op)
                self.walk(node.right)
                self.args[patch_at] = len(self.codes)
            else:
                self.walk(node.left)
                self.walk(node.right)
                self.emit(_BINOPS[node.op])
        else:
            raise AssertionError(f"unhandled node {node!r}")


def compile_expr(node: Expr) -> Program:
    em = _Emitter()
    em.walk(node)
    return Program(
        codes=array("i", em.codes),
        args=array("i", em.args),
        consts=tuple(em.consts),
        names=tuple(em.names),
    )
