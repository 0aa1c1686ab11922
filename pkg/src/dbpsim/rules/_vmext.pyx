# cython: language_level=3, boundscheck=False
"""Compiled VM backend for condition programs.

Instruction set and semantics mirror _vm.py exactly; tests assert the two
backends agree on every program, including raised errors.
"""

from .errors import EvalError

BACKEND_NAME = "compiled"

cdef enum:
    OP_CONST = 0
    OP_LOAD = 1
    OP_NOT = 2
    OP_NEG = 3
    OP_ADD = 4
    OP_SUB = 5
    OP_MUL = 6
    OP_DIV = 7
    OP_LT = 8
    OP_LE = 9
    OP_GT = 10
    OP_GE = 11
    OP_EQ = 12
    OP_NE = 13
    OP_JUMP_IF_FALSE_OR_POP = 14
    OP_JUMP_IF_TRUE_OR_POP = 15
    OP_EXEC_COUNT = 16
    OP_ELAPSED = 17
    OP_LAST_EXEC = 18

OPCODE_TABLE = {
    "OP_CONST": OP_CONST,
    "OP_LOAD": OP_LOAD,
    "OP_NOT": OP_NOT,
    "OP_NEG": OP_NEG,
    "OP_ADD": OP_ADD,
    "OP_SUB": OP_SUB,
    "OP_MUL": OP_MUL,
    "OP_DIV": OP_DIV,
    "OP_LT": OP_LT,
    "OP_LE": OP_LE,
    "OP_GT": OP_GT,
    "OP_GE": OP_GE,
    "OP_EQ": OP_EQ,
    "OP_NE": OP_NE,
    "OP_JUMP_IF_FALSE_OR_POP": OP_JUMP_IF_FALSE_OR_POP,
    "OP_JUMP_IF_TRUE_OR_POP": OP_JUMP_IF_TRUE_OR_POP,
    "OP_EXEC_COUNT": OP_EXEC_COUNT,
    "OP_ELAPSED": OP_ELAPSED,
    "OP_LAST_EXEC": OP_LAST_EXEC,
}


def run_program(program, dict bindings, counts, clock, last_executed):
    cdef const int[::1] codes = program.codes
    cdef const int[::1] args = program.args
    cdef tuple consts = program.consts
    cdef tuple names = program.names
    cdef list stack = []
    cdef int pc = 0
    cdef int end = codes.shape[0]
    cdef int op, arg
    cdef object a, b, value

    while pc < end:
        op = codes[pc]
        arg = args[pc]
        pc += 1
        if op == OP_CONST:
            stack.append(consts[arg])
        elif op == OP_LOAD:
            value = bindings.get(names[arg])
            if value is None:
                raise EvalError(f"unbound variable {names[arg]!r}")
            stack.append(value)
        elif op == OP_NOT:
            stack[-1] = not stack[-1]
        elif op == OP_NEG:
            stack[-1] = -stack[-1]
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op == OP_SUB:
            b = stack.pop()
            stack[-1] = stack[-1] - b
        elif op == OP_MUL:
            b = stack.pop()
            stack[-1] = stack[-1] * b
        elif op == OP_DIV:
            b = stack.pop()
            if b == 0:
                raise EvalError("division by zero")
            stack[-1] = stack[-1] / b
        elif op == OP_LT:
            b = stack.pop()
            stack[-1] = stack[-1] < b
        elif op == OP_LE:
            b = stack.pop()
            stack[-1] = stack[-1] <= b
        elif op == OP_GT:
            b = stack.pop()
            stack[-1] = stack[-1] > b
        elif op == OP_GE:
            b = stack.pop()
            stack[-1] = stack[-1] >= b
        elif op == OP_EQ:
            b = stack.pop()
            stack[-1] = stack[-1] == b
        elif op == OP_NE:
            b = stack.pop()
            stack[-1] = stack[-1] != b
        elif op == OP_JUMP_IF_FALSE_OR_POP:
            if stack[-1]:
                stack.pop()
            else:
                pc = arg
        elif op == OP_JUMP_IF_TRUE_OR_POP:
            if stack[-1]:
                pc = arg
            else:
                stack.pop()
        elif op == OP_EXEC_COUNT:
            stack.append(float(counts.get(names[arg], 0)))
        elif op == OP_ELAPSED:
            stack.append(clock)
        else:
            stack.append(last_executed)
    return stack[-1]
