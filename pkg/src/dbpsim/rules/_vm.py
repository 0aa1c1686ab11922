"""Pure-Python VM for compiled condition programs.

This is the fallback backend; _vmext.pyx implements the same instruction set
compiled to C. The two must agree result-for-result on every program, errors
included, so either can serve any session interchangeably.
"""

from __future__ import annotations

from .errors import EvalError

BACKEND_NAME = "pure-python"


def run_program(program, bindings, counts, clock, last_executed):
    codes = program.codes
    args = program.args
    consts = program.consts
    names = program.names
    stack = []
    push = stack.append
    pop = stack.pop
    pc = 0
    end = len(codes)
    while pc < end:
        op = codes[pc]
        arg = args[pc]
        pc += 1
        if op == 0:  # CONST
            push(consts[arg])
        elif op == 1:  # LOAD
            name = names[arg]
            value = bindings.get(name)
            if value is None:
                raise EvalError(f"unbound variable {name!r}")
            push(value)
        elif op == 2:  # NOT
            stack[-1] = not stack[-1]
        elif op == 3:  # NEG
            stack[-1] = -stack[-1]
        elif op == 4:  # ADD
            b = pop()
            stack[-1] = stack[-1] + b
        elif op == 5:  # SUB
            b = pop()
            stack[-1] = stack[-1] - b
        elif op == 6:  # MUL
            b = pop()
            stack[-1] = stack[-1] * b
        elif op == 7:  # DIV
            b = pop()
            if b == 0:
                raise EvalError("division by zero")
            stack[-1] = stack[-1] / b
        elif op == 8:  # LT
            b = pop()
            stack[-1] = stack[-1] < b
        elif op == 9:  # LE
            b = pop()
            stack[-1] = stack[-1] <= b
        elif op == 10:  # GT
            b = pop()
            stack[-1] = stack[-1] > b
        elif op == 11:  # GE
            b = pop()
            stack[-1] = stack[-1] >= b
        elif op == 12:  # EQ
            b = pop()
            stack[-1] = stack[-1] == b
        elif op == 13:  # NE
            b = pop()
            stack[-1] = stack[-1] != b
        elif op == 14:  # JUMP_IF_FALSE_OR_POP
            if stack[-1]:
                pop()
            else:
                pc = arg
        elif op == 15:  # JUMP_IF_TRUE_OR_POP
            if stack[-1]:
                pc = arg
            else:
                pop()
        elif op == 16:  # EXEC_COUNT
            push(float(counts.get(names[arg], 0)))
        elif op == 17:  # ELAPSED
            push(clock)
        else:  # LAST_EXEC
            push(last_executed)
    return stack[-1]
