"""Opcode numbering shared by the expression compiler and both VM backends.

The compiled backend (_vmext.pyx) mirrors these values in a cdef enum; a unit
test asserts the two tables agree.
"""

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

TABLE = {name: value for name, value in list(globals().items()) if name.startswith("OP_")}
