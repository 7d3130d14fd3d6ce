"""Bytecode and prune-rule encodings shared by the enumeration kernels.

The Cython kernel hard-codes the same integer values; the kernel parity tests
guard against drift.
"""

# RPN opcodes
OP_CMP = 0
OP_AND = 1
OP_OR = 2
OP_NOT = 3
OP_TRUE = 4
OP_FALSE = 5

# comparison operand sources
SRC_SUM = 0
SRC_MIN = 1
SRC_MAX = 2
SRC_COUNT = 3
SRC_AVG = 4
SRC_LIT = 5

# comparison operators
CMP_LT = 0
CMP_LE = 1
CMP_GT = 2
CMP_GE = 3
CMP_EQ = 4
CMP_NE = 5

CMP_CODE = {"<": CMP_LT, "<=": CMP_LE, ">": CMP_GT, ">=": CMP_GE, "=": CMP_EQ, "!=": CMP_NE}

# accumulator step kinds
STEP_SUM = 0
STEP_MIN = 1
STEP_MAX = 2

# prune rules; strict=1 means the rule also fires on equality with the bound
PR_SUM_UB = 0  # fire when partial sum reaches the upper bound
PR_SUM_LB = 1  # fire when partial sum + remaining sum cannot reach the lower bound
PR_CNT_UB = 2
PR_CNT_LB = 3
PR_MIN_LB = 4  # fire when the running minimum already violates min(a) > c
PR_MAX_UB = 5  # fire when the running maximum already violates max(a) < c
