# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled enumeration kernel.

Same DFS, pruning rules, node counting, and condition bytecode as
_kernel_py.run_kernel, operating on scale-6 int64 values. Callers guarantee
(via the compile-time safety check) that no intermediate value can overflow
64 bits. Encodings mirror _opcodes.py.
"""

from libc.stdlib cimport free, malloc

from .errors import LimitExceeded

DEF OP_CMP = 0
DEF OP_AND = 1
DEF OP_OR = 2
DEF OP_NOT = 3
DEF OP_TRUE = 4
DEF OP_FALSE = 5

DEF SRC_SUM = 0
DEF SRC_MIN = 1
DEF SRC_MAX = 2
DEF SRC_COUNT = 3
DEF SRC_AVG = 4
DEF SRC_LIT = 5

DEF CMP_LT = 0
DEF CMP_LE = 1
DEF CMP_GT = 2
DEF CMP_GE = 3
DEF CMP_EQ = 4
DEF CMP_NE = 5

DEF STEP_SUM = 0
DEF STEP_MIN = 1
DEF STEP_MAX = 2

DEF PR_SUM_UB = 0
DEF PR_SUM_LB = 1
DEF PR_CNT_UB = 2
DEF PR_CNT_LB = 3
DEF PR_MIN_LB = 4
DEF PR_MAX_UB = 5

DEF SCALE_ONE = 1000000


cdef inline long long _avg_half_even(long long s, long long c) nogil:
    # floor division first (C division truncates), then round half to even
    cdef long long q = s / c
    cdef long long r = s - q * c
    cdef long long t
    if r != 0 and ((r < 0) != (c < 0)):
        q -= 1
        r += c
    t = 2 * r
    if t > c or (t == c and (q & 1) != 0):
        q += 1
    return q


def run_kernel(int n, int n_terms,
               long long[::1] values,      # n_terms * n, row-position major per term
               long long[::1] suffix,      # n_terms * (n + 1)
               int[::1] term_step,
               int[::1] op_code, int[::1] op_srcl, int[::1] op_terml,
               int[::1] op_cmp, int[::1] op_srcr, int[::1] op_termr,
               long long[::1] op_rhs, int n_ops,
               int[::1] pr_kind, int[::1] pr_term, long long[::1] pr_bound,
               int[::1] pr_strict, int n_prunes,
               long long max_generated, long long max_results):
    """Returns (list of member-position tuples, nodes_explored)."""
    cdef long long *acc = <long long *> malloc(sizeof(long long) * (n + 1) * max(n_terms, 1))
    cdef int *cur = <int *> malloc(sizeof(int) * max(n, 1))
    cdef int *loop_j = <int *> malloc(sizeof(int) * (n + 1))
    cdef unsigned char *bstack = <unsigned char *> malloc(max(n_ops, 1))
    if acc == NULL or cur == NULL or loop_j == NULL or bstack == NULL:
        free(acc); free(cur); free(loop_j); free(bstack)
        raise MemoryError()

    cdef long long nodes = 1
    cdef long long n_found = 0
    cdef int depth = 0, j, d1, t, k, step, sp, src, frontier
    cdef long long v, x, left, right, bound
    cdef bint fire, ok
    results = []

    loop_j[0] = 0
    try:
        while depth >= 0:
            j = loop_j[depth]
            if j >= n:
                depth -= 1
                continue
            loop_j[depth] = j + 1
            nodes += 1
            if nodes > max_generated:
                raise LimitExceeded("max_generated", max_generated)
            cur[depth] = j
            d1 = depth + 1

            for t in range(n_terms):
                v = values[t * n + j]
                if depth == 0:
                    acc[d1 * n_terms + t] = v
                else:
                    step = term_step[t]
                    x = acc[depth * n_terms + t]
                    if step == STEP_SUM:
                        acc[d1 * n_terms + t] = x + v
                    elif step == STEP_MIN:
                        acc[d1 * n_terms + t] = v if v < x else x
                    else:
                        acc[d1 * n_terms + t] = v if v > x else x

            # prune check: sound only because every rule is monotone
            frontier = j + 1
            fire = False
            for k in range(n_prunes):
                t = pr_term[k]
                bound = pr_bound[k]
                if pr_kind[k] == PR_SUM_UB:
                    x = acc[d1 * n_terms + t]
                    fire = x >= bound if pr_strict[k] else x > bound
                elif pr_kind[k] == PR_SUM_LB:
                    x = acc[d1 * n_terms + t] + suffix[t * (n + 1) + frontier]
                    fire = x <= bound if pr_strict[k] else x < bound
                elif pr_kind[k] == PR_CNT_UB:
                    x = (<long long> d1) * SCALE_ONE
                    fire = x >= bound if pr_strict[k] else x > bound
                elif pr_kind[k] == PR_CNT_LB:
                    x = (<long long> (d1 + n - frontier)) * SCALE_ONE
                    fire = x <= bound if pr_strict[k] else x < bound
                elif pr_kind[k] == PR_MIN_LB:
                    x = acc[d1 * n_terms + t]
                    fire = x <= bound if pr_strict[k] else x < bound
                else:  # PR_MAX_UB
                    x = acc[d1 * n_terms + t]
                    fire = x >= bound if pr_strict[k] else x > bound
                if fire:
                    break
            if fire:
                continue

            # condition bytecode
            sp = 0
            for k in range(n_ops):
                if op_code[k] == OP_CMP:
                    src = op_srcl[k]
                    if src == SRC_COUNT:
                        left = (<long long> d1) * SCALE_ONE
                    elif src == SRC_AVG:
                        left = _avg_half_even(acc[d1 * n_terms + op_terml[k]], d1)
                    else:
                        left = acc[d1 * n_terms + op_terml[k]]
                    src = op_srcr[k]
                    if src == SRC_LIT:
                        right = op_rhs[k]
                    elif src == SRC_COUNT:
                        right = (<long long> d1) * SCALE_ONE
                    elif src == SRC_AVG:
                        right = _avg_half_even(acc[d1 * n_terms + op_termr[k]], d1)
                    else:
                        right = acc[d1 * n_terms + op_termr[k]]
                    if op_cmp[k] == CMP_LT:
                        bstack[sp] = left < right
                    elif op_cmp[k] == CMP_LE:
                        bstack[sp] = left <= right
                    elif op_cmp[k] == CMP_GT:
                        bstack[sp] = left > right
                    elif op_cmp[k] == CMP_GE:
                        bstack[sp] = left >= right
                    elif op_cmp[k] == CMP_EQ:
                        bstack[sp] = left == right
                    else:
                        bstack[sp] = left != right
                    sp += 1
                elif op_code[k] == OP_AND:
                    sp -= 1
                    bstack[sp - 1] = bstack[sp - 1] and bstack[sp]
                elif op_code[k] == OP_OR:
                    sp -= 1
                    bstack[sp - 1] = bstack[sp - 1] or bstack[sp]
                elif op_code[k] == OP_NOT:
                    bstack[sp - 1] = not bstack[sp - 1]
                elif op_code[k] == OP_TRUE:
                    bstack[sp] = 1
                    sp += 1
                else:  # OP_FALSE
                    bstack[sp] = 0
                    sp += 1
            ok = bstack[sp - 1] != 0

            if ok:
                n_found += 1
                if n_found > max_results:
                    raise LimitExceeded("max_results", max_results)
                results.append(tuple([cur[t] for t in range(d1)]))
            depth = d1
            loop_j[d1] = j + 1
    finally:
        free(acc)
        free(cur)
        free(loop_j)
        free(bstack)

    return results, nodes
