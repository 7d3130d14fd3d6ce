"""Pure-Python enumeration kernel.

Implements exactly the same depth-first search, pruning rules, node counting,
and condition bytecode as the compiled kernel in _kernel.pyx, using unbounded
Python integers. It is both the fallback when the extension is missing and the
exact-arithmetic path when scaled values would overflow 64-bit integers.
"""

from __future__ import annotations

from ._opcodes import (
    CMP_EQ,
    CMP_GE,
    CMP_GT,
    CMP_LE,
    CMP_LT,
    OP_AND,
    OP_CMP,
    OP_FALSE,
    OP_NOT,
    OP_OR,
    OP_TRUE,
    PR_CNT_LB,
    PR_CNT_UB,
    PR_MAX_UB,
    PR_MIN_LB,
    PR_SUM_LB,
    PR_SUM_UB,
    SRC_AVG,
    SRC_COUNT,
    SRC_LIT,
    SRC_MAX,
    SRC_MIN,
    SRC_SUM,
    STEP_MIN,
    STEP_SUM,
)
from .errors import LimitExceeded
from .values import ONE, round_half_even_div


def run_kernel(prog, max_generated: int, max_results: int):
    """Enumerate satisfying subsets as tuples of row positions.

    Returns (results, nodes_explored). Nodes are counted on entry, before the
    prune test, with the empty root counted once, so an immediately pruned
    search explores at most n + 1 nodes.
    """
    n = prog.n
    nt = prog.n_terms
    vals = prog.term_values
    suffix = prog.suffix
    steps = prog.term_step
    ops = prog.ops
    prunes = prog.prunes

    acc = [[0] * nt for _ in range(n + 1)]
    cur = [0] * n
    loop_j = [0] * (n + 1)
    results: list[tuple[int, ...]] = []
    nodes = 1  # the empty root
    depth = 0

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

        new = acc[d1]
        old = acc[depth]
        for t in range(nt):
            v = vals[t][j]
            if depth == 0:
                new[t] = v
            else:
                step = steps[t]
                if step == STEP_SUM:
                    new[t] = old[t] + v
                elif step == STEP_MIN:
                    new[t] = v if v < old[t] else old[t]
                else:
                    new[t] = v if v > old[t] else old[t]

        if _pruned(prunes, new, suffix, n, d1, j + 1):
            continue

        if _eval(ops, new, d1):
            results.append(tuple(cur[:d1]))
            if len(results) > max_results:
                raise LimitExceeded("max_results", max_results)
        depth = d1
        loop_j[d1] = j + 1

    return results, nodes


def _pruned(prunes, acc_row, suffix, n, count, frontier) -> bool:
    for kind, term, bound, strict in prunes:
        if kind == PR_SUM_UB:
            x = acc_row[term]
            fire = x >= bound if strict else x > bound
        elif kind == PR_SUM_LB:
            x = acc_row[term] + suffix[term][frontier]
            fire = x <= bound if strict else x < bound
        elif kind == PR_CNT_UB:
            x = count * ONE
            fire = x >= bound if strict else x > bound
        elif kind == PR_CNT_LB:
            x = (count + n - frontier) * ONE
            fire = x <= bound if strict else x < bound
        elif kind == PR_MIN_LB:
            x = acc_row[term]
            fire = x <= bound if strict else x < bound
        else:  # PR_MAX_UB
            x = acc_row[term]
            fire = x >= bound if strict else x > bound
        if fire:
            return True
    return False


def _side(src, term, acc_row, count):
    if src == SRC_COUNT:
        return count * ONE
    if src == SRC_AVG:
        return round_half_even_div(acc_row[term], count)
    return acc_row[term]


def _eval(ops, acc_row, count) -> bool:
    stack: list[bool] = []
    push = stack.append
    for code, srcl, terml, cmpc, srcr, termr, rhs in ops:
        if code == OP_CMP:
            left = _side(srcl, terml, acc_row, count)
            right = rhs if srcr == SRC_LIT else _side(srcr, termr, acc_row, count)
            if cmpc == CMP_LT:
                push(left < right)
            elif cmpc == CMP_LE:
                push(left <= right)
            elif cmpc == CMP_GT:
                push(left > right)
            elif cmpc == CMP_GE:
                push(left >= right)
            elif cmpc == CMP_EQ:
                push(left == right)
            else:
                push(left != right)
        elif code == OP_AND:
            b = stack.pop()
            a = stack.pop()
            push(a and b)
        elif code == OP_OR:
            b = stack.pop()
            a = stack.pop()
            push(a or b)
        elif code == OP_NOT:
            push(not stack.pop())
        elif code == OP_TRUE:
            push(True)
        else:  # OP_FALSE
            push(False)
    return stack[-1]
