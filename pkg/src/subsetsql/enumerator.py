"""Pruned subset enumeration: the engine's performance core.

Enumeration walks the inclusion tree depth-first in rowid order, so output
falls out in canonical (lexicographic) order without sorting. Aggregate
conditions are compiled once into scale-6 integer bytecode plus a list of
monotone prune rules; a branch is abandoned only when a rule proves that no
extension of the current subset can satisfy its conjunct. Non-monotone
conjuncts (negative column values, averages, disjunctions) contribute no
rules and are handled by the exact per-node condition check, which makes the
result identical to filtering the materialized power set.

Two interchangeable kernels execute the search: a compiled Cython kernel on
int64 arithmetic and a pure-Python kernel on unbounded integers. The compiled
kernel is selected at import time when the extension built and the compiled
program is provably overflow-free; otherwise the Python kernel runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from ._opcodes import (
    CMP_CODE,
    CMP_EQ,
    CMP_NE,
    OP_AND,
    OP_CMP,
    OP_FALSE,
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
    STEP_MAX,
    STEP_MIN,
    STEP_SUM,
)
from ._kernel_py import run_kernel as _run_py
from .errors import KindError, SemanticError
from .families import RelationOfSubsets, validate_aggregate_cond
from .relation import Relation
from .subsets import BaseExtension, Subset, base_of
from .values import KIND_DEC, KIND_INT, KIND_STR, ONE, kind_of, numeric_scaled

try:
    from ._kernel import run_kernel as _run_compiled
except ImportError:  # extension not built; pure-Python kernel covers everything
    _run_compiled = None

INT64_SAFE_LIMIT = 2**61


def compiled_kernel_available() -> bool:
    return _run_compiled is not None


@dataclass(frozen=True)
class Limits:
    max_generated: int = 1_000_000
    max_results: int = 100_000
    naive_cap: int = 20

    def __post_init__(self):
        if self.max_generated <= 0 or self.max_results <= 0 or self.naive_cap <= 0:
            raise ValueError("limits must be positive")


@dataclass
class CompiledProgram:
    n: int
    n_terms: int = 0
    term_step: list[int] = field(default_factory=list)
    term_values: list[list[int]] = field(default_factory=list)
    suffix: list[list[int]] = field(default_factory=list)
    ops: list[tuple] = field(default_factory=list)  # (code, srcl, terml, cmp, srcr, termr, rhs)
    prunes: list[tuple] = field(default_factory=list)  # (kind, term, bound, strict)
    int64_safe: bool = True


@dataclass(frozen=True)
class EnumerationStats:
    nodes_explored: int
    kernel: str
    n_results: int


_STEP_OF = {"sum": STEP_SUM, "min": STEP_MIN, "max": STEP_MAX, "avg": STEP_SUM}


class _Compiler:
    def __init__(self, schema, rows):
        self.schema = schema
        self.rows = rows
        self.prog = CompiledProgram(n=len(rows))
        self._term_index: dict[tuple[int, int], int] = {}

    def compile(self, cond) -> CompiledProgram:
        norm = ex.nnf(cond)
        self._emit(norm)
        for conjunct in ex.conjuncts(norm):
            self._extract_prunes(conjunct)
        prog = self.prog
        prog.suffix = [_suffix_sums(v) for v in prog.term_values]
        prog.int64_safe = self._check_int64_safe()
        return prog

    # --- terms ---------------------------------------------------------

    def _term(self, step: int, attr_idx: int) -> int:
        key = (step, attr_idx)
        if key not in self._term_index:
            scaled = [numeric_scaled(r.values[attr_idx]) for r in self.rows]
            self._term_index[key] = self.prog.n_terms
            self.prog.term_step.append(step)
            self.prog.term_values.append(scaled)
            self.prog.n_terms += 1
        return self._term_index[key]

    def _agg_side(self, agg: ex.Agg) -> tuple[int, int, str]:
        """(src, term, result_kind) for an aggregate operand."""
        if agg.fn == "count":
            return SRC_COUNT, -1, KIND_INT
        try:
            idx = self.schema.index_of(agg.arg.name, agg.arg.table)
        except SemanticError:
            raise SemanticError(f"unknown attribute in aggregate {agg.render()!r}") from None
        kind = self.schema.attr_at(idx).kind
        if kind == KIND_STR:
            raise KindError(f"aggregate {agg.render()!r} over a string attribute")
        if agg.fn == "avg":
            return SRC_AVG, self._term(STEP_SUM, idx), KIND_DEC
        src = {"sum": SRC_SUM, "min": SRC_MIN, "max": SRC_MAX}[agg.fn]
        return src, self._term(_STEP_OF[agg.fn], idx), kind

    # --- bytecode ------------------------------------------------------

    def _emit(self, e) -> None:
        ops = self.prog.ops
        if isinstance(e, ex.BoolLit):
            ops.append((OP_TRUE if e.value else OP_FALSE, 0, 0, 0, 0, 0, 0))
            return
        if isinstance(e, (ex.And, ex.Or)):
            code = OP_AND if isinstance(e, ex.And) else OP_OR
            self._emit(e.items[0])
            for item in e.items[1:]:
                self._emit(item)
                ops.append((code, 0, 0, 0, 0, 0, 0))
            return
        if isinstance(e, ex.Cmp):
            self._emit_cmp(e)
            return
        raise TypeError(f"unexpected node in normalized condition: {e!r}")

    def _emit_cmp(self, c: ex.Cmp) -> None:
        ops = self.prog.ops
        if isinstance(c.lhs, ex.Literal) and isinstance(c.rhs, ex.Agg):
            c = ex.swap_cmp(c)
        lhs, rhs = c.lhs, c.rhs

        if isinstance(lhs, ex.Literal) and isinstance(rhs, ex.Literal):
            from .values import compare

            value = compare(c.op, lhs.value, rhs.value)
            ops.append((OP_TRUE if value else OP_FALSE, 0, 0, 0, 0, 0, 0))
            return

        if not isinstance(lhs, ex.Agg):
            raise SemanticError(f"per-tuple atom {c.render()!r} cannot be enumerated")
        srcl, terml, kindl = self._agg_side(lhs)

        if isinstance(rhs, ex.Agg):
            srcr, termr, kindr = self._agg_side(rhs)
            rhs_scaled = 0
        elif isinstance(rhs, ex.Literal):
            kindr = kind_of(rhs.value)
            if kindr == KIND_STR:
                if c.op in ("=", "!="):
                    ops.append((OP_FALSE if c.op == "=" else OP_TRUE, 0, 0, 0, 0, 0, 0))
                    return
                raise KindError(f"ordering comparison with a string literal in {c.render()!r}")
            srcr, termr = SRC_LIT, -1
            rhs_scaled = numeric_scaled(rhs.value)
        else:
            raise SemanticError(f"per-tuple atom {c.render()!r} cannot be enumerated")

        cmpc = CMP_CODE[c.op]
        if cmpc in (CMP_EQ, CMP_NE) and kindl != kindr:
            # values of different kinds never compare equal
            ops.append((OP_FALSE if cmpc == CMP_EQ else OP_TRUE, 0, 0, 0, 0, 0, 0))
            return
        ops.append((OP_CMP, srcl, terml, cmpc, srcr, termr, rhs_scaled))

    # --- prune rules ---------------------------------------------------

    def _extract_prunes(self, conjunct) -> None:
        """Derive monotone prune rules from one top-level conjunct.

        Rules must be sound: a rule may fire at a node only if every superset
        reachable from it violates this conjunct, so sum rules require a
        nonnegative column and disjunctions contribute nothing.
        """
        prunes = self.prog.prunes
        if isinstance(conjunct, ex.BoolLit) and not conjunct.value:
            prunes.append((PR_CNT_UB, -1, -ONE, 1))  # always fires
            return
        if not isinstance(conjunct, ex.Cmp):
            return
        c = conjunct
        if isinstance(c.lhs, ex.Literal) and isinstance(c.rhs, ex.Agg):
            c = ex.swap_cmp(c)
        if not (isinstance(c.lhs, ex.Agg) and isinstance(c.rhs, ex.Literal)):
            if isinstance(c.lhs, ex.Literal) and isinstance(c.rhs, ex.Literal):
                from .values import compare

                if not compare(c.op, c.lhs.value, c.rhs.value):
                    prunes.append((PR_CNT_UB, -1, -ONE, 1))
            return
        agg, lit = c.lhs, c.rhs
        litkind = kind_of(lit.value)
        if litkind == KIND_STR:
            if c.op == "=":
                prunes.append((PR_CNT_UB, -1, -ONE, 1))  # kind mismatch: never equal
            return
        bound = numeric_scaled(lit.value)
        src, term, kindl = self._agg_side(agg)
        if c.op in ("=", "!=") and kindl != litkind:
            if c.op == "=":
                prunes.append((PR_CNT_UB, -1, -ONE, 1))
            return

        op = c.op
        if src == SRC_COUNT:
            if op in ("<", "<="):
                prunes.append((PR_CNT_UB, -1, bound, 1 if op == "<" else 0))
            elif op in (">", ">="):
                prunes.append((PR_CNT_LB, -1, bound, 1 if op == ">" else 0))
            elif op == "=":
                prunes.append((PR_CNT_UB, -1, bound, 0))
                prunes.append((PR_CNT_LB, -1, bound, 0))
        elif src == SRC_SUM:
            if any(v < 0 for v in self.prog.term_values[term]):
                return  # not monotone with negative values
            if op in ("<", "<="):
                prunes.append((PR_SUM_UB, term, bound, 1 if op == "<" else 0))
            elif op in (">", ">="):
                prunes.append((PR_SUM_LB, term, bound, 1 if op == ">" else 0))
            elif op == "=":
                prunes.append((PR_SUM_UB, term, bound, 0))
                prunes.append((PR_SUM_LB, term, bound, 0))
        elif src == SRC_MIN:
            if op in (">", ">="):
                prunes.append((PR_MIN_LB, term, bound, 1 if op == ">" else 0))
            elif op == "=":
                prunes.append((PR_MIN_LB, term, bound, 0))
        elif src == SRC_MAX:
            if op in ("<", "<="):
                prunes.append((PR_MAX_UB, term, bound, 1 if op == "<" else 0))
            elif op == "=":
                prunes.append((PR_MAX_UB, term, bound, 0))
        # SRC_AVG: not monotone, no rule

    def _check_int64_safe(self) -> bool:
        for vals in self.prog.term_values:
            if sum(abs(v) for v in vals) >= INT64_SAFE_LIMIT:
                return False
        for op in self.prog.ops:
            if abs(op[6]) >= INT64_SAFE_LIMIT:
                return False
        for rule in self.prog.prunes:
            if abs(rule[2]) >= INT64_SAFE_LIMIT:
                return False
        return (self.prog.n + 1) * ONE < INT64_SAFE_LIMIT


def compile_condition(cond, schema, rows) -> CompiledProgram:
    """Compile an aggregate condition into kernel bytecode and prune rules."""
    return _Compiler(schema, rows).compile(cond)


def _suffix_sums(values: list[int]) -> list[int]:
    out = [0] * (len(values) + 1)
    for i in range(len(values) - 1, -1, -1):
        out[i] = out[i + 1] + values[i]
    return out


def _cardinality_atoms(card: tuple[int | None, int | None]) -> list:
    lo, hi = card
    sid = ex.Column("sid")
    atoms = []
    if lo is not None:
        atoms.append(ex.Cmp(ex.Agg("count", sid), ">=", ex.Literal(lo)))
    if hi is not None:
        atoms.append(ex.Cmp(ex.Agg("count", sid), "<=", ex.Literal(hi)))
    return atoms


def _run_on_kernel(prog: CompiledProgram, limits: Limits, kernel: str):
    if kernel == "auto":
        kernel = "compiled" if (_run_compiled is not None and prog.int64_safe) else "python"
    if kernel == "python":
        results, nodes = _run_py(prog, limits.max_generated, limits.max_results)
        return results, nodes, "python"
    if kernel != "compiled":
        raise ValueError(f"unknown kernel {kernel!r}")
    if _run_compiled is None:
        raise RuntimeError("compiled kernel requested but the extension is not built")
    if not prog.int64_safe:
        raise RuntimeError("compiled kernel requested but values exceed the int64-safe range")
    import array

    n, nt = prog.n, prog.n_terms
    values = array.array("q", [v for vals in prog.term_values for v in vals])
    suffix = array.array("q", [v for vals in prog.suffix for v in vals])
    term_step = array.array("i", prog.term_step)
    op_code = array.array("i", [o[0] for o in prog.ops])
    op_srcl = array.array("i", [o[1] for o in prog.ops])
    op_terml = array.array("i", [o[2] for o in prog.ops])
    op_cmp = array.array("i", [o[3] for o in prog.ops])
    op_srcr = array.array("i", [o[4] for o in prog.ops])
    op_termr = array.array("i", [o[5] for o in prog.ops])
    op_rhs = array.array("q", [o[6] for o in prog.ops])
    pr_kind = array.array("i", [p[0] for p in prog.prunes])
    pr_term = array.array("i", [p[1] for p in prog.prunes])
    pr_bound = array.array("q", [p[2] for p in prog.prunes])
    pr_strict = array.array("i", [p[3] for p in prog.prunes])
    results, nodes = _run_compiled(
        n, nt, values, suffix, term_step,
        op_code, op_srcl, op_terml, op_cmp, op_srcr, op_termr, op_rhs, len(prog.ops),
        pr_kind, pr_term, pr_bound, pr_strict, len(prog.prunes),
        limits.max_generated, limits.max_results,
    )
    return results, nodes, "compiled"


def enumerate_subsets_ex(
    source: "Relation | BaseExtension",
    cond,
    card: tuple[int | None, int | None] | None = None,
    limits: Limits | None = None,
    kernel: str = "auto",
) -> tuple[RelationOfSubsets, EnumerationStats]:
    """Enumerate the subsets satisfying cond without materializing the power set.

    Equivalent to constraint_filter(power_set(r), cond), including the error
    behavior for ill-typed conditions. Explicit cardinality bounds are folded
    into the condition as count atoms.
    """
    base = base_of(source) if isinstance(source, Relation) else source
    if limits is None:
        limits = Limits()
    if card is not None:
        cond = ex.conj([cond] + _cardinality_atoms(card))
    validate_aggregate_cond(cond)
    prog = compile_condition(cond, base.schema, base.rows)
    if prog.n == 0:
        return RelationOfSubsets(base, ()), EnumerationStats(1, "none", 0)
    positions, nodes, used = _run_on_kernel(prog, limits, kernel)
    ids = base.rowids()
    subsets = tuple(Subset(base, tuple(ids[p] for p in pos)) for pos in positions)
    family = RelationOfSubsets(base, subsets)
    return family, EnumerationStats(nodes, used, len(subsets))


def enumerate_subsets(
    source: "Relation | BaseExtension",
    cond,
    card: tuple[int | None, int | None] | None = None,
    limits: Limits | None = None,
    kernel: str = "auto",
) -> RelationOfSubsets:
    family, _ = enumerate_subsets_ex(source, cond, card, limits, kernel)
    return family
