"""Boolean constraint expressions over tuples and subsets.

Atoms are comparisons whose operands are column references, literals, or
aggregate terms (sum/count/min/max/avg). The same AST is used for WHERE
conditions, CONSTRAINED BY conditions, join conditions, and HAVING clauses;
which atom shapes are legal in each position is checked by the consumer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import KindError, SemanticError
from .values import Dec, compare, kind_of, render_value

AGG_FNS = ("sum", "count", "min", "max", "avg")

_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}
_SWAP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}


@dataclass(frozen=True)
class Column:
    name: str
    table: str | None = None

    def render(self) -> str:
        return f"{self.table}.{self.name}" if self.table else self.name


@dataclass(frozen=True)
class Literal:
    value: "int | Dec | str"

    def render(self) -> str:
        if isinstance(self.value, str):
            escaped = self.value.replace('"', '""')
            return f'"{escaped}"'
        return render_value(self.value)


@dataclass(frozen=True)
class Agg:
    fn: str
    arg: Column

    def render(self) -> str:
        return f"{self.fn}({self.arg.render()})"


@dataclass(frozen=True)
class Cmp:
    lhs: "Column | Literal | Agg"
    op: str
    rhs: "Column | Literal | Agg"

    def render(self) -> str:
        return f"{self.lhs.render()} {self.op} {self.rhs.render()}"


@dataclass(frozen=True)
class And:
    items: tuple

    def render(self) -> str:
        return " and ".join(_render_child(c, self) for c in self.items)


@dataclass(frozen=True)
class Or:
    items: tuple

    def render(self) -> str:
        return " or ".join(_render_child(c, self) for c in self.items)


@dataclass(frozen=True)
class Not:
    item: "Expr"

    def render(self) -> str:
        return f"not {_render_child(self.item, self)}"


@dataclass(frozen=True)
class BoolLit:
    value: bool

    def render(self) -> str:
        return "1 = 1" if self.value else "1 != 1"


Expr = "Cmp | And | Or | Not | BoolLit"

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def _render_child(child, parent) -> str:
    # Parenthesize whenever the child binds looser than the parent.
    needs = isinstance(child, Or) or (isinstance(parent, Not) and isinstance(child, And))
    text = child.render()
    return f"({text})" if needs else text


def conj(items: list) -> "Expr":
    items = [x for x in items if x != TRUE]
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def negate_cmp(c: Cmp) -> Cmp:
    return Cmp(c.lhs, _FLIP[c.op], c.rhs)


def swap_cmp(c: Cmp) -> Cmp:
    """Rewrite so mirrored operand orders compare identically."""
    return Cmp(c.rhs, _SWAP[c.op], c.lhs)


def nnf(e, negated: bool = False):
    """Push negations onto atoms; the result contains no Not nodes."""
    if isinstance(e, Not):
        return nnf(e.item, not negated)
    if isinstance(e, And):
        parts = tuple(nnf(x, negated) for x in e.items)
        return Or(parts) if negated else And(parts)
    if isinstance(e, Or):
        parts = tuple(nnf(x, negated) for x in e.items)
        return And(parts) if negated else Or(parts)
    if isinstance(e, Cmp):
        return negate_cmp(e) if negated else e
    if isinstance(e, BoolLit):
        return BoolLit(not e.value) if negated else e
    raise TypeError(f"not an expression: {e!r}")


def conjuncts(e) -> list:
    """Top-level conjuncts of an NNF expression."""
    if isinstance(e, And):
        out = []
        for x in e.items:
            out.extend(conjuncts(x))
        return out
    return [e]


def atoms(e) -> list[Cmp]:
    """Every comparison atom in the expression, in tree order."""
    if isinstance(e, Cmp):
        return [e]
    if isinstance(e, (And, Or)):
        out = []
        for x in e.items:
            out.extend(atoms(x))
        return out
    if isinstance(e, Not):
        return atoms(e.item)
    if isinstance(e, BoolLit):
        return []
    raise TypeError(f"not an expression: {e!r}")


def eval_on_row(e, schema, values: tuple) -> bool:
    """Evaluate a per-tuple condition against one row.

    Only column/literal operands are legal here; an aggregate term means the
    condition was routed to the wrong layer and is rejected.
    """
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, And):
        return all(eval_on_row(x, schema, values) for x in e.items)
    if isinstance(e, Or):
        return any(eval_on_row(x, schema, values) for x in e.items)
    if isinstance(e, Not):
        return not eval_on_row(e.item, schema, values)
    if isinstance(e, Cmp):
        lhs = _operand_on_row(e.lhs, schema, values)
        rhs = _operand_on_row(e.rhs, schema, values)
        try:
            return compare(e.op, lhs, rhs)
        except KindError as exc:
            raise KindError(f"{exc} in condition {e.render()!r}") from None
    raise TypeError(f"not an expression: {e!r}")


def _operand_on_row(op, schema, values):
    if isinstance(op, Literal):
        return op.value
    if isinstance(op, Column):
        idx = schema.index_of(op.name, op.table)
        return values[idx]
    if isinstance(op, Agg):
        raise SemanticError(f"aggregate {op.render()!r} is not a per-tuple term")
    raise TypeError(f"not an operand: {op!r}")


def validate_per_tuple(e, schema) -> None:
    """Check a per-tuple condition: columns resolve, orderings are numeric."""
    for atom in atoms(e):
        for op in (atom.lhs, atom.rhs):
            if isinstance(op, Agg):
                raise SemanticError(
                    f"aggregate {op.render()!r} not allowed in a per-tuple condition"
                )
            if isinstance(op, Column):
                schema.index_of(op.name, op.table)
        if atom.op not in ("=", "!="):
            for op in (atom.lhs, atom.rhs):
                k = _static_kind(op, schema)
                if k == "str":
                    raise KindError(
                        f"ordering comparison on string operand in {atom.render()!r}"
                    )


def _static_kind(op, schema) -> str:
    if isinstance(op, Literal):
        return kind_of(op.value)
    if isinstance(op, Column):
        return schema.attr_at(schema.index_of(op.name, op.table)).kind
    raise TypeError(f"not a row operand: {op!r}")
