"""Subsets: immutable sets of row identities drawn from one extension.

A subset remembers the extension it was formed over (its base), which is the
post-WHERE snapshot of a relation, or a synthesized product extension for
joined subsets. Complements are taken relative to that base, not the raw
table. Two subsets are equal when they come from the same source and contain
the same rowids; the snapshot itself does not participate in equality, so
families formed over different filters of one relation can be combined.
"""

from __future__ import annotations

from . import expr as ex
from .errors import SemanticError
from .relation import Attr, Relation, Row, Schema
from .values import aggregate, compare, sort_key


class BaseExtension:
    """A (possibly filtered) extension plus the identity of its source.

    modulus is the size of the source rowid domain; product rowids are encoded
    as left_rowid * right_modulus + right_rowid, which is injective because
    every rowid is smaller than its modulus.
    """

    __slots__ = ("source", "schema", "rows", "modulus", "_by_rowid")

    def __init__(self, source, schema: Schema, rows: tuple[Row, ...], modulus: int):
        self.source = source
        self.schema = schema
        self.rows = rows
        self.modulus = modulus
        self._by_rowid = {r.rowid: r for r in rows}
        if rows and max(self._by_rowid) >= modulus:
            raise SemanticError("base modulus smaller than a contained rowid")

    def rowids(self) -> list[int]:
        return [r.rowid for r in self.rows]

    def row(self, rowid: int) -> Row:
        return self._by_rowid[rowid]

    def has(self, rowid: int) -> bool:
        return rowid in self._by_rowid

    def __repr__(self) -> str:
        return f"BaseExtension({self.source!r}, {len(self.rows)} rows)"


def base_of(rel: Relation, modulus: int | None = None) -> BaseExtension:
    """Base over a relation's (possibly filtered) extension.

    Pass the original table size as modulus when the relation was filtered;
    the default covers the rowids actually present.
    """
    if modulus is None:
        modulus = max((r.rowid for r in rel.rows), default=0) + 1
    return BaseExtension(rel.name, rel.schema, rel.rows, modulus)


def same_source(a: BaseExtension, b: BaseExtension) -> bool:
    return a.source == b.source


def merge_bases(a: BaseExtension, b: BaseExtension) -> BaseExtension:
    """Union of two snapshots of the same source (for combined families)."""
    if not same_source(a, b):
        raise SemanticError(f"base mismatch: {a.source!r} vs {b.source!r}")
    if a.rows == b.rows:
        return a
    merged = dict(a._by_rowid)
    merged.update(b._by_rowid)
    rows = tuple(merged[k] for k in sorted(merged))
    return BaseExtension(a.source, a.schema, rows, max(a.modulus, b.modulus))


def _qualified_schema(base: BaseExtension) -> tuple[Attr, ...]:
    if isinstance(base.source, str):
        return tuple(
            Attr(a.name, a.kind, a.qualifier or base.source) for a in base.schema.attrs
        )
    return base.schema.attrs


def product_of(a: BaseExtension, b: BaseExtension) -> BaseExtension:
    """Synthesized product extension: concatenated tuples over encoded rowids."""
    schema = Schema(_qualified_schema(a) + _qualified_schema(b))
    rows = tuple(
        Row(ra.rowid * b.modulus + rb.rowid, ra.values + rb.values)
        for ra in a.rows
        for rb in b.rows
    )
    return BaseExtension(("x", a.source, b.source), schema, rows, a.modulus * b.modulus)


class Subset:
    """Sorted, duplicate-free rowids over one base extension."""

    __slots__ = ("base", "members")

    def __init__(self, base: BaseExtension, members):
        members = tuple(members)
        if any(members[i] >= members[i + 1] for i in range(len(members) - 1)):
            members = tuple(sorted(set(members)))
        for m in members:
            if not base.has(m):
                raise SemanticError(f"rowid {m} not in base extension {base.source!r}")
        self.base = base
        self.members = members

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subset)
            and other.base.source == self.base.source
            and other.members == self.members
        )

    def __hash__(self) -> int:
        return hash((self._source_key(), self.members))

    def _source_key(self):
        return self.base.source

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"Subset{self.members}"

    def rows(self) -> list[Row]:
        return [self.base.row(m) for m in self.members]


def _common_base(a: Subset, b: Subset) -> BaseExtension:
    if not same_source(a.base, b.base):
        raise SemanticError(
            f"base mismatch: {a.base.source!r} vs {b.base.source!r}"
        )
    return merge_bases(a.base, b.base)


def s_union(a: Subset, b: Subset) -> Subset:
    return Subset(_common_base(a, b), sorted(set(a.members) | set(b.members)))


def s_intersect(a: Subset, b: Subset) -> Subset:
    return Subset(_common_base(a, b), sorted(set(a.members) & set(b.members)))


def s_difference(a: Subset, b: Subset) -> Subset:
    return Subset(_common_base(a, b), sorted(set(a.members) - set(b.members)))


def s_complement(a: Subset) -> Subset:
    """Tuples of the base extension that are not members.

    The universe is the filtered extension the enclosing family was formed
    over, not the unfiltered table.
    """
    members = set(a.members)
    return Subset(a.base, [r for r in a.base.rowids() if r not in members])


def s_select(a: Subset, cond) -> Subset:
    """Per-tuple filter inside one subset; may yield an empty subset."""
    ex.validate_per_tuple(cond, a.base.schema)
    kept = [
        m for m in a.members if ex.eval_on_row(cond, a.base.schema, a.base.row(m).values)
    ]
    return Subset(a.base, kept)


def s_project(a: Subset, attrs: list[str]) -> list[tuple[int, tuple]]:
    """One (rowid, values) pair per member, restricted to the listed columns."""
    if not attrs:
        raise SemanticError("projection attribute list must be nonempty")
    idxs = [_resolve(a.base.schema, name) for name in attrs]
    out = []
    for m in a.members:
        vals = a.base.row(m).values
        out.append((m, tuple(vals[i] for i in idxs)))
    return out


def _resolve(schema: Schema, name: str) -> int:
    if "." in name:
        qual, bare = name.split(".", 1)
        return schema.index_of(bare, qual)
    return schema.index_of(name)


def agg_over_rows(fn: str, attr: str | None, schema: Schema, rows: list[Row]):
    """Aggregate one attribute over a row collection; count ignores the attribute."""
    if fn == "count":
        return len(rows)
    if attr is None:
        raise SemanticError(f"aggregate {fn} requires an attribute")
    if not rows:
        raise SemanticError(f"undefined aggregate: {fn}({attr}) over an empty subset")
    idx = _resolve(schema, attr)
    kind = schema.attr_at(idx).kind
    return aggregate(fn, kind, [r.values[idx] for r in rows])


def s_aggregate(a: Subset, fn: str, attr: str | None = None):
    """Exact aggregate over the member tuples; count is the cardinality."""
    return agg_over_rows(fn, attr, a.base.schema, a.rows())


def s_join(a: Subset, b: Subset, jc, product_base: BaseExtension | None = None) -> Subset:
    """Join members pairwise; the result lives on the product extension.

    Cross product is the jc = true case. Callers joining many subset pairs over
    the same bases should build the product base once and pass it in.
    """
    pb = product_base if product_base is not None else product_of(a.base, b.base)
    ex.validate_per_tuple(jc, pb.schema)
    members = []
    for i in a.members:
        left = a.base.row(i).values
        for j in b.members:
            pair = left + b.base.row(j).values
            if ex.eval_on_row(jc, pb.schema, pair):
                members.append(i * b.base.modulus + j)
    return Subset(pb, members)


def s_group_by(
    a: Subset,
    keys: list[str],
    aggs: list[tuple[str, str | None]],
    having=None,
) -> list[tuple[tuple, tuple]]:
    """Partition members by key values; one (key_values, agg_values) row per group.

    Groups failing the having condition are dropped; surviving groups are
    ordered by key values ascending.
    """
    schema = a.base.schema
    key_idxs = [_resolve(schema, k) for k in keys]
    groups: dict[tuple, list[Row]] = {}
    for row in a.rows():
        kv = tuple(row.values[i] for i in key_idxs)
        groups.setdefault(kv, []).append(row)

    out = []
    for kv in sorted(groups, key=lambda t: tuple(sort_key(v) for v in t)):
        rows = groups[kv]
        if having is not None and not eval_group_cond(having, schema, rows):
            continue
        out.append((kv, tuple(agg_over_rows(fn, attr, schema, rows) for fn, attr in aggs)))
    return out


def eval_group_cond(cond, schema: Schema, rows: list[Row]) -> bool:
    """Evaluate an aggregate condition against one group of rows."""
    if isinstance(cond, ex.BoolLit):
        return cond.value
    if isinstance(cond, ex.And):
        return all(eval_group_cond(c, schema, rows) for c in cond.items)
    if isinstance(cond, ex.Or):
        return any(eval_group_cond(c, schema, rows) for c in cond.items)
    if isinstance(cond, ex.Not):
        return not eval_group_cond(cond.item, schema, rows)
    if isinstance(cond, ex.Cmp):
        lhs = _agg_operand(cond.lhs, schema, rows)
        rhs = _agg_operand(cond.rhs, schema, rows)
        return compare(cond.op, lhs, rhs)
    raise TypeError(f"not an expression: {cond!r}")


def _agg_operand(op, schema: Schema, rows: list[Row]):
    if isinstance(op, ex.Literal):
        return op.value
    if isinstance(op, ex.Agg):
        attr = None if op.fn == "count" else op.arg.render()
        return agg_over_rows(op.fn, attr, schema, rows)
    raise SemanticError(f"operand {op!r} not allowed in an aggregate condition")
