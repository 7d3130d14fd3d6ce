"""Naive reference evaluator for differential testing.

Evaluates each plan operator by its literal set-comprehension definition:
materialized power sets, unfused filters, no pruning, quadratic maximality
checks. Deliberately shares no evaluation code with the main engine beyond
the value arithmetic layer and the plan/result containers, so that agreement
between the two is meaningful evidence of correctness.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import expr as ex
from . import plan as pl
from .engine import Catalog, QueryResult
from .errors import LimitExceeded, SemanticError
from .relation import Attr, Row, Schema
from .values import aggregate, compare

ORACLE_CAP = 16


@dataclass
class OBase:
    source: object
    schema: Schema
    rows: list[Row]  # rowid ascending
    modulus: int

    def by_rowid(self) -> dict[int, Row]:
        return {r.rowid: r for r in self.rows}


@dataclass
class OFam:
    base: OBase
    members: list[tuple[int, ...]]  # canonical: sorted unique nonempty tuples


def _canon(members) -> list[tuple[int, ...]]:
    return sorted({tuple(sorted(set(m))) for m in members if m})


# --- independent condition evaluation --------------------------------------


def _row_cond(cond, schema: Schema, values: tuple) -> bool:
    if isinstance(cond, ex.BoolLit):
        return cond.value
    if isinstance(cond, ex.And):
        return all(_row_cond(c, schema, values) for c in cond.items)
    if isinstance(cond, ex.Or):
        return any(_row_cond(c, schema, values) for c in cond.items)
    if isinstance(cond, ex.Not):
        return not _row_cond(cond.item, schema, values)
    lhs = _row_operand(cond.lhs, schema, values)
    rhs = _row_operand(cond.rhs, schema, values)
    return compare(cond.op, lhs, rhs)


def _row_operand(op, schema: Schema, values: tuple):
    if isinstance(op, ex.Literal):
        return op.value
    if isinstance(op, ex.Column):
        return values[schema.index_of(op.name, op.table)]
    raise SemanticError(f"aggregate {op.render()!r} in a per-tuple position")


def _agg_value(agg: ex.Agg, schema: Schema, rows: list[Row]):
    if agg.fn == "count":
        return len(rows)
    if not rows:
        raise SemanticError(f"undefined aggregate {agg.render()} over an empty subset")
    idx = schema.index_of(agg.arg.name, agg.arg.table)
    kind = schema.attr_at(idx).kind
    return aggregate(agg.fn, kind, [r.values[idx] for r in rows])


def _agg_cond(cond, schema: Schema, rows: list[Row]) -> bool:
    if isinstance(cond, ex.BoolLit):
        return cond.value
    if isinstance(cond, ex.And):
        return all(_agg_cond(c, schema, rows) for c in cond.items)
    if isinstance(cond, ex.Or):
        return any(_agg_cond(c, schema, rows) for c in cond.items)
    if isinstance(cond, ex.Not):
        return not _agg_cond(cond.item, schema, rows)
    lhs = _agg_operand(cond.lhs, schema, rows)
    rhs = _agg_operand(cond.rhs, schema, rows)
    return compare(cond.op, lhs, rhs)


def _agg_operand(op, schema: Schema, rows: list[Row]):
    if isinstance(op, ex.Literal):
        return op.value
    if isinstance(op, ex.Agg):
        return _agg_value(op, schema, rows)
    raise SemanticError(f"per-tuple atom operand {op.render()!r} in an aggregate condition")


# --- relation / family evaluation -------------------------------------------


def _rel_rows(node, catalog: Catalog) -> tuple[str, Schema, list[Row]]:
    if isinstance(node, str):
        rel = catalog.get(node)
        return rel.name, rel.schema, list(rel.rows)
    if isinstance(node, pl.TupleSelect):
        name, schema, rows = _rel_rows(node.source, catalog)
        return name, schema, [r for r in rows if _row_cond(node.cond, schema, r.values)]
    raise SemanticError(f"not a relation-level plan node: {node!r}")


def _obase(node, catalog: Catalog) -> OBase:
    name, schema, rows = _rel_rows(node, catalog)
    modulus = max(len(catalog.get(name).rows), 1)
    return OBase(name, schema, rows, modulus)


def _merge(a: OBase, b: OBase) -> OBase:
    if a.source != b.source:
        raise SemanticError(f"base mismatch: {a.source!r} vs {b.source!r}")
    merged = a.by_rowid()
    merged.update(b.by_rowid())
    return OBase(a.source, a.schema, [merged[k] for k in sorted(merged)], max(a.modulus, b.modulus))


def _qualify(base: OBase) -> tuple[Attr, ...]:
    if isinstance(base.source, str):
        return tuple(Attr(a.name, a.kind, a.qualifier or base.source) for a in base.schema.attrs)
    return base.schema.attrs


def _product_base(a: OBase, b: OBase) -> OBase:
    schema = Schema(_qualify(a) + _qualify(b))
    rows = [
        Row(ra.rowid * b.modulus + rb.rowid, ra.values + rb.values)
        for ra in a.rows
        for rb in b.rows
    ]
    return OBase(("x", a.source, b.source), schema, rows, a.modulus * b.modulus)


def oracle_family(node, catalog: Catalog, cap: int = ORACLE_CAP) -> OFam:
    if isinstance(node, pl.PowerSet):
        base = _obase(node.source, catalog)
        if len(base.rows) > cap:
            raise LimitExceeded("oracle_powerset_cap", cap)
        ids = [r.rowid for r in base.rows]
        members = [c for k in range(1, len(ids) + 1) for c in combinations(ids, k)]
        return OFam(base, _canon(members))
    if isinstance(node, pl.Lift):
        base = _obase(node.source, catalog)
        if not base.rows:
            raise SemanticError("cannot lift an empty relation")
        return OFam(base, [tuple(r.rowid for r in base.rows)])
    if isinstance(node, pl.ConstraintFilter):
        fam = oracle_family(node.child, catalog, cap)
        rows_of = fam.base.by_rowid()
        kept = [
            m for m in fam.members if _agg_cond(node.cond, fam.base.schema, [rows_of[i] for i in m])
        ]
        return OFam(fam.base, kept)
    if isinstance(node, pl.SetCombine):
        left = oracle_family(node.left, catalog, cap)
        right = oracle_family(node.right, catalog, cap)
        base = _merge(left.base, right.base)
        if node.mode == "union":
            return OFam(base, _canon(left.members + right.members))
        both = set(left.members) & set(right.members)
        return OFam(base, _canon(both))
    if isinstance(node, pl.CrossCombine):
        left = oracle_family(node.left, catalog, cap)
        right = oracle_family(node.right, catalog, cap)
        base = _merge(left.base, right.base)
        out = []
        for a in left.members:
            for b in right.members:
                m = set(a) | set(b) if node.mode == "union" else set(a) & set(b)
                if m:
                    out.append(tuple(sorted(m)))
        return OFam(base, _canon(out))
    if isinstance(node, pl.CrossProduct) or isinstance(node, pl.CrossJoin):
        left = oracle_family(node.left, catalog, cap)
        right = oracle_family(node.right, catalog, cap)
        pb = _product_base(left.base, right.base)
        jc = node.jc if isinstance(node, pl.CrossJoin) else ex.TRUE
        lrows = left.base.by_rowid()
        rrows = right.base.by_rowid()
        out = []
        for a in left.members:
            for b in right.members:
                m = []
                for i in a:
                    for j in b:
                        pair = lrows[i].values + rrows[j].values
                        if _row_cond(jc, pb.schema, pair):
                            m.append(i * right.base.modulus + j)
                if m:
                    out.append(tuple(sorted(m)))
        return OFam(pb, _canon(out))
    if isinstance(node, pl.MaxMinFilter):
        fam = oracle_family(node.child, catalog, cap)
        return OFam(fam.base, _o_maxmin(fam.members, node.mode, node.criterion))
    if isinstance(node, pl.UnaryCombine):
        fam = oracle_family(node.child, catalog, cap)
        if node.mode == "intersection" and not fam.members:
            raise SemanticError("unary intersection of an empty relation of subsets")
        acc: set | None = None
        for m in fam.members:
            acc = set(m) if acc is None else (acc | set(m) if node.mode == "union" else acc & set(m))
        return OFam(fam.base, _canon([tuple(sorted(acc))]) if acc else [])
    raise SemanticError(f"not a family-level plan node: {node!r}")


def _o_maxmin(members, mode: str, criterion: str):
    if not members:
        return []
    if criterion == "cardinality":
        sizes = [len(m) for m in members]
        target = max(sizes) if mode == "maximal" else min(sizes)
        return [m for m in members if len(m) == target]
    kept = []
    for m in members:
        ms = set(m)
        if mode == "maximal":
            dominated = any(ms < set(o) for o in members)
        else:
            dominated = any(set(o) < ms for o in members)
        if not dominated:
            kept.append(m)
    return kept


# --- result assembly ---------------------------------------------------------


def _display(attr: Attr) -> str:
    return f"{attr.qualifier}.{attr.name}" if attr.qualifier else attr.name


def oracle_eval(plan, catalog: Catalog, cap: int = ORACLE_CAP, sid_label: str = "sid") -> QueryResult:
    """Evaluate a full plan the slow way; output canonicalized like the engine."""
    if isinstance(plan, pl.Project):
        fam = oracle_family(plan.child, catalog, cap)
        return _project(fam, plan.items)
    if isinstance(plan, pl.GroupBy):
        fam = oracle_family(plan.child, catalog, cap)
        return _groups(fam, plan)
    fam = oracle_family(plan, catalog, cap)
    columns = [sid_label] + [_display(a) for a in fam.base.schema.attrs]
    rows_of = fam.base.by_rowid()
    groups = [
        (sid, [rows_of[i].values for i in m]) for sid, m in enumerate(fam.members, start=1)
    ]
    rows = [(sid, *vals) for sid, member_rows in groups for vals in member_rows]
    return QueryResult("members", columns, rows, groups)


def _project(fam: OFam, items) -> QueryResult:
    has_agg = any(it.kind == "agg" for it in items)
    has_col = any(it.kind == "column" for it in items)
    if has_agg and has_col:
        raise SemanticError("cannot mix bare attributes with aggregates in a subset projection")
    rows_of = fam.base.by_rowid()
    columns = [it.label() for it in items]
    if not has_col:
        rows = []
        for sid, m in enumerate(fam.members, start=1):
            member_rows = [rows_of[i] for i in m]
            row = []
            for it in items:
                if it.kind == "sid":
                    row.append(sid)
                else:
                    row.append(_agg_value(it.agg, fam.base.schema, member_rows))
            rows.append(tuple(row))
        return QueryResult("aggregates", columns, rows)
    idx_of = {}
    for it in items:
        if it.kind == "column":
            qual, _, bare = it.name.rpartition(".")
            idx_of[it.name] = fam.base.schema.index_of(bare, qual or None)
    rows = []
    groups = []
    for sid, m in enumerate(fam.members, start=1):
        data_rows = []
        for i in m:
            vals = rows_of[i].values
            row = [sid if it.kind == "sid" else vals[idx_of[it.name]] for it in items]
            rows.append(tuple(row))
            data_rows.append(tuple(vals[idx_of[it.name]] for it in items if it.kind == "column"))
        groups.append((sid, data_rows))
    return QueryResult("members", columns, rows, groups)


def _groups(fam: OFam, node: pl.GroupBy) -> QueryResult:
    from .values import sort_key

    rows_of = fam.base.by_rowid()
    schema = fam.base.schema
    key_idx = []
    for k in node.keys:
        qual, _, bare = k.rpartition(".")
        key_idx.append(schema.index_of(bare, qual or None))
    items = node.items or (
        (pl.ProjItem("sid", name="sid"),)
        + tuple(pl.ProjItem("column", name=k) for k in node.keys)
        + tuple(pl.ProjItem("agg", agg=a) for a in node.aggs)
    )
    key_pos = {k.lower(): i for i, k in enumerate(node.keys)}
    agg_pos = {a: i for i, a in enumerate(node.aggs)}
    out = []
    for sid, m in enumerate(fam.members, start=1):
        partitions: dict[tuple, list[Row]] = {}
        for i in m:
            row = rows_of[i]
            kv = tuple(row.values[j] for j in key_idx)
            partitions.setdefault(kv, []).append(row)
        for kv in sorted(partitions, key=lambda t: tuple(sort_key(v) for v in t)):
            grp = partitions[kv]
            if node.having is not None and not _agg_cond(node.having, schema, grp):
                continue
            agg_vals = [_agg_value(a, schema, grp) for a in node.aggs]
            row = []
            for it in items:
                if it.kind == "sid":
                    row.append(sid)
                elif it.kind == "column":
                    row.append(kv[key_pos[it.name.lower()]])
                else:
                    row.append(agg_vals[agg_pos[it.agg]])
            out.append(tuple(row))
    return QueryResult("groups", [it.label() for it in items], out)
