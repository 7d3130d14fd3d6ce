"""Plan evaluation: bottom-up interpretation of the subset-algebra IR.

ConstraintFilter over PowerSet is fused into the pruned enumerator unless
optimization is disabled, in which case the power set is materialized (subject
to the naive cap) and filtered; both paths produce identical families. Every
family produced along the way is checked against the result limit: limit
violations are hard errors, never truncations.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from . import families
from . import plan as pl
from .enumerator import Limits, enumerate_subsets_ex
from .errors import LimitExceeded, SemanticError
from .relation import Relation, tuple_select
from .subsets import BaseExtension, base_of, s_aggregate

__all__ = ["Catalog", "Limits", "QueryResult", "aggregate_projection", "evaluate"]


class Catalog:
    """Registered relations, looked up case-insensitively by name."""

    def __init__(self, relations: "list[Relation] | None" = None):
        self._tables: dict[str, Relation] = {}
        for rel in relations or []:
            self.register(rel)

    def register(self, rel: Relation) -> None:
        self._tables[rel.name.lower()] = rel

    def get(self, name: str) -> Relation:
        rel = self._tables.get(name.lower())
        if rel is None:
            raise SemanticError(f"unknown table {name!r}")
        return rel

    def names(self) -> list[str]:
        return sorted(r.name for r in self._tables.values())

    def __contains__(self, name: str) -> bool:
        return name.lower() in self._tables


@dataclass
class QueryResult:
    """Rendered-agnostic query output.

    rows are flattened in final output order; for subset-shaped results
    subset_groups additionally carries per-sid member rows (without the sid
    column) for structured rendering.
    """

    kind: str  # members | aggregates | groups
    columns: list[str]
    rows: list[tuple]
    subset_groups: "list[tuple[int, list[tuple]]] | None" = None


def _source_name(node) -> str:
    while not isinstance(node, str):
        node = node.source
    return node


def _eval_relation(node, catalog: Catalog) -> Relation:
    if isinstance(node, str):
        return catalog.get(node)
    if isinstance(node, pl.TupleSelect):
        return tuple_select(_eval_relation(node.source, catalog), node.cond)
    raise SemanticError(f"not a relation-level plan node: {node!r}")


def _base_for(node, catalog: Catalog) -> BaseExtension:
    # modulus comes from the unfiltered table so product encodings agree
    # across families formed over different filters of one relation
    original = catalog.get(_source_name(node))
    filtered = _eval_relation(node, catalog)
    return base_of(filtered, modulus=max(len(original.rows), 1))


def _guard(w: families.RelationOfSubsets, limits: Limits) -> families.RelationOfSubsets:
    if len(w) > limits.max_results:
        raise LimitExceeded("max_results", limits.max_results)
    return w


def _eval_family(node, catalog: Catalog, limits: Limits, optimize: bool) -> families.RelationOfSubsets:
    if isinstance(node, pl.PowerSet):
        base = _base_for(node.source, catalog)
        return _guard(families.power_set(base, cap=limits.naive_cap), limits)
    if isinstance(node, pl.Lift):
        return families.lift(_base_for(node.source, catalog))
    if isinstance(node, pl.ConstraintFilter):
        if optimize and isinstance(node.child, pl.PowerSet):
            base = _base_for(node.child.source, catalog)
            family, _ = enumerate_subsets_ex(base, node.cond, limits=limits)
            return family
        w = _eval_family(node.child, catalog, limits, optimize)
        return _guard(families.constraint_filter(w, node.cond), limits)
    if isinstance(node, pl.SetCombine):
        left = _eval_family(node.left, catalog, limits, optimize)
        right = _eval_family(node.right, catalog, limits, optimize)
        return _guard(families.rs_set_combine(left, right, node.mode), limits)
    if isinstance(node, pl.CrossCombine):
        left = _eval_family(node.left, catalog, limits, optimize)
        right = _eval_family(node.right, catalog, limits, optimize)
        return _guard(families.cross_combine(left, right, node.mode), limits)
    if isinstance(node, pl.CrossProduct):
        left = _eval_family(node.left, catalog, limits, optimize)
        right = _eval_family(node.right, catalog, limits, optimize)
        return _guard(families.cross_product(left, right), limits)
    if isinstance(node, pl.CrossJoin):
        left = _eval_family(node.left, catalog, limits, optimize)
        right = _eval_family(node.right, catalog, limits, optimize)
        return _guard(families.cross_join(left, right, node.jc), limits)
    if isinstance(node, pl.MaxMinFilter):
        w = _eval_family(node.child, catalog, limits, optimize)
        return families.maxmin_filter(w, node.mode, node.criterion)
    if isinstance(node, pl.UnaryCombine):
        w = _eval_family(node.child, catalog, limits, optimize)
        combined = families.unary_combine(w, node.mode)
        return families.family(w.base, [combined])
    raise SemanticError(f"not a family-level plan node: {node!r}")


def _display_name(attr) -> str:
    return f"{attr.qualifier}.{attr.name}" if attr.qualifier else attr.name


def _agg_spec(agg: ex.Agg) -> tuple[str, str | None]:
    return agg.fn, (None if agg.fn == "count" else agg.arg.render())


def aggregate_projection(w: families.RelationOfSubsets, items) -> list[tuple]:
    """One row per subset; items are sid markers or aggregate terms only."""
    for item in items:
        if item.kind == "column":
            raise SemanticError(
                "cannot mix bare attributes with aggregates in a subset projection"
            )
    rows = []
    for sid, s in w.with_sids():
        row = []
        for item in items:
            if item.kind == "sid":
                row.append(sid)
            else:
                fn, attr = _agg_spec(item.agg)
                row.append(s_aggregate(s, fn, attr))
        rows.append(tuple(row))
    return rows


def _members_result(w: families.RelationOfSubsets, items, sid_label: str) -> QueryResult:
    """Per-member rows for a subset family, in sid order then rowid order."""
    if items is None:
        columns = [sid_label] + [_display_name(a) for a in w.base.schema.attrs]
        groups = [(sid, [r.values for r in s.rows()]) for sid, s in w.with_sids()]
        rows = [(sid, *vals) for sid, member_rows in groups for vals in member_rows]
        return QueryResult("members", columns, rows, groups)

    columns = [it.label() for it in items]
    attr_items = [it for it in items if it.kind == "column"]
    projected = families.rs_project(w, [it.name for it in attr_items])
    groups = []
    rows = []
    for sid, member_rows in projected:
        data_rows = []
        for _rowid, vals in member_rows:
            row = []
            vi = 0
            for it in items:
                if it.kind == "sid":
                    row.append(sid)
                else:
                    row.append(vals[vi])
                    vi += 1
            rows.append(tuple(row))
            data_rows.append(vals)
        groups.append((sid, data_rows))
    return QueryResult("members", columns, rows, groups)


def _project_result(w: families.RelationOfSubsets, node: pl.Project) -> QueryResult:
    items = node.items
    has_agg = any(it.kind == "agg" for it in items)
    has_col = any(it.kind == "column" for it in items)
    if has_agg and has_col:
        raise SemanticError(
            "cannot mix bare attributes with aggregates in a subset projection"
        )
    if has_col:
        return _members_result(w, items, sid_label="sid")
    # aggregate form, including a bare sid list: one row per subset
    rows = aggregate_projection(w, items)
    return QueryResult("aggregates", [it.label() for it in items], rows)


def _group_result(w: families.RelationOfSubsets, node: pl.GroupBy) -> QueryResult:
    aggs = [_agg_spec(a) for a in node.aggs]
    per_sid = families.rs_group_by(w, list(node.keys), aggs, node.having)
    items = node.items or _default_group_items(node)
    key_pos = {k.lower(): i for i, k in enumerate(node.keys)}
    agg_pos = {a: i for i, a in enumerate(node.aggs)}
    rows = []
    for sid, group_rows in per_sid:
        for key_vals, agg_vals in group_rows:
            row = []
            for it in items:
                if it.kind == "sid":
                    row.append(sid)
                elif it.kind == "column":
                    row.append(key_vals[key_pos[it.name.lower()]])
                else:
                    row.append(agg_vals[agg_pos[it.agg]])
            rows.append(tuple(row))
    return QueryResult("groups", [it.label() for it in items], rows)


def _default_group_items(node: pl.GroupBy):
    items = [pl.ProjItem("sid", name="sid")]
    items += [pl.ProjItem("column", name=k) for k in node.keys]
    items += [pl.ProjItem("agg", agg=a) for a in node.aggs]
    return tuple(items)


def evaluate(
    plan,
    catalog: Catalog,
    limits: Limits | None = None,
    optimize: bool = True,
    sid_label: str = "sid",
) -> QueryResult:
    """Evaluate a plan tree against the catalog into a QueryResult."""
    if limits is None:
        limits = Limits()
    if isinstance(plan, pl.Project):
        w = _eval_family(plan.child, catalog, limits, optimize)
        return _project_result(w, plan)
    if isinstance(plan, pl.GroupBy):
        w = _eval_family(plan.child, catalog, limits, optimize)
        return _group_result(w, plan)
    w = _eval_family(plan, catalog, limits, optimize)
    return _members_result(w, None, sid_label)


def evaluate_family(plan, catalog: Catalog, limits: Limits | None = None, optimize: bool = True):
    """Evaluate a family-producing plan and return the RelationOfSubsets."""
    if limits is None:
        limits = Limits()
    return _eval_family(plan, catalog, limits, optimize)
