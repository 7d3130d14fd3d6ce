"""Constraint classification: route every atom of a condition to its bucket.

Top-level conjuncts of the (negation-normalized) condition land in exactly one
bucket: per-tuple conditions go to the owning source's pre-formation filter,
aggregate conditions to the owning source's subset filter, column equalities
across two sources become join atoms, and count-of-sid range atoms additionally
surface as cardinality bounds. A disjunction whose atoms span buckets or
sources cannot be routed and is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .errors import KindError, SemanticError
from .relation import Schema
from .values import KIND_STR, kind_of


@dataclass(frozen=True)
class JoinAtom:
    left: ex.Column  # qualified with its owning table
    right: ex.Column

    def to_cmp(self) -> ex.Cmp:
        return ex.Cmp(self.left, "=", self.right)


@dataclass
class ConstraintClassification:
    per_tuple: dict[str, object] = field(default_factory=dict)  # source -> condition
    per_subset: dict[str, object] = field(default_factory=dict)  # source -> condition
    join_atoms: list[JoinAtom] = field(default_factory=list)
    cardinality: dict[str, tuple[int | None, int | None]] = field(default_factory=dict)


class SourceMap:
    """Attribute and sid-name ownership across the query's sources."""

    def __init__(self, schemas: dict[str, Schema], sid_sources: dict[str, list[str]] | None = None):
        self.schemas = {name.lower(): (name, schema) for name, schema in schemas.items()}
        self.sid_sources: dict[str, list[str]] = {}
        for sid, srcs in (sid_sources or {}).items():
            owners = srcs if isinstance(srcs, list) else [srcs]
            self.sid_sources.setdefault(sid.lower(), []).extend(owners)

    def source_names(self) -> list[str]:
        return [name for name, _ in self.schemas.values()]

    def schema_of(self, source: str) -> Schema:
        return self.schemas[source.lower()][1]

    def canonical(self, source: str) -> str:
        if source.lower() not in self.schemas:
            raise SemanticError(f"unknown table {source!r}")
        return self.schemas[source.lower()][0]

    def is_sid(self, name: str) -> bool:
        return name.lower() in self.sid_sources

    def sid_source(self, name: str) -> str:
        owners = self.sid_sources[name.lower()]
        if len(owners) > 1:
            raise SemanticError(
                f"subset id {name!r} is declared for several tables; use distinct sid names"
            )
        return owners[0]

    def owner_of(self, col: ex.Column) -> str:
        """Unique source owning a column; qualified references pin the source."""
        if col.table is not None:
            src = self.canonical(col.table)
            self.schema_of(src).index_of(col.name)
            return src
        owners = []
        for name, schema in self.schemas.values():
            try:
                schema.index_of(col.name)
            except SemanticError:
                continue
            owners.append(name)
        if not owners:
            raise SemanticError(f"unknown attribute {col.name!r}")
        if len(owners) > 1:
            raise SemanticError(
                f"attribute {col.name!r} is ambiguous across {owners}; qualify it"
            )
        return owners[0]


def classify_constraints(cond, sources: SourceMap) -> ConstraintClassification:
    """Split a CONSTRAINED BY condition into routable buckets."""
    out = ConstraintClassification()
    per_tuple: dict[str, list] = {}
    per_subset: dict[str, list] = {}
    for conjunct in ex.conjuncts(ex.nnf(cond)):
        if isinstance(conjunct, ex.BoolLit):
            if conjunct.value:
                continue
            for src in sources.source_names():
                per_subset.setdefault(src, []).append(ex.FALSE)
            continue
        join = _as_join_atom(conjunct, sources)
        if join is not None:
            out.join_atoms.append(join)
            continue
        bucket, src = _bucket_of(conjunct, sources)
        if bucket == "tuple":
            per_tuple.setdefault(src, []).append(conjunct)
        else:
            per_subset.setdefault(src, []).append(conjunct)
            if isinstance(conjunct, ex.Cmp):
                _fold_cardinality(conjunct, src, sources, out)
    out.per_tuple = {s: ex.conj(cs) for s, cs in per_tuple.items()}
    out.per_subset = {s: ex.conj(cs) for s, cs in per_subset.items()}
    return out


def classify_where(cond, sources: SourceMap) -> dict[str, object]:
    """WHERE accepts per-tuple conditions only; returns per-source filters."""
    per_tuple: dict[str, list] = {}
    for conjunct in ex.conjuncts(ex.nnf(cond)):
        if isinstance(conjunct, ex.BoolLit):
            if conjunct.value:
                continue
            for src in sources.source_names():
                per_tuple.setdefault(src, []).append(ex.FALSE)
            continue
        bucket, src = _bucket_of(conjunct, sources)
        if bucket != "tuple":
            raise SemanticError(
                f"aggregate condition {conjunct.render()!r} not allowed in WHERE; "
                "use CONSTRAINED BY"
            )
        per_tuple.setdefault(src, []).append(conjunct)
    return {s: ex.conj(cs) for s, cs in per_tuple.items()}


def _as_join_atom(conjunct, sources: SourceMap) -> JoinAtom | None:
    if not isinstance(conjunct, ex.Cmp):
        return None
    if not (isinstance(conjunct.lhs, ex.Column) and isinstance(conjunct.rhs, ex.Column)):
        return None
    lsrc = sources.owner_of(conjunct.lhs)
    rsrc = sources.owner_of(conjunct.rhs)
    if lsrc == rsrc:
        return None
    if conjunct.op != "=":
        raise SemanticError(
            f"cross-source comparison {conjunct.render()!r} must be an equality"
        )
    return JoinAtom(
        ex.Column(conjunct.lhs.name, lsrc), ex.Column(conjunct.rhs.name, rsrc)
    )


def _bucket_of(conjunct, sources: SourceMap) -> tuple[str, str]:
    """Classify one conjunct; disjunctions must stay within one bucket+source."""
    buckets = set()
    owners = set()
    found = False
    for atom in ex.atoms(conjunct):
        found = True
        shape, src = _atom_shape(atom, sources)
        buckets.add(shape)
        owners.add(src)
    if not found:
        raise SemanticError(f"cannot classify condition {conjunct.render()!r}")
    if len(buckets) > 1 or len(owners) > 1:
        raise SemanticError(
            f"disjunction {conjunct.render()!r} mixes constraint buckets or sources"
        )
    return buckets.pop(), owners.pop()


def _atom_shape(atom: ex.Cmp, sources: SourceMap) -> tuple[str, str]:
    lhs, op, rhs = atom.lhs, atom.op, atom.rhs
    if isinstance(rhs, ex.Agg) and not isinstance(lhs, ex.Agg):
        atom = ex.swap_cmp(atom)
        lhs, op, rhs = atom.lhs, atom.op, atom.rhs
    if isinstance(lhs, ex.Agg):
        if not isinstance(rhs, ex.Literal):
            raise SemanticError(
                f"aggregate atom {atom.render()!r} must compare against a literal"
            )
        _check_literal_kind(atom, rhs)
        return "subset", _agg_owner(lhs, sources)
    if isinstance(lhs, ex.Column) and isinstance(rhs, ex.Column):
        lsrc = sources.owner_of(lhs)
        rsrc = sources.owner_of(rhs)
        if lsrc != rsrc:
            raise SemanticError(
                f"join atom {atom.render()!r} cannot appear inside a disjunction"
            )
        return "tuple", lsrc
    cols = [c for c in (lhs, rhs) if isinstance(c, ex.Column)]
    if not cols:
        raise SemanticError(f"condition {atom.render()!r} references no attribute")
    owners = {sources.owner_of(c) for c in cols}
    if len(owners) > 1:
        raise SemanticError(f"atom {atom.render()!r} spans multiple sources")
    return "tuple", owners.pop()


def _check_literal_kind(atom: ex.Cmp, lit: ex.Literal) -> None:
    if atom.op not in ("=", "!=") and kind_of(lit.value) == KIND_STR:
        raise KindError(f"ordering comparison with a string literal in {atom.render()!r}")


def _agg_owner(agg: ex.Agg, sources: SourceMap) -> str:
    arg = agg.arg
    if agg.fn == "count" and arg.table is None and sources.is_sid(arg.name):
        return sources.sid_source(arg.name)
    if agg.fn != "count" and arg.table is None and sources.is_sid(arg.name):
        raise SemanticError(f"aggregate {agg.render()!r} cannot take a subset id")
    src = sources.owner_of(arg)
    if agg.fn != "count":
        schema = sources.schema_of(src)
        kind = schema.attr_at(schema.index_of(arg.name)).kind
        if kind == KIND_STR:
            raise KindError(f"aggregate {agg.render()!r} over a string attribute")
    return src


def _fold_cardinality(atom: ex.Cmp, src: str, sources: SourceMap, out: ConstraintClassification) -> None:
    """Record count(sid) bounds; non-integer thresholds stay condition-only."""
    cmp = atom
    if isinstance(cmp.rhs, ex.Agg):
        cmp = ex.swap_cmp(cmp)
    if not (isinstance(cmp.lhs, ex.Agg) and cmp.lhs.fn == "count"):
        return
    if not isinstance(cmp.rhs, ex.Literal) or not isinstance(cmp.rhs.value, int):
        return
    k = cmp.rhs.value
    lo, hi = out.cardinality.get(src, (None, None))
    if cmp.op == ">=":
        lo = k if lo is None else max(lo, k)
    elif cmp.op == ">":
        lo = k + 1 if lo is None else max(lo, k + 1)
    elif cmp.op == "<=":
        hi = k if hi is None else min(hi, k)
    elif cmp.op == "<":
        hi = k - 1 if hi is None else min(hi, k - 1)
    elif cmp.op == "=":
        lo = k if lo is None else max(lo, k)
        hi = k if hi is None else min(hi, k)
    else:
        return
    out.cardinality[src] = (lo, hi)
