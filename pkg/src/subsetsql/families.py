"""Relations of subsets and their set/relational operators.

Every family is kept canonical by construction: no empty member, no duplicate
members, subsets ordered lexicographically by their rowid lists. Subset ids
(sids) are 1-based positions in that order. Empty subsets are excluded from
every operator's output, matching the exclusion rule for cross combines and
per-tuple subset selection.
"""

from __future__ import annotations

from functools import reduce

from . import expr as ex
from .errors import LimitExceeded, SemanticError
from .relation import Relation
from .subsets import (
    BaseExtension,
    Subset,
    base_of,
    eval_group_cond,
    merge_bases,
    product_of,
    s_complement,
    s_group_by,
    s_intersect,
    s_join,
    s_project,
    s_select,
    s_union,
    same_source,
)

DEFAULT_NAIVE_CAP = 20


class RelationOfSubsets:
    """Canonically ordered set of distinct nonempty subsets over one base."""

    __slots__ = ("base", "subsets")

    def __init__(self, base: BaseExtension, subsets: tuple[Subset, ...]):
        self.base = base
        self.subsets = subsets

    def __len__(self) -> int:
        return len(self.subsets)

    def __iter__(self):
        return iter(self.subsets)

    def __repr__(self) -> str:
        return f"RelationOfSubsets({[s.members for s in self.subsets]})"

    def member_lists(self) -> list[tuple[int, ...]]:
        return [s.members for s in self.subsets]

    def with_sids(self):
        """(sid, subset) pairs; sids are 1-based canonical positions."""
        return list(enumerate(self.subsets, start=1))


def family(base: BaseExtension, subsets) -> RelationOfSubsets:
    """Canonicalize: merge bases, drop empties, dedup, sort lexicographically."""
    for s in subsets:
        if not same_source(s.base, base):
            raise SemanticError(
                f"subset over {s.base.source!r} cannot join a family over {base.source!r}"
            )
        base = merge_bases(base, s.base)
    uniq = {s.members for s in subsets if s.members}
    ordered = tuple(Subset(base, m) for m in sorted(uniq))
    return RelationOfSubsets(base, ordered)


def validate_family(w: RelationOfSubsets) -> None:
    """Independent structural check used by the test suite."""
    seen = set()
    prev = None
    for s in w.subsets:
        if not s.members:
            raise ValueError("family contains an empty subset")
        if s.members in seen:
            raise ValueError(f"duplicate subset {s.members}")
        seen.add(s.members)
        if prev is not None and not prev < s.members:
            raise ValueError("family not in canonical (lexicographic) order")
        prev = s.members
        if list(s.members) != sorted(set(s.members)):
            raise ValueError(f"subset members not sorted/unique: {s.members}")
        if not same_source(s.base, w.base):
            raise ValueError("subset base differs from family base")
        for m in s.members:
            if not w.base.has(m):
                raise ValueError(f"member rowid {m} missing from family base")


def rs_equal(w1: RelationOfSubsets, w2: RelationOfSubsets) -> bool:
    """Same source and the same canonical subset lists."""
    return same_source(w1.base, w2.base) and w1.member_lists() == w2.member_lists()


def power_set(source: "Relation | BaseExtension", cap: int = DEFAULT_NAIVE_CAP) -> RelationOfSubsets:
    """All nonempty subsets of the extension, in canonical order.

    This materializing form is the reference semantics and is capped; the
    engine's pruned enumerator must agree with constraint-filtered power sets.
    """
    base = base_of(source) if isinstance(source, Relation) else source
    n = len(base.rows)
    if n > cap:
        raise LimitExceeded("naive_cap", cap)
    ids = base.rowids()
    out: list[Subset] = []

    def extend(prefix: tuple[int, ...], start: int) -> None:
        for k in range(start, n):
            cur = prefix + (ids[k],)
            out.append(Subset(base, cur))
            extend(cur, k + 1)

    extend((), 0)
    return RelationOfSubsets(base, tuple(out))


def validate_aggregate_cond(cond) -> None:
    """Reject conditions containing per-tuple atoms (bare column operands)."""
    for atom in ex.atoms(cond):
        for op in (atom.lhs, atom.rhs):
            if isinstance(op, ex.Column):
                raise SemanticError(
                    f"per-tuple atom {atom.render()!r} not allowed here; "
                    "route it to a tuple-level select"
                )


def eval_subset_cond(cond, s: Subset) -> bool:
    """Aggregate condition against one subset; count terms mean cardinality."""
    return eval_group_cond(cond, s.base.schema, s.rows())


def constraint_filter(w: RelationOfSubsets, cond) -> RelationOfSubsets:
    """Keep the member subsets satisfying an aggregate condition."""
    validate_aggregate_cond(cond)
    kept = tuple(s for s in w.subsets if eval_subset_cond(cond, s))
    return RelationOfSubsets(w.base, kept)


def rs_tuple_select(w: RelationOfSubsets, cond) -> RelationOfSubsets:
    """Apply a per-tuple filter inside each subset; empty results are dropped."""
    return family(w.base, [s_select(s, cond) for s in w.subsets])


def rs_project(w: RelationOfSubsets, attrs: list[str]):
    """Per-subset projection tagged with sids: [(sid, [(rowid, values), ...])]."""
    return [(sid, s_project(s, attrs)) for sid, s in w.with_sids()]


def unary_combine(w: RelationOfSubsets, mode: str) -> Subset:
    """Fold the family into one subset: tuples in any / every member."""
    if mode == "union":
        if not w.subsets:
            return Subset(w.base, ())
        return reduce(s_union, w.subsets)
    if mode == "intersection":
        if not w.subsets:
            raise SemanticError("unary intersection of an empty relation of subsets")
        return reduce(s_intersect, w.subsets)
    raise ValueError(f"unknown unary mode {mode!r}")


def rs_set_combine(w1: RelationOfSubsets, w2: RelationOfSubsets, mode: str) -> RelationOfSubsets:
    """Set union/intersection of two families (membership by rowid sets)."""
    if not same_source(w1.base, w2.base):
        raise SemanticError(
            f"set combine over different bases: {w1.base.source!r} vs {w2.base.source!r}"
        )
    base = merge_bases(w1.base, w2.base)
    if mode == "union":
        return family(base, list(w1.subsets) + list(w2.subsets))
    if mode == "intersection":
        right = {s.members for s in w2.subsets}
        return family(base, [s for s in w1.subsets if s.members in right])
    raise ValueError(f"unknown set-combine mode {mode!r}")


def cross_combine(w1: RelationOfSubsets, w2: RelationOfSubsets, mode: str) -> RelationOfSubsets:
    """Pairwise union/intersection of members; empty results are excluded."""
    if not same_source(w1.base, w2.base):
        raise SemanticError(
            f"cross combine over different bases: {w1.base.source!r} vs {w2.base.source!r}"
        )
    op = s_union if mode == "union" else s_intersect if mode == "intersection" else None
    if op is None:
        raise ValueError(f"unknown cross-combine mode {mode!r}")
    base = merge_bases(w1.base, w2.base)
    return family(base, [op(a, b) for a in w1.subsets for b in w2.subsets])


def rs_complement(w: RelationOfSubsets) -> RelationOfSubsets:
    """Complement each member relative to the family's base extension."""
    return family(w.base, [s_complement(Subset(w.base, s.members)) for s in w.subsets])


def cross_product(w1: RelationOfSubsets, w2: RelationOfSubsets) -> RelationOfSubsets:
    """Cartesian product of every member pair, over the product extension."""
    pb = product_of(w1.base, w2.base)
    members = [s_join(a, b, ex.TRUE, pb) for a in w1.subsets for b in w2.subsets]
    return family(pb, members)


def cross_join(w1: RelationOfSubsets, w2: RelationOfSubsets, jc) -> RelationOfSubsets:
    """Join every member pair on jc; empty join results are excluded."""
    pb = product_of(w1.base, w2.base)
    members = [s_join(a, b, jc, pb) for a in w1.subsets for b in w2.subsets]
    return family(pb, members)


def rs_group_by(w: RelationOfSubsets, keys, aggs, having=None):
    """Per-subset group-by tagged with sids: [(sid, [(key_vals, agg_vals), ...])].

    A subset whose groups are all removed by having contributes no rows.
    """
    return [(sid, s_group_by(s, keys, aggs, having)) for sid, s in w.with_sids()]


def maxmin_filter(w: RelationOfSubsets, mode: str, criterion: str = "inclusion") -> RelationOfSubsets:
    """Keep maximal or minimal members.

    inclusion: no proper superset (maximal) / proper subset (minimal) in w.
    cardinality: members whose size equals the family max (resp. min).
    """
    if mode not in ("maximal", "minimal"):
        raise ValueError(f"unknown maxmin mode {mode!r}")
    if criterion not in ("inclusion", "cardinality"):
        raise ValueError(f"unknown maxmin criterion {criterion!r}")
    if not w.subsets:
        return w

    if criterion == "cardinality":
        sizes = [len(s) for s in w.subsets]
        target = max(sizes) if mode == "maximal" else min(sizes)
        kept = tuple(s for s in w.subsets if len(s) == target)
        return RelationOfSubsets(w.base, kept)

    # Checking against already-kept extremes suffices: any proper superset is
    # itself contained in some kept maximal member (dually for minimal).
    order = sorted(w.subsets, key=len, reverse=(mode == "maximal"))
    kept_sets: list[frozenset] = []
    kept: list[Subset] = []
    for s in order:
        fs = frozenset(s.members)
        if mode == "maximal":
            dominated = any(fs < k for k in kept_sets)
        else:
            dominated = any(k < fs for k in kept_sets)
        if not dominated:
            kept_sets.append(fs)
            kept.append(s)
    return RelationOfSubsets(w.base, tuple(sorted(kept, key=lambda s: s.members)))


def lift(source: "Relation | BaseExtension") -> RelationOfSubsets:
    """Embed a plain relation as the family containing its whole extension."""
    base = base_of(source) if isinstance(source, Relation) else source
    if not base.rows:
        raise SemanticError("cannot lift an empty relation")
    return RelationOfSubsets(base, (Subset(base, base.rowids()),))
