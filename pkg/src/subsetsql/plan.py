"""Subset-algebra IR: the node tree produced by lowering and fed to evaluators.

Relation-level children (under PowerSet, TupleSelect, Lift) are either a table
name or a nested TupleSelect; family-level nodes compose freely. UnaryCombine
yields a single subset and therefore terminates a branch; Project and GroupBy
are terminal result-producing nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TupleSelect:
    source: "str | TupleSelect"
    cond: object


@dataclass(frozen=True)
class PowerSet:
    source: "str | TupleSelect"


@dataclass(frozen=True)
class Lift:
    source: "str | TupleSelect"


@dataclass(frozen=True)
class ConstraintFilter:
    child: object
    cond: object


@dataclass(frozen=True)
class SetCombine:
    left: object
    right: object
    mode: str  # union | intersection


@dataclass(frozen=True)
class CrossCombine:
    left: object
    right: object
    mode: str  # union | intersection


@dataclass(frozen=True)
class CrossProduct:
    left: object
    right: object


@dataclass(frozen=True)
class CrossJoin:
    left: object
    right: object
    jc: object


@dataclass(frozen=True)
class MaxMinFilter:
    child: object
    mode: str  # maximal | minimal
    criterion: str = "inclusion"  # inclusion | cardinality


@dataclass(frozen=True)
class UnaryCombine:
    child: object
    mode: str  # union | intersection


@dataclass(frozen=True)
class ProjItem:
    """One select-list entry: the declared sid, a column, or an aggregate."""

    kind: str  # sid | column | agg
    name: str | None = None  # column name (possibly qualified) or sid name
    agg: object | None = None  # expr.Agg when kind == "agg"

    def label(self) -> str:
        if self.kind == "agg":
            return self.agg.render()
        return self.name


@dataclass(frozen=True)
class Project:
    """Attribute projection or aggregate projection, depending on the items."""

    child: object
    items: tuple[ProjItem, ...]


@dataclass(frozen=True)
class GroupBy:
    child: object
    keys: tuple[str, ...]
    aggs: tuple  # expr.Agg terms, in select-list order
    having: object | None = None
    items: tuple[ProjItem, ...] = field(default_factory=tuple)


FAMILY_NODES = (
    PowerSet,
    Lift,
    ConstraintFilter,
    SetCombine,
    CrossCombine,
    CrossProduct,
    CrossJoin,
    MaxMinFilter,
)
