"""Schemas, tuples, relations, and CSV ingestion.

Relations are immutable after load. Row identifiers are assigned in file
order at load time and survive tuple-level selection unchanged, which is what
makes subsets (sets of rowids) well-defined even when tuple values repeat.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from . import expr as ex
from .errors import LoadError, SemanticError
from .values import KIND_DEC, KIND_INT, KIND_STR, infer_kind, parse_cell, render_value

KINDS = (KIND_INT, KIND_DEC, KIND_STR)


@dataclass(frozen=True)
class Attr:
    name: str
    kind: str
    qualifier: str | None = None  # owning relation for product schemas


@dataclass(frozen=True)
class Schema:
    attrs: tuple[Attr, ...]

    def __post_init__(self):
        seen = set()
        for a in self.attrs:
            key = (a.name.lower(), (a.qualifier or "").lower())
            if key in seen:
                raise SemanticError(f"duplicate attribute name {a.name!r}")
            seen.add(key)
            if a.kind not in KINDS:
                raise SemanticError(f"unknown kind {a.kind!r} for attribute {a.name!r}")

    def index_of(self, name: str, qualifier: str | None = None) -> int:
        """Resolve an attribute case-insensitively; qualifier narrows products."""
        name_l = name.lower()
        qual_l = qualifier.lower() if qualifier else None
        hits = [
            i
            for i, a in enumerate(self.attrs)
            if a.name.lower() == name_l
            and (qual_l is None or (a.qualifier or "").lower() == qual_l)
        ]
        if not hits:
            label = f"{qualifier}.{name}" if qualifier else name
            raise SemanticError(f"unknown attribute {label!r}")
        if len(hits) > 1:
            raise SemanticError(f"ambiguous attribute {name!r}; qualify with a relation name")
        return hits[0]

    def attr_at(self, idx: int) -> Attr:
        return self.attrs[idx]

    def names(self) -> list[str]:
        return [a.name for a in self.attrs]


@dataclass(frozen=True)
class Row:
    rowid: int
    values: tuple

    def __post_init__(self):
        if self.rowid < 0:
            raise SemanticError("rowid must be nonnegative")


@dataclass(frozen=True)
class Relation:
    name: str
    schema: Schema
    rows: tuple[Row, ...]

    def __post_init__(self):
        arity = len(self.schema.attrs)
        seen = set()
        for r in self.rows:
            if len(r.values) != arity:
                raise SemanticError(
                    f"row {r.rowid} has {len(r.values)} values, schema arity is {arity}"
                )
            if r.rowid in seen:
                raise SemanticError(f"duplicate rowid {r.rowid} in relation {self.name!r}")
            seen.add(r.rowid)

    def __len__(self) -> int:
        return len(self.rows)


def load_csv(path: str, name: str, schema: Schema | None = None) -> Relation:
    """Load an RFC-4180 CSV with a header row into a typed relation.

    Without a declared schema every column kind is inferred: Int if all cells
    parse as integers, else Dec if all parse as scale-6 decimals, else Str.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise LoadError(f"{path}: empty file, header row required") from None
            records = list(reader)
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from None

    header = [h.strip() for h in header]
    if len(set(h.lower() for h in header)) != len(header):
        raise LoadError(f"{path}: duplicate column names in header")

    for lineno, rec in enumerate(records, start=2):
        if len(rec) != len(header):
            raise LoadError(
                f"{path}: line {lineno}: expected {len(header)} cells, found {len(rec)}"
            )

    if schema is not None:
        declared = [a.name.lower() for a in schema.attrs]
        if declared != [h.lower() for h in header]:
            raise LoadError(
                f"{path}: header {header} does not match declared schema {schema.names()}"
            )
    else:
        kinds = [infer_kind([rec[i] for rec in records]) for i in range(len(header))]
        schema = Schema(tuple(Attr(h, k) for h, k in zip(header, kinds)))

    rows = []
    for rowid, rec in enumerate(records):
        vals = []
        for cell, attr in zip(rec, schema.attrs):
            try:
                vals.append(parse_cell(cell, attr.kind))
            except ValueError as exc:
                raise LoadError(f"{path}: line {rowid + 2}, column {attr.name!r}: {exc}") from None
        rows.append(Row(rowid, tuple(vals)))
    return Relation(name, schema, tuple(rows))


def to_csv(rel: Relation) -> str:
    """Serialize a relation back to CSV text (round-trips through load_csv)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rel.schema.names())
    for row in rel.rows:
        writer.writerow([render_value(v) for v in row.values])
    return buf.getvalue()


def tuple_select(rel: Relation, cond) -> Relation:
    """Keep exactly the rows satisfying a per-tuple condition; rowids survive."""
    ex.validate_per_tuple(cond, rel.schema)
    kept = tuple(r for r in rel.rows if ex.eval_on_row(cond, rel.schema, r.values))
    return Relation(rel.name, rel.schema, kept)


def tuple_project(rel: Relation, attrs: list[str]) -> Relation:
    """Restrict columns to the listed attributes; duplicate rows are retained."""
    if not attrs:
        raise SemanticError("projection attribute list must be nonempty")
    idxs = [rel.schema.index_of(a) for a in attrs]
    schema = Schema(tuple(rel.schema.attrs[i] for i in idxs))
    rows = tuple(Row(r.rowid, tuple(r.values[i] for i in idxs)) for r in rel.rows)
    return Relation(rel.name, schema, rows)
