"""Shared test utilities: rowid shorthands, query runners, random instances."""

from __future__ import annotations

import random

import subsetsql as sq
from subsetsql import expr as ex
from subsetsql.relation import Attr, Relation, Row, Schema
from subsetsql.values import Dec


def ids(*one_based) -> tuple[int, ...]:
    """Item/Shop tuples are numbered from 1 in the source tables; rowids from 0."""
    return tuple(sorted(i - 1 for i in one_based))


def run_family(query: str, catalog, criterion: str = "inclusion"):
    ast = sq.parse(query)
    plan = sq.lower(ast, catalog, criterion)
    return sq.evaluate_family(plan, catalog)


def run_result(query: str, catalog, criterion: str = "inclusion", **kw):
    ast = sq.parse(query)
    plan = sq.lower(ast, catalog, criterion)
    return sq.evaluate(plan, catalog, sid_label=sq.default_sid_label(ast), **kw)


def members(family) -> list[tuple[int, ...]]:
    return family.member_lists()


def make_relation(name: str, cols: list[tuple[str, str]], rows: list[tuple]) -> Relation:
    schema = Schema(tuple(Attr(n, k) for n, k in cols))
    return Relation(name, schema, tuple(Row(i, tuple(vals)) for i, vals in enumerate(rows)))


def cmp_agg(fn: str, attr: str, op: str, value) -> ex.Cmp:
    lit = ex.Literal(Dec.parse(value) if isinstance(value, str) and "." in value else value)
    return ex.Cmp(ex.Agg(fn, ex.Column(attr)), op, lit)


def random_relation(rng: random.Random, max_rows: int = 12, allow_negative: bool = False) -> Relation:
    n = rng.randint(1, max_rows)
    lo = -10 if allow_negative else 0
    rows = []
    for i in range(n):
        a = rng.randint(lo, 30)
        b = Dec(rng.randint(lo * 10, 300) * 10**5)  # one fractional digit
        tag = rng.choice(["A", "B", "C"])
        rows.append((a, b, tag))
    return make_relation("R", [("A", "int"), ("B", "dec"), ("Tag", "str")], rows)


def random_agg_condition(rng: random.Random, rel: Relation) -> object:
    """Random aggregate condition from the supported grammar."""

    def atom():
        fn = rng.choice(["sum", "count", "min", "max", "avg"])
        attr = "sid" if fn == "count" else rng.choice(["A", "B"])
        op = rng.choice(["<", "<=", ">", ">=", "=", "!="])
        if fn == "count":
            value = rng.randint(0, len(rel.rows) + 1)
        elif attr == "A":
            total = sum(r.values[0] for r in rel.rows)
            value = rng.randint(min(0, total), max(1, total))
            if fn == "avg" or rng.random() < 0.3:
                value = Dec(value * 10**6 + rng.choice([0, 5 * 10**5]))
        else:
            total = sum(r.values[1].scaled for r in rel.rows)
            value = Dec(rng.randint(min(0, total), max(1, total)))
        return ex.Cmp(ex.Agg(fn, ex.Column(attr)), op, ex.Literal(value))

    def node(depth: int):
        if depth <= 0 or rng.random() < 0.45:
            return atom()
        kind = rng.random()
        if kind < 0.4:
            return ex.And(tuple(node(depth - 1) for _ in range(rng.randint(2, 3))))
        if kind < 0.8:
            return ex.Or(tuple(node(depth - 1) for _ in range(2)))
        return ex.Not(node(depth - 1))

    return node(2)
