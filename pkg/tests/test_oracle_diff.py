"""Differential tests: the engine must agree with the naive oracle everywhere."""

import random

import pytest

import subsetsql as sq
from subsetsql import expr as ex
from subsetsql import plan as pl
from subsetsql.engine import Catalog
from subsetsql.errors import SubsetSqlError
from subsetsql.families import rs_equal, validate_family
from subsetsql.oracle import oracle_eval, oracle_family

from helpers import random_agg_condition, random_relation

from test_sql_parser import DIALECT_CORPUS


def engine_vs_oracle_family(plan, catalog):
    fam = sq.evaluate_family(plan, catalog)
    ofam = oracle_family(plan, catalog)
    assert fam.member_lists() == ofam.members
    assert fam.base.source == ofam.base.source
    validate_family(fam)


def test_noneatable_bundles_plan_oracle(catalog):
    plan = sq.lower(
        sq.parse(
            'SELECT * FROM Item WHERE Type = "Non-Eatable" WITH SUBSETS Item sid '
            "CONSTRAINED BY sum(Weight) > 200 and sum(Weight) < 400 and sum(Price) > 150"
        ),
        catalog,
    )
    engine_vs_oracle_family(plan, catalog)
    ofam = oracle_family(plan, catalog)
    assert ofam.members == sorted(
        [(1, 8), (0, 1, 8), (0, 3, 8), (3, 6, 8), (0, 3, 6, 8)]
    )


def test_single_row_relation_everywhere():
    rel = sq.Relation(
        "One",
        sq.Schema((sq.Attr("A", "int"),)),
        (sq.Row(0, (7,)),),
    )
    catalog = Catalog([rel])
    for text in [
        "SELECT * FROM One WITH SUBSETS One sid",
        "SELECT * FROM One WITH SUBSETS One sid CONSTRAINED BY sum(A) > 0",
        "SELECT * FROM One WITH SUBSETS One sid APPLY UNARY UNION",
        "SELECT * FROM One WITH SUBSETS One sid MAXIMAL CONSTRAINED BY count(sid) >= 1",
    ]:
        plan = sq.lower(sq.parse(text), catalog)
        eng = sq.evaluate(plan, catalog)
        orc = oracle_eval(plan, catalog)
        assert eng.rows == orc.rows
        assert len(eng.rows) <= 1 or eng.kind == "members"


@pytest.mark.parametrize("text", DIALECT_CORPUS)
def test_dialect_corpus_engine_equals_oracle(text, catalog):
    plan = sq.lower(sq.parse(text), catalog)
    sid_label = sq.default_sid_label(sq.parse(text))
    eng = sq.evaluate(plan, catalog, sid_label=sid_label)
    orc = oracle_eval(plan, catalog, sid_label=sid_label)
    assert eng.columns == orc.columns
    assert eng.rows == orc.rows
    assert eng.subset_groups == orc.subset_groups
    assert sq.render(eng, "table") == sq.render(orc, "table")


def test_randomized_enumeration_instances():
    """Criterion-style harness: 200 random (relation, constraint) pairs."""
    rng = random.Random(0xC0FFEE)
    agreements = 0
    while agreements < 200:
        rel = random_relation(rng, max_rows=12, allow_negative=rng.random() < 0.3)
        c = random_agg_condition(rng, rel)
        catalog = Catalog([rel])
        plan = pl.ConstraintFilter(pl.PowerSet("R"), c)
        engine_vs_oracle_family(plan, catalog)
        agreements += 1
    assert agreements == 200


def test_randomized_composed_plans():
    rng = random.Random(0xBEEF)
    for _ in range(40):
        rel = random_relation(rng, max_rows=8, allow_negative=rng.random() < 0.3)
        catalog = Catalog([rel])
        base_plan = pl.ConstraintFilter(pl.PowerSet("R"), random_agg_condition(rng, rel))
        roll = rng.random()
        if roll < 0.25:
            plan = pl.MaxMinFilter(
                base_plan,
                rng.choice(["maximal", "minimal"]),
                rng.choice(["inclusion", "cardinality"]),
            )
        elif roll < 0.5:
            other = pl.ConstraintFilter(pl.PowerSet("R"), random_agg_condition(rng, rel))
            plan = pl.SetCombine(base_plan, other, rng.choice(["union", "intersection"]))
        elif roll < 0.75:
            other = pl.ConstraintFilter(pl.PowerSet("R"), random_agg_condition(rng, rel))
            plan = pl.CrossCombine(base_plan, other, rng.choice(["union", "intersection"]))
        else:
            cond = ex.Cmp(ex.Column("Tag"), "=", ex.Literal(rng.choice(["A", "B"])))
            plan = pl.ConstraintFilter(pl.PowerSet(pl.TupleSelect("R", cond)),
                                       random_agg_condition(rng, rel))
        engine_vs_oracle_family(plan, catalog)


def test_randomized_cross_join_plans():
    rng = random.Random(0xD1CE)
    for _ in range(15):
        left = random_relation(rng, max_rows=4)
        right = random_relation(rng, max_rows=4)
        right = sq.Relation("S", right.schema, right.rows)
        catalog = Catalog([left, right])
        lplan = pl.ConstraintFilter(pl.PowerSet("R"), random_agg_condition(rng, left))
        rplan = pl.ConstraintFilter(pl.PowerSet("S"), random_agg_condition(rng, right))
        jc = ex.Cmp(ex.Column("A", "R"), "=", ex.Column("A", "S"))
        for plan in (pl.CrossProduct(lplan, rplan), pl.CrossJoin(lplan, rplan, jc)):
            engine_vs_oracle_family(plan, catalog)


def test_error_behavior_matches():
    rel = random_relation(random.Random(5), max_rows=4)
    catalog = Catalog([rel])
    bad = pl.ConstraintFilter(pl.PowerSet("R"), ex.Cmp(ex.Column("A"), ">", ex.Literal(1)))
    with pytest.raises(SubsetSqlError):
        sq.evaluate_family(bad, catalog)
    with pytest.raises(SubsetSqlError):
        oracle_family(bad, catalog)
