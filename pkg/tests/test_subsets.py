import pytest

from subsetsql import expr as ex
from subsetsql.errors import SemanticError
from subsetsql.relation import tuple_select
from subsetsql.subsets import (
    Subset,
    base_of,
    product_of,
    s_aggregate,
    s_complement,
    s_difference,
    s_group_by,
    s_intersect,
    s_join,
    s_project,
    s_select,
    s_union,
)
from subsetsql.values import Dec

from helpers import ids, make_relation


def cond(text: str):
    from subsetsql.sql import _Parser, tokenize

    return _Parser(tokenize(text)).parse_cond()


@pytest.fixture(scope="module")
def shop_base(shop):
    return base_of(shop)


@pytest.fixture(scope="module")
def item_base(item):
    return base_of(item)


def sub(base, *one_based):
    return Subset(base, ids(*one_based))


def test_union_golden(shop_base):
    # {s1,s2} union {s2,s5} -> {s1,s2,s5}
    assert s_union(sub(shop_base, 1, 2), sub(shop_base, 2, 5)).members == ids(1, 2, 5)


def test_union_trivia(item_base):
    a = sub(item_base, 2, 9)
    assert s_union(a, a) == a
    assert s_union(a, Subset(item_base, ())) == a


def test_intersect(shop_base, item_base):
    assert s_intersect(sub(shop_base, 1, 2), sub(shop_base, 2, 5)).members == ids(2)
    assert s_intersect(sub(shop_base, 1, 2), sub(shop_base, 3, 5)).members == ()
    a = sub(item_base, 1, 4, 9)
    assert s_intersect(a, a) == a


def test_difference(item_base):
    assert s_difference(sub(item_base, 1, 2, 9), sub(item_base, 2)).members == ids(1, 9)
    a = sub(item_base, 3, 7)
    assert s_difference(a, a).members == ()
    assert s_difference(a, Subset(item_base, ())) == a


def test_base_mismatch_is_an_error(item_base, shop_base):
    with pytest.raises(SemanticError, match="base mismatch"):
        s_union(sub(item_base, 1), sub(shop_base, 1))


def test_complement(item, item_base, shop):
    # over the full Item base
    assert s_complement(sub(item_base, 3, 7, 8)).members == ids(1, 2, 4, 5, 6, 9, 10)
    assert s_complement(Subset(item_base, ())).members == tuple(range(10))
    # relative to the filtered extension the family was formed over
    filtered = base_of(tuple_select(shop, cond("Rating > 4.0")))
    assert s_complement(Subset(filtered, ids(1, 3, 4))).members == ()


def test_select(item_base):
    assert s_select(sub(item_base, 1, 3, 6), cond('Type = "Eatable"')).members == ids(3, 6)
    a = sub(item_base, 2, 4, 7)
    assert s_select(a, ex.TRUE) == a
    assert s_select(sub(item_base, 1), cond("Price > 100")).members == ()


def test_project(shop_base, item_base):
    assert s_project(sub(shop_base, 1, 3), ["Location"]) == [
        (0, ("M.G. Road",)),
        (2, ("Downing Street",)),
    ]
    assert s_project(Subset(shop_base, ()), ["Location"]) == []
    assert s_project(sub(item_base, 4), ["Name", "Price"]) == [(3, ("Tooth Paste", 50))]


def test_aggregate(shop_base, item_base):
    assert s_aggregate(sub(shop_base, 1, 3), "sum", "Distance") == 38
    assert s_aggregate(sub(shop_base, 1, 4), "max", "Rating") == Dec.parse("4.8")
    assert s_aggregate(sub(item_base, 3, 5, 6, 8, 10), "count") == 5
    with pytest.raises(SemanticError, match="undefined aggregate"):
        s_aggregate(Subset(shop_base, ()), "sum", "Distance")


def test_join_product_rowids(shop_base, item_base):
    # {s2,s5} x {i1,i6}: 4 concatenated rows on the product extension
    joined = s_join(sub(shop_base, 2, 5), sub(item_base, 1, 6), ex.TRUE)
    assert len(joined.members) == 4
    mod = item_base.modulus
    assert joined.members == tuple(sorted(s * mod + i for s in ids(2, 5) for i in ids(1, 6)))
    assert s_join(Subset(shop_base, ()), sub(item_base, 1), ex.TRUE).members == ()


def test_join_with_condition():
    avail = make_relation(
        "Av", [("ItemId", "int"), ("ShopId", "int")], [(6, 2), (3, 5), (1, 2)]
    )
    shops = make_relation("S", [("ShopId", "int"), ("D", "int")], [(2, 15), (5, 17)])
    sb, ab = base_of(shops), base_of(avail)
    joined = s_join(
        Subset(sb, (0, 1)), Subset(ab, (0, 1, 2)), cond("S.ShopId = Av.ShopId")
    )
    # shop row 0 (id 2) matches avail rows 0 and 2; shop row 1 (id 5) matches row 1
    assert joined.members == (0 * 3 + 0, 0 * 3 + 2, 1 * 3 + 1)


def test_join_qualified_resolution(shop_base, item_base):
    pb = product_of(shop_base, item_base)
    assert pb.schema.index_of("ShopId", "Shop") == 0
    assert pb.schema.index_of("Name", "Item") is not None
    with pytest.raises(SemanticError, match="unknown attribute"):
        pb.schema.index_of("Nope")


def test_group_by(item_base):
    a = sub(item_base, 2, 4, 5, 8)
    rows = s_group_by(a, ["Type"], [("sum", "Price"), ("min", "Weight")])
    assert rows == [
        (("Eatable",), (105, 35)),
        (("Non-Eatable",), (120, 150)),
    ]
    assert s_group_by(Subset(item_base, ()), ["Type"], [("sum", "Price")]) == []
    having = cond("sum(Price) < 110")
    rows = s_group_by(a, ["Type"], [("sum", "Price"), ("min", "Weight")], having)
    assert rows == [(("Eatable",), (105, 35))]


def test_group_by_errors(item_base):
    with pytest.raises(SemanticError):
        s_group_by(sub(item_base, 1), ["Type"], [("sum", "Name")])


def test_subset_equality_ignores_snapshot(item, item_base):
    filtered = base_of(tuple_select(item, cond('Type = "Non-Eatable"')))
    assert Subset(filtered, ids(2, 9)) == Subset(item_base, ids(2, 9))
    assert Subset(item_base, ids(2, 9)) != Subset(item_base, ids(2,))
