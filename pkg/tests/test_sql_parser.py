import pytest

import subsetsql as sq
from subsetsql import expr as ex
from subsetsql import plan as pl
from subsetsql.errors import ParseError, SemanticError
from subsetsql.sql import Compound, SubsetQuery, parse, parse_statements, render_ast, tokenize

Q_NONEATABLE_BUNDLES = (
    'SELECT * FROM Item WHERE Type = "Non-Eatable" WITH SUBSETS Item sid '
    "CONSTRAINED BY sum(Weight) > 200 and sum(Weight) < 400 and sum(Price) > 150"
)
Q_SHOP_LOCATIONS = (
    "SELECT sid, Location FROM Shop WHERE Rating>4.0 WITH SUBSETS Shop sid "
    "CONSTRAINED BY sum(Distance)>30 and sum(Distance)<40"
)
Q_SHOP_TOTALS = (
    "SELECT sid, sum(Distance), max(Rating) FROM Shop WHERE Rating>4.0 WITH SUBSETS Shop sid "
    "CONSTRAINED BY sum(Distance)>30 and sum(Distance)<40"
)
Q_SHOP_ANY_VISIT = (
    "SELECT * FROM Shop WHERE Rating>4.0 WITH SUBSETS Shop sid "
    "CONSTRAINED BY sum(Distance)>30 and sum(Distance)<40 APPLY UNARY UNION"
)
Q_SHOP_EVERY_VISIT = Q_SHOP_ANY_VISIT.replace("APPLY UNARY UNION", "APPLY UNARY INTERSECTION")
Q_TRIP_A = (
    "SELECT * FROM Shop WHERE Rating>3.5 and Rating<4.7 WITH SUBSETS Shop sid "
    "CONSTRAINED BY sum(Distance)>30 and sum(Distance)<36"
)
Q_TRIP_B = (
    "SELECT * FROM Shop WHERE Distance>14 and Distance<19 WITH SUBSETS Shop sid "
    "CONSTRAINED BY sum(Rating)>5.5 and sum(Rating)<7.0"
)
Q_TRIPS_CROSS_UNION = f"({Q_TRIP_A}) CROSS UNION ({Q_TRIP_B})"
Q_TRIPS_CROSS_INTERSECTION = f"({Q_TRIP_A}) CROSS INTERSECTION ({Q_TRIP_B})"
Q_TRIPS_UNION = f"({Q_TRIP_A}) UNION ({Q_TRIP_B})"
Q_TWO_SOURCE_PRODUCT = (
    "SELECT * FROM Item, Shop WHERE Price<30 WITH SUBSETS Item sid,Shop sid "
    "CONSTRAINED BY sum(Distance)>14 and sum(Distance)<19 and sum(Rating)>5.5 "
    "and sum(Rating)<7.0 and sum(Weight)>60 and sum(Weight)<90"
)
Q_TWO_SOURCE_JOIN = (
    "SELECT * FROM Item, Shop, Available WHERE Price<30 WITH SUBSETS Item sid,Shop sid "
    "CONSTRAINED BY Item.ItemId = Available.ItemId and Shop.ShopId = Available.ShopId "
    "and sum(Distance)>14 and sum(Distance)<19 and sum(Rating)>5.5 and sum(Rating)<7.0 "
    "and sum(Weight)>60 and sum(Weight)<90"
)
Q_EATABLE_BY_CARDINALITY = (
    'SELECT * FROM Item WHERE Type="Eatable" WITH SUBSETS Item sid '
    "CONSTRAINED BY sum(Weight) > 190 and count(sid) >= 4 and count(sid) <= 5"
)
Q_EATABLE_MAXIMAL = (
    'SELECT * FROM Item WHERE Type="Eatable" WITH SUBSETS Item sid MAXIMAL '
    "CONSTRAINED BY sum(Weight) > 175 and sum(Weight) < 200"
)

DIALECT_CORPUS = [
    Q_NONEATABLE_BUNDLES,
    Q_SHOP_LOCATIONS,
    Q_SHOP_TOTALS,
    Q_SHOP_ANY_VISIT,
    Q_SHOP_EVERY_VISIT,
    Q_TRIPS_CROSS_UNION,
    Q_TRIPS_CROSS_INTERSECTION,
    Q_TRIPS_UNION,
    Q_TWO_SOURCE_PRODUCT,
    Q_TWO_SOURCE_JOIN,
    Q_EATABLE_BY_CARDINALITY,
    Q_EATABLE_MAXIMAL,
]


def test_tokenize_constraint_fragment():
    toks = tokenize("sum(Weight) > 190 and count(sid) >= 4")
    kinds = [(t.kind, t.text) for t in toks]
    assert kinds == [
        ("IDENT", "sum"),
        ("LPAREN", "("),
        ("IDENT", "Weight"),
        ("RPAREN", ")"),
        ("OP", ">"),
        ("INT", "190"),
        ("KEYWORD", "AND"),
        ("IDENT", "count"),
        ("LPAREN", "("),
        ("IDENT", "sid"),
        ("RPAREN", ")"),
        ("OP", ">="),
        ("INT", "4"),
        ("EOF", ""),
    ]


def test_tokenize_empty_input():
    toks = tokenize("")
    assert [t.kind for t in toks] == ["EOF"]


def test_tokenize_string_literal():
    toks = tokenize('Type = "Non-Eatable"')
    assert [(t.kind, t.value if t.kind == "STRING" else t.text) for t in toks[:3]] == [
        ("IDENT", "Type"),
        ("OP", "="),
        ("STRING", "Non-Eatable"),
    ]
    single = tokenize("Type = 'Eatable'")
    assert single[2].value == "Eatable"


def test_tokenize_errors_carry_position():
    with pytest.raises(ParseError) as e:
        tokenize("sum(Weight) > $3")
    assert e.value.line == 1 and e.value.col == 15
    with pytest.raises(ParseError) as e:
        tokenize('Type = "open')
    assert "unterminated" in str(e.value)


def test_parse_single_source_structure():
    ast = parse(Q_NONEATABLE_BUNDLES)
    assert isinstance(ast, SubsetQuery)
    assert ast.select_star
    assert ast.from_tables == ("Item",)
    assert ast.where is not None
    assert ast.decls == (("Item", "sid"),)
    assert ast.constrained_by is not None
    assert ast.maxmin is None and ast.apply_unary is None


def test_parse_compound_queries():
    ast = parse(Q_TRIPS_CROSS_UNION)
    assert isinstance(ast, Compound)
    assert ast.op == "cross union"
    assert isinstance(ast.left, SubsetQuery) and isinstance(ast.right, SubsetQuery)
    assert parse(Q_TRIPS_UNION).op == "union"


def test_parse_maximal_marker():
    ast = parse(Q_EATABLE_MAXIMAL)
    assert ast.maxmin == "maximal"


def test_parse_errors_have_positions():
    with pytest.raises(ParseError) as e:
        parse("SELECT * FROM Item WITH SUBSETS")
    assert e.value.line == 1 and e.value.col > 0
    with pytest.raises(ParseError, match="WITH SUBSETS clause required"):
        parse("SELECT * FROM Item")
    with pytest.raises(ParseError):
        parse("SELECT * FROM Item WITH SUBSETS Item sid GROUP Type BY")
    with pytest.raises(ParseError, match="out of order"):
        parse("SELECT * FROM Item WITH SUBSETS Item sid APPLY UNARY UNION CONSTRAINED BY sum(Weight) > 1")


def test_clause_keywords_are_two_token_sequences():
    # arbitrary whitespace and casing between the pair members
    ast = parse("select * from Item with   SUBSETS Item sid constrained\n BY sum(Weight) > 1")
    assert ast.constrained_by is not None


def test_parse_statements_splitting():
    stmts = parse_statements(f"{Q_NONEATABLE_BUNDLES};\n\n{Q_EATABLE_BY_CARDINALITY};")
    assert len(stmts) == 2
    assert parse_statements("") == []
    assert parse_statements("  \n ") == []


def test_string_literal_with_semicolon_survives_splitting():
    q = 'SELECT * FROM Item WHERE Type = "a;b" WITH SUBSETS Item sid'
    stmts = parse_statements(q + ";")
    assert len(stmts) == 1
    assert stmts[0].where.rhs.value == "a;b"


@pytest.mark.parametrize("text", DIALECT_CORPUS)
def test_render_parse_fixpoint(text):
    ast = parse(text)
    rendered = render_ast(ast)
    assert parse(rendered) == ast


def test_render_parse_fixpoint_group_by():
    q = (
        "SELECT sid, Type, sum(Price), min(Weight) FROM Item WHERE Price>=40 and Price<=70 "
        "WITH SUBSETS Item sid CONSTRAINED BY sum(Weight)>500 GROUP BY Type HAVING sum(Price)<110"
    )
    ast = parse(q)
    assert parse(render_ast(ast)) == ast


def test_render_parse_fixpoint_not_and_or():
    q = (
        "SELECT * FROM Item WITH SUBSETS Item sid "
        'CONSTRAINED BY not (sum(Weight) > 10 or count(sid) = 2) and avg(Price) >= 1.5'
    )
    ast = parse(q)
    assert parse(render_ast(ast)) == ast


# --- lowering ---------------------------------------------------------------


def test_lower_constrained_single_source_shape(catalog):
    plan = sq.lower(parse(Q_NONEATABLE_BUNDLES), catalog)
    assert isinstance(plan, pl.ConstraintFilter)
    assert isinstance(plan.child, pl.PowerSet)
    assert isinstance(plan.child.source, pl.TupleSelect)
    assert plan.child.source.source == "Item"


def test_lower_apply_unary(catalog):
    plan = sq.lower(parse(Q_SHOP_ANY_VISIT), catalog)
    assert isinstance(plan, pl.UnaryCombine)
    assert plan.mode == "union"
    assert isinstance(plan.child, pl.ConstraintFilter)


def test_lower_bare_star_is_bare_power_set(catalog):
    plan = sq.lower(parse("SELECT * FROM Item WITH SUBSETS Item sid"), catalog)
    assert isinstance(plan, pl.PowerSet)
    assert plan.source == "Item"


def test_lower_multi_source_cross_product(catalog):
    plan = sq.lower(parse(Q_TWO_SOURCE_PRODUCT), catalog)
    assert isinstance(plan, pl.CrossProduct)


def test_lower_multi_source_cross_join(catalog):
    plan = sq.lower(parse(Q_TWO_SOURCE_JOIN), catalog)
    assert isinstance(plan, pl.CrossJoin)
    assert isinstance(plan.jc, (ex.And, ex.Cmp))


def test_lower_maxmin_applies_after_filter(catalog):
    plan = sq.lower(parse(Q_EATABLE_MAXIMAL), catalog)
    assert isinstance(plan, pl.MaxMinFilter)
    assert plan.mode == "maximal" and plan.criterion == "inclusion"
    assert isinstance(plan.child, pl.ConstraintFilter)
    plan = sq.lower(parse(Q_EATABLE_MAXIMAL), catalog, maxmin_criterion="cardinality")
    assert plan.criterion == "cardinality"


def test_lower_semantic_errors(catalog):
    with pytest.raises(SemanticError, match="unknown table"):
        sq.lower(parse("SELECT * FROM Nope WITH SUBSETS Nope s"), catalog)
    with pytest.raises(SemanticError, match="must appear in FROM"):
        sq.lower(parse("SELECT * FROM Item WITH SUBSETS Shop s"), catalog)
    with pytest.raises(SemanticError, match="unknown attribute"):
        sq.lower(parse("SELECT Bogus FROM Item WITH SUBSETS Item sid"), catalog)
    with pytest.raises(SemanticError, match="mix"):
        sq.lower(parse("SELECT sid, Location, sum(Distance) FROM Shop WITH SUBSETS Shop sid"), catalog)
    # the grammar ties HAVING to GROUP BY, so this is a parse-time rejection
    with pytest.raises(ParseError, match="out of order"):
        parse("SELECT * FROM Item WITH SUBSETS Item sid HAVING sum(Price) < 1")


def test_lower_compound_operand_restrictions(catalog):
    bad = f"({Q_SHOP_ANY_VISIT}) UNION ({Q_TRIP_B})"
    with pytest.raises(SemanticError, match="compound"):
        sq.lower(parse(bad), catalog)
    not_star = f"({Q_SHOP_LOCATIONS}) UNION ({Q_TRIP_B})"
    with pytest.raises(SemanticError, match="SELECT \\*"):
        sq.lower(parse(not_star), catalog)


def test_union_requires_same_base_table(catalog):
    q = (
        '(SELECT * FROM Item WHERE Type="Eatable" WITH SUBSETS Item sid) UNION '
        "(SELECT * FROM Shop WITH SUBSETS Shop sid)"
    )
    plan = sq.lower(parse(q), catalog)
    with pytest.raises(SemanticError, match="different bases"):
        sq.evaluate(plan, catalog)


def test_sid_label_from_decl(catalog):
    ast = parse("SELECT * FROM Item WITH SUBSETS Item grp")
    assert sq.default_sid_label(ast) == "grp"
    result = sq.evaluate(sq.lower(ast, catalog), catalog, sid_label=sq.default_sid_label(ast))
    assert result.columns[0] == "grp"


def test_select_sid_by_declared_name(catalog):
    ast = parse("SELECT grp, Name FROM Item WITH SUBSETS Item grp CONSTRAINED BY count(grp) = 1")
    result = sq.evaluate(sq.lower(ast, catalog), catalog)
    assert result.columns == ["grp", "Name"]
    assert len(result.rows) == 10
