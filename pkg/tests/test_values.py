import pytest

from subsetsql.errors import KindError
from subsetsql.values import (
    Dec,
    aggregate,
    compare,
    infer_kind,
    parse_cell,
    render_value,
    round_half_even_div,
    values_equal,
)


def test_dec_parse_and_render():
    assert Dec.parse("4.5").scaled == 4_500_000
    assert Dec.parse("-0.5").scaled == -500_000
    assert Dec.parse("7").scaled == 7_000_000
    assert Dec.parse("4.5").render() == "4.5"
    assert Dec.parse("38.000000").render() == "38.0"
    assert Dec.parse("0.000001").render() == "0.000001"
    assert Dec.parse("-2.10").render() == "-2.1"


def test_dec_rejects_too_many_fraction_digits():
    with pytest.raises(ValueError):
        Dec.parse("1.1234567")
    with pytest.raises(ValueError):
        Dec.parse("1.")
    with pytest.raises(ValueError):
        Dec.parse("1e5")


def test_cross_kind_equality_is_always_false():
    assert not values_equal(5, Dec.from_int(5))
    assert not values_equal("5", 5)
    assert compare("!=", 5, Dec.from_int(5))
    assert not compare("=", 5, Dec.from_int(5))


def test_numeric_ordering_mixes_int_and_dec():
    assert compare("<", 4, Dec.parse("4.5"))
    assert compare(">=", Dec.parse("4.5"), 4)
    assert not compare(">", 4, Dec.parse("4.0"))


def test_string_ordering_is_an_error():
    with pytest.raises(KindError):
        compare("<", "a", "b")
    with pytest.raises(KindError):
        compare(">=", "a", 1)
    assert compare("=", "a", "a")
    assert compare("!=", "a", "b")


@pytest.mark.parametrize(
    "num,den,expected",
    [
        (3, 2, 2),  # 1.5 -> 2
        (1, 2, 0),  # 0.5 -> 0
        (-1, 2, 0),  # -0.5 -> 0
        (-3, 2, -2),  # -1.5 -> -2
        (5, 2, 2),  # 2.5 -> 2
        (7, 2, 4),  # 3.5 -> 4
        (7, 3, 2),
        (-7, 3, -2),
    ],
)
def test_round_half_even(num, den, expected):
    assert round_half_even_div(num, den) == expected


def test_aggregate_exactness():
    assert aggregate("sum", "int", [20, 18]) == 38
    assert aggregate("max", "dec", [Dec.parse("4.5"), Dec.parse("4.8")]) == Dec.parse("4.8")
    # 0.1-style values that would drift under binary floating point
    vals = [Dec.parse("0.1")] * 10
    assert aggregate("sum", "dec", vals) == Dec.parse("1.0")
    assert aggregate("avg", "dec", vals) == Dec.parse("0.1")
    assert aggregate("avg", "int", [1, 2]) == Dec.parse("1.5")
    # avg is half-even rounded at scale 6
    assert aggregate("avg", "int", [0, 1]).scaled == 500_000


def test_aggregate_rejects_strings():
    with pytest.raises(KindError):
        aggregate("sum", "str", ["a"])


def test_parse_cell_and_inference():
    assert parse_cell("42", "int") == 42
    assert parse_cell("4.5", "dec") == Dec.parse("4.5")
    assert parse_cell("x", "str") == "x"
    with pytest.raises(ValueError):
        parse_cell("4.5", "int")
    with pytest.raises(ValueError):
        parse_cell(str(2**63), "int")
    assert infer_kind(["1", "2"]) == "int"
    assert infer_kind(["1", "2.5"]) == "dec"
    assert infer_kind(["1", "x"]) == "str"


def test_render_value():
    assert render_value(38) == "38"
    assert render_value(Dec.parse("4.60")) == "4.6"
    assert render_value("M.G. Road") == "M.G. Road"
