"""Typed values: 64-bit integers, scale-6 fixed-point decimals, and strings.

All comparison and aggregation paths are exact integer arithmetic; binary
floating point is never used. A decimal is stored as its value scaled by
10**6, so sums are plain integer sums and averages are a single exact
division with half-even rounding.
"""

from __future__ import annotations

import re

from .errors import KindError

SCALE = 6
ONE = 10**SCALE

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

KIND_INT = "int"
KIND_DEC = "dec"
KIND_STR = "str"

_INT_RE = re.compile(r"[+-]?\d+\Z")
_DEC_RE = re.compile(r"([+-]?)(\d+)(?:\.(\d{1,%d}))?\Z" % SCALE)


class Dec:
    """Immutable fixed-point decimal with 6 fractional digits."""

    __slots__ = ("scaled",)

    def __init__(self, scaled: int):
        self.scaled = scaled

    @classmethod
    def parse(cls, text: str) -> "Dec":
        m = _DEC_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a scale-{SCALE} decimal: {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        whole = int(m.group(2))
        frac = (m.group(3) or "").ljust(SCALE, "0")
        return cls(sign * (whole * ONE + int(frac)))

    @classmethod
    def from_int(cls, n: int) -> "Dec":
        return cls(n * ONE)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dec) and other.scaled == self.scaled

    def __hash__(self) -> int:
        return hash(("dec", self.scaled))

    def __repr__(self) -> str:
        return f"Dec({self.render()})"

    def render(self) -> str:
        """Decimal text with trailing zeros trimmed, at least one fraction digit."""
        neg = self.scaled < 0
        whole, frac = divmod(abs(self.scaled), ONE)
        digits = f"{frac:0{SCALE}d}".rstrip("0") or "0"
        return f"{'-' if neg else ''}{whole}.{digits}"


Value = "int | Dec | str"


def kind_of(v) -> str:
    if isinstance(v, bool):
        raise TypeError("bool is not a value kind")
    if isinstance(v, int):
        return KIND_INT
    if isinstance(v, Dec):
        return KIND_DEC
    if isinstance(v, str):
        return KIND_STR
    raise TypeError(f"not a value: {v!r}")


def numeric_scaled(v) -> int:
    """Common scale-6 integer representation for Int and Dec values."""
    if isinstance(v, Dec):
        return v.scaled
    if isinstance(v, int):
        return v * ONE
    raise KindError(f"value {v!r} is not numeric")


def values_equal(a, b) -> bool:
    """Equality: values of different kinds never compare equal."""
    ka, kb = kind_of(a), kind_of(b)
    if ka != kb:
        return False
    if ka == KIND_DEC:
        return a.scaled == b.scaled
    return a == b


def compare(op: str, a, b) -> bool:
    """Evaluate a comparison operator; ordering requires numeric operands."""
    if op == "=":
        return values_equal(a, b)
    if op == "!=":
        return not values_equal(a, b)
    ka, kb = kind_of(a), kind_of(b)
    if ka == KIND_STR or kb == KIND_STR:
        raise KindError(f"ordering comparison '{op}' not defined for strings")
    sa, sb = numeric_scaled(a), numeric_scaled(b)
    if op == "<":
        return sa < sb
    if op == "<=":
        return sa <= sb
    if op == ">":
        return sa > sb
    if op == ">=":
        return sa >= sb
    raise ValueError(f"unknown comparison operator {op!r}")


def round_half_even_div(num: int, den: int) -> int:
    """Exact num/den rounded half-to-even; den must be positive."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2 != 0):
        q += 1
    return q


def aggregate(fn: str, kind: str, values: list) -> "int | Dec":
    """Aggregate a nonempty uniform-kind numeric column slice.

    sum/min/max preserve the input kind; avg is always a Dec (exact scale-6
    division, round half even). Callers guarantee values is nonempty.
    """
    if kind == KIND_STR:
        raise KindError(f"aggregate {fn} over a string attribute")
    scaled = [numeric_scaled(v) for v in values]
    if fn == "sum":
        total = sum(scaled)
        return Dec(total) if kind == KIND_DEC else total // ONE
    if fn == "min":
        m = min(scaled)
        return Dec(m) if kind == KIND_DEC else m // ONE
    if fn == "max":
        m = max(scaled)
        return Dec(m) if kind == KIND_DEC else m // ONE
    if fn == "avg":
        return Dec(round_half_even_div(sum(scaled), len(scaled)))
    raise ValueError(f"unknown aggregate {fn!r}")


def sort_key(v):
    """Deterministic ordering key across kinds (used for group-key ordering)."""
    k = kind_of(v)
    if k == KIND_STR:
        return (1, v)
    return (0, numeric_scaled(v))


def parse_cell(text: str, kind: str):
    """Parse a CSV cell against a declared kind; raises ValueError on failure."""
    if kind == KIND_STR:
        return text
    if kind == KIND_INT:
        if _INT_RE.match(text.strip()) is None:
            raise ValueError(f"not an integer: {text!r}")
        n = int(text)
        if not INT64_MIN <= n <= INT64_MAX:
            raise ValueError(f"integer out of 64-bit range: {text!r}")
        return n
    if kind == KIND_DEC:
        return Dec.parse(text)
    raise ValueError(f"unknown kind {kind!r}")


def infer_kind(cells: list[str]) -> str:
    """Infer a column kind: Int if all cells parse as integers, else Dec, else Str."""
    def all_parse(kind: str) -> bool:
        for c in cells:
            try:
                parse_cell(c, kind)
            except ValueError:
                return False
        return True

    if all_parse(KIND_INT):
        return KIND_INT
    if all_parse(KIND_DEC):
        return KIND_DEC
    return KIND_STR


def render_value(v) -> str:
    if isinstance(v, Dec):
        return v.render()
    return str(v)
