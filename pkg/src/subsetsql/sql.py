"""Extended-SQL frontend: lexer, recursive-descent parser, and lowering.

The dialect covers ordinary SELECT/FROM/WHERE plus the subset clauses:

    query        := subset_query | '(' query ')' combinator '(' query ')'
    combinator   := UNION | INTERSECTION | CROSS UNION | CROSS INTERSECTION
    subset_query := SELECT select_list FROM table_list [WHERE cond]
                    WITH SUBSETS decl (',' decl)* [MAXIMAL | MINIMAL]
                    [CONSTRAINED BY cond]
                    [APPLY UNARY (UNION | INTERSECTION)]
                    [GROUP BY column_list [HAVING cond]]
    decl         := table_name sid_name
    select_list  := '*' | item (',' item)*
    item         := sid_name | column | aggfn '(' (column | sid_name) ')'

Keyword pairs (WITH SUBSETS, CONSTRAINED BY, APPLY UNARY, CROSS UNION, GROUP
BY) are parsed as two-token sequences. Queries without WITH SUBSETS are not
subset queries and are rejected with a pointer to use a plain SQL engine.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from . import plan as pl
from .classify import SourceMap, classify_constraints, classify_where
from .engine import Catalog
from .errors import ParseError, SemanticError
from .values import INT64_MAX, INT64_MIN, Dec

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "WITH", "SUBSETS", "CONSTRAINED", "BY",
    "APPLY", "UNARY", "UNION", "INTERSECTION", "CROSS", "MAXIMAL", "MINIMAL",
    "GROUP", "HAVING", "AND", "OR", "NOT",
}

_PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", "*": "STAR", ".": "DOT", ";": "SEMI"}


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD | IDENT | INT | DEC | STRING | OP | LPAREN | ... | EOF
    text: str
    line: int
    col: int
    value: object = None


def tokenize(text: str) -> list[Token]:
    """Lex query text; every error carries a line/column position."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, start_line, start_col))
            advance(1)
            continue
        if ch in "<>!=":
            two = text[i : i + 2]
            if two in ("<=", ">=", "!="):
                tokens.append(Token("OP", two, start_line, start_col))
                advance(2)
                continue
            if ch == "!":
                raise ParseError("expected '=' after '!'", start_line, start_col)
            tokens.append(Token("OP", ch, start_line, start_col))
            advance(1)
            continue
        if ch in "'\"":
            quote = ch
            j = i + 1
            buf = []
            while j < n:
                if text[j] == quote:
                    if j + 1 < n and text[j + 1] == quote:  # doubled quote escape
                        buf.append(quote)
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", start_line, start_col)
            raw = text[i : j + 1]
            tokens.append(Token("STRING", raw, start_line, start_col, "".join(buf)))
            advance(len(raw))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            is_dec = j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit()
            if is_dec:
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            raw = text[i:j]
            if is_dec:
                try:
                    value = Dec.parse(raw)
                except ValueError as exc:
                    raise ParseError(str(exc), start_line, start_col) from None
                tokens.append(Token("DEC", raw, start_line, start_col, value))
            else:
                value = int(raw)
                if not INT64_MIN <= value <= INT64_MAX:
                    raise ParseError("integer literal out of 64-bit range", start_line, start_col)
                tokens.append(Token("INT", raw, start_line, start_col, value))
            advance(len(raw))
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            raw = text[i:j]
            upper = raw.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, start_line, start_col))
            else:
                tokens.append(Token("IDENT", raw, start_line, start_col))
            advance(len(raw))
            continue
        raise ParseError(f"illegal character {ch!r}", start_line, start_col)

    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- AST -----------------------------------------------------------------


@dataclass(frozen=True)
class SubsetQuery:
    select_star: bool
    select_items: tuple  # ex.Column | ex.Agg entries (empty when star)
    from_tables: tuple[str, ...]
    where: object | None
    decls: tuple[tuple[str, str], ...]  # (table, sid_name)
    maxmin: str | None = None  # maximal | minimal
    constrained_by: object | None = None
    apply_unary: str | None = None  # union | intersection
    group_by: tuple[str, ...] = ()
    having: object | None = None


@dataclass(frozen=True)
class Compound:
    left: object
    op: str  # union | intersection | cross union | cross intersection
    right: object


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def at_keyword(self, *words: str) -> bool:
        for k, w in enumerate(words):
            t = self.peek(k)
            if t.kind != "KEYWORD" or t.text != w:
                return False
        return True

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {what}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def expect_keyword(self, *words: str) -> None:
        for w in words:
            t = self.peek()
            if t.kind != "KEYWORD" or t.text != w:
                raise ParseError(
                    f"expected {' '.join(words)}, found {t.text or 'end of input'!r}",
                    t.line,
                    t.col,
                )
            self.advance()

    # --- query ----------------------------------------------------------

    def parse_query(self):
        if self.peek().kind == "LPAREN":
            return self.parse_compound()
        return self.parse_subset_query()

    def parse_compound(self):
        self.expect("LPAREN", "'('")
        left = self.parse_query()
        self.expect("RPAREN", "')'")
        op = self.parse_combinator()
        self.expect("LPAREN", "'('")
        right = self.parse_query()
        self.expect("RPAREN", "')'")
        return Compound(left, op, right)

    def parse_combinator(self) -> str:
        t = self.peek()
        if self.at_keyword("CROSS", "UNION"):
            self.advance(), self.advance()
            return "cross union"
        if self.at_keyword("CROSS", "INTERSECTION"):
            self.advance(), self.advance()
            return "cross intersection"
        if self.at_keyword("UNION"):
            self.advance()
            return "union"
        if self.at_keyword("INTERSECTION"):
            self.advance()
            return "intersection"
        raise ParseError(
            "expected UNION, INTERSECTION, CROSS UNION, or CROSS INTERSECTION",
            t.line,
            t.col,
        )

    def parse_subset_query(self) -> SubsetQuery:
        t = self.peek()
        if not self.at_keyword("SELECT"):
            raise ParseError(f"expected SELECT, found {t.text or 'end of input'!r}", t.line, t.col)
        self.advance()
        star, items = self.parse_select_list()
        self.expect_keyword("FROM")
        tables = [self.expect("IDENT", "table name").text]
        while self.peek().kind == "COMMA":
            self.advance()
            tables.append(self.expect("IDENT", "table name").text)
        where = None
        if self.at_keyword("WHERE"):
            self.advance()
            where = self.parse_cond()
        t = self.peek()
        if not self.at_keyword("WITH", "SUBSETS"):
            raise ParseError(
                "WITH SUBSETS clause required: this engine evaluates subset queries only "
                "(use a plain SQL engine for ordinary queries)",
                t.line,
                t.col,
            )
        self.advance(), self.advance()
        decls = [self.parse_decl()]
        while self.peek().kind == "COMMA":
            self.advance()
            decls.append(self.parse_decl())
        maxmin = None
        if self.at_keyword("MAXIMAL"):
            self.advance()
            maxmin = "maximal"
        elif self.at_keyword("MINIMAL"):
            self.advance()
            maxmin = "minimal"
        constrained = None
        if self.at_keyword("CONSTRAINED", "BY"):
            self.advance(), self.advance()
            constrained = self.parse_cond()
        unary = None
        if self.at_keyword("APPLY", "UNARY"):
            self.advance(), self.advance()
            if self.at_keyword("UNION"):
                self.advance()
                unary = "union"
            elif self.at_keyword("INTERSECTION"):
                self.advance()
                unary = "intersection"
            else:
                t = self.peek()
                raise ParseError("expected UNION or INTERSECTION after APPLY UNARY", t.line, t.col)
        group_by: list[str] = []
        having = None
        if self.at_keyword("GROUP", "BY"):
            self.advance(), self.advance()
            group_by.append(self.parse_column_name())
            while self.peek().kind == "COMMA":
                self.advance()
                group_by.append(self.parse_column_name())
            if self.at_keyword("HAVING"):
                self.advance()
                having = self.parse_cond()
        t = self.peek()
        if t.kind == "KEYWORD":
            raise ParseError(f"clause {t.text} out of order or not allowed here", t.line, t.col)
        return SubsetQuery(
            select_star=star,
            select_items=tuple(items),
            from_tables=tuple(tables),
            where=where,
            decls=tuple(decls),
            maxmin=maxmin,
            constrained_by=constrained,
            apply_unary=unary,
            group_by=tuple(group_by),
            having=having,
        )

    def parse_decl(self) -> tuple[str, str]:
        table = self.expect("IDENT", "table name").text
        sid = self.expect("IDENT", "subset id name").text
        return table, sid

    def parse_select_list(self) -> tuple[bool, list]:
        if self.peek().kind == "STAR":
            self.advance()
            return True, []
        items = [self.parse_select_item()]
        while self.peek().kind == "COMMA":
            self.advance()
            items.append(self.parse_select_item())
        return False, items

    def parse_select_item(self):
        t = self.peek()
        if t.kind == "IDENT" and t.text.lower() in ex.AGG_FNS and self.peek(1).kind == "LPAREN":
            return self.parse_agg()
        return self.parse_column()

    def parse_agg(self) -> ex.Agg:
        fn = self.advance().text.lower()
        self.expect("LPAREN", "'('")
        arg = self.parse_column()
        self.expect("RPAREN", "')'")
        return ex.Agg(fn, arg)

    def parse_column(self) -> ex.Column:
        first = self.expect("IDENT", "identifier")
        if self.peek().kind == "DOT":
            self.advance()
            second = self.expect("IDENT", "identifier after '.'")
            return ex.Column(second.text, first.text)
        return ex.Column(first.text)

    def parse_column_name(self) -> str:
        return self.parse_column().render()

    # --- conditions -------------------------------------------------------

    def parse_cond(self):
        return self.parse_or()

    def parse_or(self):
        node = self.parse_and()
        items = [node]
        while self.at_keyword("OR"):
            self.advance()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else ex.Or(tuple(items))

    def parse_and(self):
        items = [self.parse_not()]
        while self.at_keyword("AND"):
            self.advance()
            items.append(self.parse_not())
        return items[0] if len(items) == 1 else ex.And(tuple(items))

    def parse_not(self):
        if self.at_keyword("NOT"):
            self.advance()
            return ex.Not(self.parse_not())
        return self.parse_primary()

    def parse_primary(self):
        if self.peek().kind == "LPAREN":
            self.advance()
            inner = self.parse_cond()
            self.expect("RPAREN", "')'")
            return inner
        return self.parse_comparison()

    def parse_comparison(self) -> ex.Cmp:
        lhs = self.parse_operand()
        t = self.peek()
        if t.kind != "OP":
            raise ParseError(f"expected comparison operator, found {t.text!r}", t.line, t.col)
        op = self.advance().text
        rhs = self.parse_operand()
        return ex.Cmp(lhs, op, rhs)

    def parse_operand(self):
        t = self.peek()
        if t.kind in ("INT", "DEC", "STRING"):
            self.advance()
            return ex.Literal(t.value)
        if t.kind == "IDENT":
            if t.text.lower() in ex.AGG_FNS and self.peek(1).kind == "LPAREN":
                return self.parse_agg()
            return self.parse_column()
        raise ParseError(f"expected a value, column, or aggregate, found {t.text!r}", t.line, t.col)


def parse(text: str):
    """Parse a single query (an optional trailing ';' is accepted)."""
    tokens = tokenize(text)
    parser = _Parser(tokens)
    ast = parser.parse_query()
    if parser.peek().kind == "SEMI":
        parser.advance()
    tail = parser.peek()
    if tail.kind != "EOF":
        raise ParseError(f"unexpected input after query: {tail.text!r}", tail.line, tail.col)
    return ast


def parse_statements(text: str) -> list:
    """Parse a ';'-separated script into a list of ASTs (empty input is fine)."""
    tokens = tokenize(text)
    statements = []
    segment: list[Token] = []
    for tok in tokens:
        if tok.kind in ("SEMI", "EOF"):
            if segment:
                segment.append(Token("EOF", "", tok.line, tok.col))
                statements.append(_Parser(segment).parse_query())
                segment = []
        else:
            segment.append(tok)
    return statements


# --- rendering --------------------------------------------------------------


def render_ast(ast) -> str:
    """Render an AST back to query text; reparsing yields an equal AST."""
    if isinstance(ast, Compound):
        return f"({render_ast(ast.left)}) {ast.op.upper()} ({render_ast(ast.right)})"
    q = ast
    if q.select_star:
        select = "*"
    else:
        select = ", ".join(item.render() for item in q.select_items)
    parts = [f"SELECT {select}", f"FROM {', '.join(q.from_tables)}"]
    if q.where is not None:
        parts.append(f"WHERE {q.where.render()}")
    parts.append("WITH SUBSETS " + ", ".join(f"{t} {s}" for t, s in q.decls))
    if q.maxmin:
        parts.append(q.maxmin.upper())
    if q.constrained_by is not None:
        parts.append(f"CONSTRAINED BY {q.constrained_by.render()}")
    if q.apply_unary:
        parts.append(f"APPLY UNARY {q.apply_unary.upper()}")
    if q.group_by:
        parts.append("GROUP BY " + ", ".join(q.group_by))
        if q.having is not None:
            parts.append(f"HAVING {q.having.render()}")
    return " ".join(parts)


# --- lowering ---------------------------------------------------------------


def default_sid_label(ast) -> str:
    """Label for the sid column of a SELECT * result."""
    while isinstance(ast, Compound):
        ast = ast.left
    return ast.decls[0][1] if ast.decls else "sid"


def lower(ast, catalog: Catalog, maxmin_criterion: str = "inclusion"):
    """Lower a parsed query to a plan tree, validating names and routing."""
    if isinstance(ast, Compound):
        left = _lower_compound_operand(ast.left, catalog, maxmin_criterion)
        right = _lower_compound_operand(ast.right, catalog, maxmin_criterion)
        if ast.op in ("union", "intersection"):
            return pl.SetCombine(left, right, ast.op)
        return pl.CrossCombine(left, right, ast.op.split()[1])
    return _lower_subset_query(ast, catalog, maxmin_criterion)


def _lower_compound_operand(ast, catalog: Catalog, maxmin_criterion: str):
    if isinstance(ast, Compound):
        return lower(ast, catalog, maxmin_criterion)
    if ast.apply_unary or ast.group_by:
        raise SemanticError(
            "APPLY UNARY and GROUP BY are not allowed on the operands of a compound query"
        )
    if not ast.select_star:
        raise SemanticError("compound query operands must use SELECT *")
    return lower(ast, catalog, maxmin_criterion)


def _lower_subset_query(q: SubsetQuery, catalog: Catalog, maxmin_criterion: str):
    if len({t.lower() for t in q.from_tables}) != len(q.from_tables):
        raise SemanticError("duplicate table in FROM (aliases are not supported)")
    schemas = {}
    for t in q.from_tables:
        schemas[catalog.get(t).name] = catalog.get(t).schema
    decl_sources: list[str] = []
    sid_sources: dict[str, list[str]] = {}
    for table, sid in q.decls:
        canonical = catalog.get(table).name
        if canonical not in schemas:
            raise SemanticError(f"WITH SUBSETS table {table!r} must appear in FROM")
        if canonical in decl_sources:
            raise SemanticError(f"table {table!r} declared twice in WITH SUBSETS")
        decl_sources.append(canonical)
        sid_sources.setdefault(sid, []).append(canonical)

    sources = SourceMap(schemas, sid_sources)

    where_conds = classify_where(q.where, sources) if q.where is not None else {}
    if q.constrained_by is not None:
        classification = classify_constraints(q.constrained_by, sources)
    else:
        classification = classify_constraints(ex.TRUE, sources)

    per_tuple: dict[str, list] = {}
    for src, cond in where_conds.items():
        per_tuple.setdefault(src, []).append(cond)
    for src, cond in classification.per_tuple.items():
        per_tuple.setdefault(src, []).append(cond)

    def rel_node(src: str):
        conds = per_tuple.get(src)
        return pl.TupleSelect(src, ex.conj(conds)) if conds else src

    operands: list[tuple[str, object]] = []
    for src in decl_sources:
        node = pl.PowerSet(rel_node(src))
        bucket = classification.per_subset.get(src)
        if bucket is not None and bucket != ex.TRUE:
            node = pl.ConstraintFilter(node, bucket)
        operands.append((src, node))
    for src in (catalog.get(t).name for t in q.from_tables):
        if src not in decl_sources:
            node = pl.Lift(rel_node(src))
            bucket = classification.per_subset.get(src)
            if bucket is not None and bucket != ex.TRUE:
                node = pl.ConstraintFilter(node, bucket)
            operands.append((src, node))

    remaining = list(classification.join_atoms)
    present = {operands[0][0]}
    current = operands[0][1]
    for src, node in operands[1:]:
        present.add(src)
        attach = [a for a in remaining if a.left.table in present and a.right.table in present]
        remaining = [a for a in remaining if a not in attach]
        if attach:
            current = pl.CrossJoin(current, node, ex.conj([a.to_cmp() for a in attach]))
        else:
            current = pl.CrossProduct(current, node)
    if remaining:
        atom = remaining[0]
        raise SemanticError(f"join condition {atom.to_cmp().render()!r} cannot be placed")

    if q.maxmin:
        current = pl.MaxMinFilter(current, q.maxmin, maxmin_criterion)
    if q.apply_unary:
        current = pl.UnaryCombine(current, q.apply_unary)

    if q.group_by:
        return _lower_group_by(q, current, sources)
    if q.having is not None:
        raise SemanticError("HAVING requires GROUP BY")
    if q.select_star:
        return current
    items = tuple(_lower_select_item(item, sources) for item in q.select_items)
    if any(i.kind == "agg" for i in items) and any(i.kind == "column" for i in items):
        raise SemanticError(
            "cannot mix bare attributes with aggregates in a subset projection"
        )
    return pl.Project(current, items)


def _lower_select_item(item, sources: SourceMap) -> pl.ProjItem:
    if isinstance(item, ex.Agg):
        _validate_agg(item, sources)
        return pl.ProjItem("agg", agg=item)
    if isinstance(item, ex.Column):
        if item.table is None and sources.is_sid(item.name):
            _reject_sid_attr_clash(item.name, sources)
            return pl.ProjItem("sid", name=item.name)
        sources.owner_of(item)
        return pl.ProjItem("column", name=item.render())
    raise SemanticError(f"unsupported select item {item!r}")


def _reject_sid_attr_clash(name: str, sources: SourceMap) -> None:
    for src in sources.source_names():
        try:
            sources.schema_of(src).index_of(name)
        except SemanticError:
            continue
        raise SemanticError(
            f"{name!r} names both a subset id and an attribute; rename the subset id"
        )


def _validate_agg(agg: ex.Agg, sources: SourceMap) -> None:
    if agg.fn not in ex.AGG_FNS:
        raise SemanticError(f"unknown aggregate function {agg.fn!r}")
    arg = agg.arg
    if arg.table is None and sources.is_sid(arg.name):
        if agg.fn != "count":
            raise SemanticError(f"aggregate {agg.render()!r} cannot take a subset id")
        return
    src = sources.owner_of(arg)
    if agg.fn != "count":
        schema = sources.schema_of(src)
        if schema.attr_at(schema.index_of(arg.name)).kind == "str":
            raise SemanticError(f"aggregate {agg.render()!r} over a string attribute")


def _lower_group_by(q: SubsetQuery, child, sources: SourceMap):
    if q.select_star:
        raise SemanticError("GROUP BY requires an explicit select list")
    keys = []
    for k in q.group_by:
        col = ex.Column(*reversed(k.split("."))) if "." in k else ex.Column(k)
        sources.owner_of(col)
        keys.append(k)
    key_set = {k.lower() for k in keys}
    aggs = []
    items = []
    for item in q.select_items:
        if isinstance(item, ex.Agg):
            _validate_agg(item, sources)
            aggs.append(item)
            items.append(pl.ProjItem("agg", agg=item))
        elif isinstance(item, ex.Column):
            if item.table is None and sources.is_sid(item.name):
                items.append(pl.ProjItem("sid", name=item.name))
                continue
            sources.owner_of(item)
            if item.render().lower() not in key_set:
                raise SemanticError(
                    f"select item {item.render()!r} must be a GROUP BY key or an aggregate"
                )
            items.append(pl.ProjItem("column", name=item.render()))
        else:
            raise SemanticError(f"unsupported select item {item!r}")
    if q.having is not None:
        for atom in ex.atoms(q.having):
            for op in (atom.lhs, atom.rhs):
                if isinstance(op, ex.Column):
                    raise SemanticError(
                        f"HAVING condition must use aggregates, found column {op.render()!r}"
                    )
    return pl.GroupBy(child, tuple(keys), tuple(aggs), q.having, tuple(items))
