"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class SubsetSqlError(Exception):
    """Base class for every error raised by this package."""


class LoadError(SubsetSqlError):
    """CSV ingestion failed (missing file, bad arity, unparseable cell)."""


class ParseError(SubsetSqlError):
    """Query text rejected by the lexer or parser."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class SemanticError(SubsetSqlError):
    """Well-formed query that fails validation (unknown names, bad types)."""


class KindError(SemanticError):
    """Comparison or aggregate applied to an incompatible value kind."""


class LimitExceeded(SubsetSqlError):
    """A hard resource limit was hit; results were discarded, not truncated."""

    def __init__(self, limit_name: str, limit_value: int):
        super().__init__(f"limit '{limit_name}' exceeded ({limit_value})")
        self.limit_name = limit_name
        self.limit_value = limit_value
