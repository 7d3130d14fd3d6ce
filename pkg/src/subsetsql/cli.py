"""Command-line interface: batch runner and interactive REPL.

Exit codes: 0 success, 1 usage error, 2 load error, 3 parse/semantic error,
4 limit exceeded. Configuration is explicit flags only; environment variables
are never consulted, so runs are reproducible from the command line alone.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .engine import Catalog, Limits, evaluate
from .errors import LimitExceeded, LoadError, ParseError, SemanticError, SubsetSqlError
from .oracle import oracle_eval
from .relation import load_csv
from .render import render
from .sql import default_sid_label, lower, parse_statements

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LOAD = 2
EXIT_QUERY = 3
EXIT_LIMIT = 4

FORMATS = ("table", "csv", "json")


@dataclass
class SessionConfig:
    tables: dict[str, str] = field(default_factory=dict)  # name -> csv path
    limits: Limits = field(default_factory=Limits)
    fmt: str = "table"
    maxmin_criterion: str = "inclusion"
    use_oracle: bool = False


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the exit codes
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="ssq", description="Subset-query SQL engine")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "execute a query file"), ("repl", "interactive session")):
        p = sub.add_parser(name, help=help_text)
        if name == "run":
            p.add_argument("queryfile", help="file of ';'-terminated queries")
        p.add_argument(
            "--table",
            action="append",
            default=[],
            metavar="NAME=PATH",
            help="register a CSV-backed table (repeatable)",
        )
        p.add_argument("--format", choices=FORMATS, default="table")
        p.add_argument("--max-generated", type=int, default=Limits.max_generated)
        p.add_argument("--max-results", type=int, default=Limits.max_results)
        p.add_argument(
            "--maxmin-criterion", choices=("inclusion", "cardinality"), default="inclusion"
        )
        p.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    return parser


def _config_from_args(args) -> SessionConfig:
    tables = {}
    for spec in args.table:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise _UsageError(f"--table expects NAME=PATH, got {spec!r}")
        if name.lower() in {t.lower() for t in tables}:
            raise _UsageError(f"table {name!r} registered twice")
        tables[name] = path
    try:
        limits = Limits(max_generated=args.max_generated, max_results=args.max_results)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    return SessionConfig(
        tables=tables,
        limits=limits,
        fmt=args.format,
        maxmin_criterion=args.maxmin_criterion,
        use_oracle=args.oracle,
    )


def _load_catalog(config: SessionConfig) -> Catalog:
    catalog = Catalog()
    for name, path in config.tables.items():
        catalog.register(load_csv(path, name))
    return catalog


def _execute(text: str, catalog: Catalog, config: SessionConfig) -> list[str]:
    """Run every statement in the text; rendering happens after evaluation."""
    outputs = []
    for ast in parse_statements(text):
        plan = lower(ast, catalog, config.maxmin_criterion)
        sid_label = default_sid_label(ast)
        if config.use_oracle:
            result = oracle_eval(plan, catalog, sid_label=sid_label)
        else:
            result = evaluate(plan, catalog, config.limits, sid_label=sid_label)
        outputs.append(render(result, config.fmt))
    return outputs


def _exit_code_for(exc: SubsetSqlError) -> int:
    if isinstance(exc, LoadError):
        return EXIT_LOAD
    if isinstance(exc, LimitExceeded):
        return EXIT_LIMIT
    return EXIT_QUERY


def run_batch(config: SessionConfig, queryfile: str, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        catalog = _load_catalog(config)
    except SubsetSqlError as exc:
        print(f"error: {exc}", file=err)
        return _exit_code_for(exc)
    try:
        with open(queryfile, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"error: cannot read {queryfile}: {exc}", file=err)
        return EXIT_LOAD
    try:
        outputs = _execute(text, catalog, config)
    except SubsetSqlError as exc:
        print(f"error: {exc}", file=err)
        return _exit_code_for(exc)
    print("\n\n".join(outputs), end="\n" if outputs else "", file=out)
    return EXIT_OK


def repl(config: SessionConfig, stdin=None, stdout=None) -> int:
    fin = stdin or sys.stdin
    out = stdout or sys.stdout
    catalog = Catalog()
    for name, path in config.tables.items():
        try:
            catalog.register(load_csv(path, name))
        except SubsetSqlError as exc:
            print(f"error: {exc}", file=out)
    buffer = ""
    while True:
        out.write("ssq> " if not buffer else "...> ")
        out.flush()
        line = fin.readline()
        if not line:
            out.write("\n")
            return EXIT_OK
        stripped = line.strip()
        if not buffer and stripped.startswith("\\"):
            if _meta(stripped, catalog, config, out):
                return EXIT_OK
            continue
        buffer += line
        if not buffer.strip():
            buffer = ""
            continue
        if buffer.strip().endswith(";"):
            try:
                for block in _execute(buffer, catalog, config):
                    out.write(block + "\n")
            except SubsetSqlError as exc:
                out.write(f"error: {exc}\n")
            buffer = ""


def _meta(command: str, catalog: Catalog, config: SessionConfig, out) -> bool:
    """Handle a backslash command; returns True when the session should end."""
    parts = command.split()
    name = parts[0]
    if name == "\\quit":
        return True
    if name == "\\tables":
        for table in catalog.names():
            out.write(table + "\n")
        return False
    if name == "\\limits":
        lim = config.limits
        out.write(
            f"max_generated={lim.max_generated} max_results={lim.max_results} "
            f"naive_cap={lim.naive_cap}\n"
        )
        return False
    if name == "\\format":
        if len(parts) != 2 or parts[1] not in FORMATS:
            out.write(f"usage: \\format {{{'|'.join(FORMATS)}}}\n")
            return False
        config.fmt = parts[1]
        return False
    if name == "\\load":
        if len(parts) != 3:
            out.write("usage: \\load <name> <path>\n")
            return False
        try:
            catalog.register(load_csv(parts[2], parts[1]))
            out.write(f"loaded {parts[1]}\n")
        except SubsetSqlError as exc:
            out.write(f"error: {exc}\n")
        return False
    out.write(f"unknown command {name}; try \\load \\tables \\limits \\format \\quit\n")
    return False


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = _config_from_args(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "run":
        return run_batch(config, args.queryfile)
    return repl(config)


if __name__ == "__main__":
    sys.exit(main())
