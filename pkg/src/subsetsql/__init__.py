"""subsetsql: an in-memory engine for subset queries over CSV-loaded tables.

Subset queries return relations of subsets: families of row sets satisfying
per-tuple filters and aggregate constraints, queried through an extended SQL
dialect (WITH SUBSETS / CONSTRAINED BY / APPLY UNARY / MAXIMAL ...) or the
operator API re-exported here.
"""

from .engine import Catalog, Limits, QueryResult, evaluate, evaluate_family
from .enumerator import (
    EnumerationStats,
    compiled_kernel_available,
    enumerate_subsets,
    enumerate_subsets_ex,
)
from .errors import (
    KindError,
    LimitExceeded,
    LoadError,
    ParseError,
    SemanticError,
    SubsetSqlError,
)
from .families import (
    RelationOfSubsets,
    constraint_filter,
    cross_combine,
    cross_join,
    cross_product,
    lift,
    maxmin_filter,
    power_set,
    rs_complement,
    rs_equal,
    rs_group_by,
    rs_project,
    rs_set_combine,
    rs_tuple_select,
    unary_combine,
    validate_family,
)
from .relation import Attr, Relation, Row, Schema, load_csv, to_csv, tuple_project, tuple_select
from .render import render
from .sql import default_sid_label, lower, parse, parse_statements, render_ast, tokenize
from .subsets import (
    BaseExtension,
    Subset,
    base_of,
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
from .values import Dec

__version__ = "0.1.0"
