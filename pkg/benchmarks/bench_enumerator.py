"""Benchmark the compiled enumeration kernel against the pure-Python fallback.

Usage: python benchmarks/bench_enumerator.py [--rows N] [--repeat K]

Workloads cover the pruning-friendly case (tight monotone sum bound), a
cardinality-bounded scan, and a non-monotone condition that forces full
expansion with post-filtering. Both kernels must return identical families
and identical node counts; the benchmark asserts that before timing.
"""

from __future__ import annotations

import argparse
import random
import time

from subsetsql import expr as ex
from subsetsql.enumerator import Limits, compiled_kernel_available, enumerate_subsets_ex
from subsetsql.relation import Attr, Relation, Row, Schema


def fixture(rows: int, seed: int = 7) -> Relation:
    rng = random.Random(seed)
    schema = Schema((Attr("Weight", "int"), Attr("Price", "int")))
    data = tuple(
        Row(i, (rng.randint(3, 80), rng.randint(1, 99))) for i in range(rows)
    )
    return Relation("Bench", schema, data)


def agg(fn: str, attr: str):
    return ex.Agg(fn, ex.Column(attr))


def workloads(rel: Relation):
    weights = sorted(r.values[0] for r in rel.rows)
    tight = sum(weights[:6])
    mid = sum(weights) // 3
    return [
        (
            "tight sum upper bound",
            ex.Cmp(agg("sum", "Weight"), "<", ex.Literal(tight)),
        ),
        (
            "sum window + cardinality",
            ex.And(
                (
                    ex.Cmp(agg("sum", "Weight"), ">", ex.Literal(mid)),
                    ex.Cmp(agg("sum", "Weight"), "<", ex.Literal(mid + 40)),
                    ex.Cmp(agg("count", ex.Column("sid")), "<=", ex.Literal(5)),
                )
            ),
        ),
        (
            "non-monotone (avg or-clause)",
            ex.And(
                (
                    ex.Cmp(agg("count", ex.Column("sid")), "<=", ex.Literal(4)),
                    ex.Or(
                        (
                            ex.Cmp(agg("avg", "Price"), ">", ex.Literal(80)),
                            ex.Cmp(agg("min", "Weight"), ">", ex.Literal(60)),
                        )
                    ),
                )
            ),
        ),
    ]


def run(rel: Relation, cond, kernel: str, repeat: int, limits: Limits):
    best = float("inf")
    fam = stats = None
    for _ in range(repeat):
        start = time.perf_counter()
        fam, stats = enumerate_subsets_ex(rel, cond, limits=limits, kernel=kernel)
        best = min(best, time.perf_counter() - start)
    return fam, stats, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=22)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rel = fixture(args.rows)
    limits = Limits(max_generated=2**27, max_results=2**22)
    kernels = ["python"] + (["compiled"] if compiled_kernel_available() else [])
    if len(kernels) == 1:
        print("compiled kernel not built; benchmarking the Python kernel only")

    header = f"{'workload':32} {'kernel':9} {'nodes':>12} {'results':>9} {'best (s)':>10}"
    print(f"rows = {args.rows}, repeat = {args.repeat}")
    print(header)
    print("-" * len(header))
    for name, cond in workloads(rel):
        timings = {}
        outcomes = {}
        for kernel in kernels:
            fam, stats, best = run(rel, cond, kernel, args.repeat, limits)
            timings[kernel] = best
            outcomes[kernel] = (fam.member_lists(), stats.nodes_explored)
            print(
                f"{name:32} {kernel:9} {stats.nodes_explored:>12} "
                f"{len(fam):>9} {best:>10.4f}"
            )
        if len(kernels) == 2:
            assert outcomes["python"] == outcomes["compiled"], name
            speedup = timings["python"] / timings["compiled"]
            print(f"{'':32} {'speedup':9} {speedup:>33.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
