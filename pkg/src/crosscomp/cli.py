"""Command-line entry point: ``crosscomp <verb> ...``.

Exit status: 0 success, 1 a checked property does not hold, 2 bad arguments
or malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from . import bounds, search
from .cache import CACHE_ENV, ResultCache, problem_key
from .compositions import CompositionSpace, format_composition, parse_composition
from .families import Family, FamilySystem, is_cross_t_intersecting, make_star
from .independence import (
    DEFAULT_NODE_BUDGET as MIS_BUDGET,
    dichotomy_check,
    greedy_independent,
    max_independent,
)
from .io import (
    FormatError,
    dumps,
    family_from_json,
    family_to_json,
    format_tsets,
    result_from_json,
    result_to_json,
    scan_to_csv,
    system_from_json,
    system_to_json,
)

log = logging.getLogger("crosscomp")


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _space(text: str) -> tuple[int, int]:
    try:
        n, l = text.split(":")
        return int(n), int(l)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a space as n:l, got {text!r}")


def _spaces(text: str) -> list[tuple[int, int]]:
    return [_space(part) for part in text.split(",") if part.strip()]


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON ({e})")


def _emit(out, fmt: str, data, text_lines: Sequence[str]):
    if fmt == "json":
        out.write(dumps(data))
    else:
        out.write("\n".join(text_lines) + "\n")


def _make_cache(args) -> ResultCache | None:
    directory = args.cache if args.cache is not None else os.environ.get(CACHE_ENV)
    return ResultCache(directory) if directory else None


# --------------------------------------------------------------------------
# verbs


def cmd_space(args, out) -> int:
    n, l = args.space
    from .compositions import count_compositions

    count = count_compositions(n, l)
    data = {"n": n, "l": l, "count": str(count)}
    lines = [f"|P({n},{l})| = {count}"]
    if not args.count_only:
        space = CompositionSpace(n, l)
        data["elements"] = [list(u) for u in space]
        lines += [f"{k}\t{format_composition(u)}" for k, u in enumerate(space)]
    _emit(out, args.format, data, lines)
    return 0


def cmd_star(args, out) -> int:
    T = args.T
    fams = tuple(make_star(CompositionSpace(n, l), T) for n, l in args.spaces)
    if len(fams) == 1:
        f = fams[0]
        _emit(out, args.format, family_to_json(f),
              [f"star T={format_tsets([T])} in {f.space}: size {f.size}"]
              + [format_composition(u) for u in f.members()])
        return 0
    t = args.t if args.t is not None else len(T)
    system = FamilySystem(fams, t)
    _emit(out, args.format, system_to_json(system),
          [f"star system T={format_tsets([T])}, t={t}, r={len(fams)}"]
          + [f"{f.space}: size {f.size}" for f in fams])
    return 0


def cmd_check(args, out) -> int:
    system = system_from_json(_load_json(args.system))
    ok, witness = is_cross_t_intersecting(system)
    data = {"cross_t_intersecting": ok, "t": system.t, "r": system.r,
            "witness": None if witness is None else [list(u) for u in witness]}
    lines = [f"cross-{system.t}-intersecting: {str(ok).lower()}"]
    if witness is not None:
        lines.append("witness: " + " ".join(format_composition(u) for u in witness))
    _emit(out, args.format, data, lines)
    return 0 if ok else 1


def _problem(args) -> search.SearchProblem:
    return search.SearchProblem(
        tuple(CompositionSpace(n, l) for n, l in args.spaces), args.t,
        node_budget=args.budget_nodes,
    )


def _cached_run(args, kind: str, problem, compute):
    cache = _make_cache(args)
    key = problem_key(kind, problem.spaces, problem.t, problem.node_budget,
                      search.ALGORITHM_VERSION, all_maximizers=args.all_maximizers)
    if cache is not None:
        stored = cache.get(key)
        if stored is not None:
            return result_from_json(stored)
    result = compute()
    if cache is not None:
        cache.put(key, result_to_json(result))
    return result


def _result_lines(result) -> list[str]:
    lines = [f"product={result.product}", f"optimal={str(result.optimal).lower()}",
             f"nodes={result.nodes_explored}"]
    for j, f in enumerate(result.witnesses, start=1):
        lines.append(f"A{j} ({f.space}, size {f.size}): "
                     + " ".join(format_composition(u) for u in f.members()))
    if result.all_maximizers is not None:
        lines.append(f"maximizers={len(result.all_maximizers)}")
    return lines


def cmd_search(args, out) -> int:
    problem = _problem(args)
    algorithm = args.algorithm
    if algorithm == "auto":
        algorithm = "r2" if problem.r == 2 else "general"
    if algorithm == "r2":
        compute = lambda: search.max_product_r2(problem, args.all_maximizers, args.workers)  # noqa: E731
    else:
        compute = lambda: search.max_product_general(problem, args.all_maximizers)  # noqa: E731
    result = _cached_run(args, f"search-{algorithm}", problem, compute)
    _emit(out, args.format, result_to_json(result), _result_lines(result))
    return 0


def cmd_oracle(args, out) -> int:
    problem = _problem(args)
    result = _cached_run(args, "oracle", problem,
                         lambda: search.brute_oracle(problem, args.all_maximizers))
    _emit(out, args.format, result_to_json(result), _result_lines(result))
    return 0


def cmd_scan(args, out) -> int:
    if len(args.ls) != 2:
        raise UsageError("scan takes exactly two part counts, e.g. --ls 3,3")
    l1, l2 = args.ls
    rows = bounds.scan_threshold(l1, l2, args.t, args.n_min, args.n_max,
                                 args.budget_nodes, _make_cache(args), args.workers)
    threshold = bounds.empirical_threshold(rows)
    if args.format == "csv":
        out.write(scan_to_csv(rows))
        return 0
    data = {
        "l1": l1, "l2": l2, "t": args.t,
        "empirical_threshold": threshold,
        "rows": [
            {"n": r.n, "max_product": str(r.max_product), "star_bound": str(r.star_bound),
             "equals_star": r.equals_star, "unique_star": r.unique_star,
             "T_observed": [sorted(T) for T in r.T_observed], "optimal": r.optimal,
             "nodes": r.nodes}
            for r in rows
        ],
    }
    lines = [f"n={r.n} max={r.max_product} star={r.star_bound} "
             f"equals_star={str(r.equals_star).lower()} unique_star={str(r.unique_star).lower()} "
             f"T={format_tsets(r.T_observed)}" for r in rows]
    lines.append(f"empirical_threshold={threshold}")
    _emit(out, args.format, data, lines)
    return 0


def cmd_bound(args, out) -> int:
    if args.ns is not None and len(args.ns) != len(args.ls):
        raise UsageError(f"--ns has {len(args.ns)} entries, --ls has {len(args.ls)}")
    report = bounds.paper_n0(args.ls, args.t, args.ns)
    data = {
        "rhs": None if report.rhs is None else str(report.rhs),
        "paper_n0": str(report.paper_n0),
        "per_case_thresholds": {k: str(v) for k, v in report.per_case_thresholds.items()},
    }
    lines = []
    if report.rhs is not None:
        lines.append(f"rhs={report.rhs}")
    lines.append(f"paper_n0={report.paper_n0}")
    lines += [f"{k}={v}" for k, v in report.per_case_thresholds.items()]
    _emit(out, args.format, data, lines)
    return 0


def cmd_independent(args, out) -> int:
    family = family_from_json(_load_json(args.family))
    if args.method == "greedy":
        result, optimal = greedy_independent(family), False
    else:
        result, optimal = max_independent(family, args.budget_nodes)
    data = dict(family_to_json(result), size=result.size, optimal=optimal, method=args.method)
    lines = [f"size={result.size} method={args.method} optimal={str(optimal).lower()}"]
    lines += [format_composition(u) for u in result.members()]
    _emit(out, args.format, data, lines)
    return 0


def cmd_dichotomy(args, out) -> int:
    family = family_from_json(_load_json(args.family))
    v = parse_composition(args.v)
    verdict = dichotomy_check(family, v, args.xs, args.ys, args.t, args.budget_nodes)
    _emit(out, args.format, {"verdict": verdict.value}, [verdict.value])
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosscomp",
        description="Cross t-intersecting families of weak compositions.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, func, help, formats=("text", "json")):
        p = sub.add_parser(name, help=help, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--format", choices=formats, default=formats[0])
        p.set_defaults(func=func)
        return p

    def add_search_opts(p, budget=search.DEFAULT_NODE_BUDGET):
        p.add_argument("--budget-nodes", type=int, default=budget,
                       help="node budget (per top-level branch for the r=2 search)")
        p.add_argument("--cache", default=None,
                       help=f"result cache directory (default: ${CACHE_ENV} if set)")

    p = add("space", cmd_space, "count and enumerate P(n,l)")
    p.add_argument("--space", type=_space, required=True, help="n:l")
    p.add_argument("--count-only", action="store_true")

    p = add("star", cmd_star, "build star families (zero on T)")
    p.add_argument("--spaces", type=_spaces, required=True,
                   help="one n:l for a family file, several for a system file")
    p.add_argument("--T", type=_ints, required=True, help="comma-separated coordinates, 1-based")
    p.add_argument("--t", type=int, default=None, help="system threshold (default |T|)")

    p = add("check", cmd_check, "test a system file for the cross t-intersecting property")
    p.add_argument("--system", required=True)

    p = add("search", cmd_search, "exact maximum product search")
    p.add_argument("--spaces", type=_spaces, required=True, help="n1:l1,n2:l2,...")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--algorithm", choices=("auto", "r2", "general"), default="auto")
    p.add_argument("--all-maximizers", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    add_search_opts(p)

    p = add("oracle", cmd_oracle, "exhaustive maximum product (micro instances)")
    p.add_argument("--spaces", type=_spaces, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--all-maximizers", action="store_true")
    add_search_opts(p)

    p = add("scan", cmd_scan, "empirical threshold scan over n", formats=("text", "json", "csv"))
    p.add_argument("--ls", type=_ints, required=True, help="l1,l2")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    add_search_opts(p)

    p = add("bound", cmd_bound, "product bound and sufficient n0")
    p.add_argument("--ls", type=_ints, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--ns", type=_ints, default=None)

    p = add("independent", cmd_independent, "extract an independent subfamily")
    p.add_argument("--family", required=True)
    p.add_argument("--method", choices=("exact", "greedy"), default="exact")
    p.add_argument("--budget-nodes", type=int, default=MIS_BUDGET)

    p = add("dichotomy", cmd_dichotomy, "decide the slice dichotomy for a family and a composition")
    p.add_argument("--family", required=True)
    p.add_argument("--v", required=True, help="composition, e.g. (0,2,3)")
    p.add_argument("--xs", type=_ints, required=True)
    p.add_argument("--ys", type=_ints, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--budget-nodes", type=int, default=MIS_BUDGET)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except (UsageError, FormatError, ValueError) as e:
        print(f"crosscomp {args.verb}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
