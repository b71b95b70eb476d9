"""Exact evaluation of the product bound, the sufficient n0 thresholds, and the scan."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Sequence

from . import search
from .cache import ResultCache, problem_key
from .compositions import CompositionSpace
from .io import result_from_json, result_to_json


def binomial(a: int, b: int) -> int:
    if b < 0 or a < 0 or b > a:
        return 0
    return comb(a, b)


def theorem_rhs(spaces: Sequence[tuple[int, int]], t: int) -> int:
    """Product over j of C(n_j + l_j - t - 1, l_j - t - 1): the size of the star systems."""
    p = 1
    for n, l in spaces:
        p *= binomial(n + l - t - 1, l - t - 1)
    return p


@dataclass(frozen=True)
class BoundReport:
    per_case_thresholds: dict[str, int]
    rhs: int | None = None

    @property
    def paper_n0(self) -> int:
        return max(self.per_case_thresholds.values())


def paper_n0(ls: Sequence[int], t: int, ns: Sequence[int] | None = None) -> BoundReport:
    """Sufficient (not tight) n0 from the two explicit thresholds of the r = 2 argument.

    For each family j:
      case1_j = ((l_j - t - 1) * C(l, t)^2)^2      (small-slice case)
      case3_j = (2(l - t))^(2^(l_j - t - 1)) + 1   (independent-set case)
    with l = min(ls).  n0 is the maximum of all of them.  Passing ``ns`` also
    fills in the product bound for those totals.
    """
    ls = list(ls)
    if len(ls) < 2:
        raise ValueError("need at least two part counts")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    l = min(ls)
    if l < t + 2:
        raise ValueError(f"need min(ls) = {l} >= t + 2 = {t + 2}")
    cases: dict[str, int] = {}
    for j, lj in enumerate(ls, start=1):
        cases[f"case1_{j}"] = ((lj - t - 1) * comb(l, t) ** 2) ** 2
        cases[f"case3_{j}"] = (2 * (l - t)) ** (2 ** (lj - t - 1)) + 1
    rhs = None
    if ns is not None:
        ns = list(ns)
        if len(ns) != len(ls):
            raise ValueError(f"{len(ns)} totals for {len(ls)} part counts")
        rhs = theorem_rhs(list(zip(ns, ls)), t)
    return BoundReport(cases, rhs)


def pairwise_combination_holds(
    general_product: int, pairwise_maxima: Mapping[tuple[int, int], int], r: int
) -> bool:
    """general^(r-1) <= product of the pairwise maxima over all i < j."""
    expected = {(i, j) for i in range(r) for j in range(i + 1, r)}
    if set(pairwise_maxima) != expected:
        raise ValueError(f"need pairwise maxima for exactly the pairs {sorted(expected)}")
    rhs = 1
    for value in pairwise_maxima.values():
        rhs *= value
    return general_product ** (r - 1) <= rhs


@dataclass(frozen=True)
class ScanRow:
    n: int
    max_product: int
    star_bound: int
    equals_star: bool
    unique_star: bool
    T_observed: tuple[frozenset[int], ...] = field(default=())
    optimal: bool = True
    nodes: int = 0


def scan_row(
    n: int,
    l1: int,
    l2: int,
    t: int,
    budget: int = search.DEFAULT_NODE_BUDGET,
    cache: ResultCache | None = None,
    workers: int = 1,
) -> ScanRow:
    spaces = (CompositionSpace(n, l1), CompositionSpace(n, l2))
    problem = search.SearchProblem(spaces, t, node_budget=budget)
    key = problem_key("max_product_r2", spaces, t, budget, search.ALGORITHM_VERSION,
                      all_maximizers=True)
    stored = cache.get(key) if cache is not None else None
    if stored is not None:
        result = result_from_json(stored)
    else:
        result = search.max_product_r2(problem, all_maximizers=True, workers=workers)
        if cache is not None:
            cache.put(key, result_to_json(result))

    star = theorem_rhs([(n, l1), (n, l2)], t)
    if result.optimal:
        report = search.verify_extremal(result, t)
        observed = tuple(T for T in report.T_observed if T is not None)
        equals = result.product == star
        unique = equals and report.unique
    else:
        observed, equals, unique = (), False, False
    return ScanRow(n, result.product, star, equals, unique, observed,
                   result.optimal, result.nodes_explored)


def scan_threshold(
    l1: int,
    l2: int,
    t: int,
    n_min: int,
    n_max: int,
    budget: int = search.DEFAULT_NODE_BUDGET,
    cache: ResultCache | None = None,
    workers: int = 1,
) -> list[ScanRow]:
    """Exact r = 2 maxima on P(n, l1) x P(n, l2) for n = n_min .. n_max."""
    if min(l1, l2) < t + 2:
        raise ValueError(f"need min(l1, l2) >= t + 2, got l1={l1}, l2={l2}, t={t}")
    if n_min < 0 or n_max < n_min:
        raise ValueError(f"bad n range [{n_min}, {n_max}]")
    return [scan_row(n, l1, l2, t, budget, cache, workers) for n in range(n_min, n_max + 1)]


def empirical_threshold(rows: Sequence[ScanRow]) -> int | None:
    """Least scanned n, among rows proven optimal, where the stars are the unique maximisers."""
    for row in rows:
        if row.optimal and row.equals_star and row.unique_star:
            return row.n
    return None
