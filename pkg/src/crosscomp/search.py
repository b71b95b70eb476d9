"""Exact maximum-product search over r-cross t-intersecting systems.

For two families the compatibility relation u ~ v  <=>  |I(u, v)| >= t is a
bipartite relation, and every positive-product maximiser is a closed pair
(A1, A2) with A2 = comp(A1) and A1 = comp(A2).  ``max_product_r2`` walks those
closed pairs Close-by-One style with a product bound.  ``max_product_general``
handles any r by branching on membership decisions; ``brute_oracle`` is the
exhaustive reference both are checked against.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .compositions import CompositionSpace, agree_set
from .families import (
    Family,
    agreeing_mask,
    iter_bits,
    make_star,
    partner_masks,
    value_masks,
)

ALGORITHM_VERSION = "1"
DEFAULT_NODE_BUDGET = 5_000_000
ORACLE_LIMIT_R2 = 20
ORACLE_LIMIT_MULTI = 12


@dataclass(frozen=True)
class SearchProblem:
    spaces: tuple[CompositionSpace, ...]
    t: int
    node_budget: int = DEFAULT_NODE_BUDGET
    # cardinality caps for the spaces whose subsets get enumerated; None = default
    micro_limits: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "spaces", tuple(self.spaces))
        if len(self.spaces) < 2:
            raise ValueError("need at least two spaces")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if self.node_budget < 1:
            raise ValueError("node_budget must be positive")
        if self.micro_limits is not None:
            object.__setattr__(self, "micro_limits", tuple(self.micro_limits))

    @classmethod
    def of(cls, spaces: Sequence[tuple[int, int]], t: int, **kw) -> "SearchProblem":
        return cls(tuple(CompositionSpace(n, l) for n, l in spaces), t, **kw)

    @property
    def r(self) -> int:
        return len(self.spaces)

    @property
    def l(self) -> int:
        return min(s.l for s in self.spaces)

    @property
    def limits(self) -> tuple[int, ...]:
        """Caps on the first r - 1 spaces (the last family is always completed)."""
        if self.micro_limits is not None:
            return self.micro_limits
        cap = ORACLE_LIMIT_R2 if self.r == 2 else ORACLE_LIMIT_MULTI
        return (cap,) * (self.r - 1)

    def within_limits(self) -> bool:
        return all(s.cardinality <= cap for s, cap in zip(self.spaces, self.limits))

    def star_product(self) -> int:
        if self.l < self.t:
            return 0
        p = 1
        for s in self.spaces:
            p *= make_star(s, range(1, self.t + 1)).size
        return p


@dataclass
class SearchResult:
    product: int
    witnesses: tuple[Family, ...]
    optimal: bool
    nodes_explored: int
    all_maximizers: list[tuple[Family, ...]] | None = field(default=None)


def _empty_result(problem: SearchProblem, optimal: bool, nodes: int, collect: bool) -> SearchResult:
    empties = tuple(Family(s) for s in problem.spaces)
    return SearchResult(0, empties, optimal, nodes, [empties] if collect else None)


def _star_fallback(problem: SearchProblem, nodes: int, collect: bool) -> SearchResult:
    """Common-T star system for T = {1..t}; feasible whenever l >= t."""
    stars = tuple(make_star(s, range(1, problem.t + 1)) for s in problem.spaces)
    return SearchResult(problem.star_product(), stars, False, nodes, [stars] if collect else None)


def _extent_key(mask: int) -> tuple[int, ...]:
    return tuple(iter_bits(mask))


# --------------------------------------------------------------------------
# compatibility sets and the two-family closure


def compat_set(
    spaces: Sequence[CompositionSpace], target: int, chosen: Sequence[Family | None], t: int
) -> Family:
    """Elements of ``spaces[target]`` that complete every tuple of chosen members.

    ``chosen[target]`` is ignored.  If another family has no chosen members
    there are no tuples to complete and the whole space qualifies.
    """
    if not 0 <= target < len(spaces):
        raise ValueError(f"target index {target} out of range")
    space = spaces[target]
    others = [chosen[k] for k in range(len(spaces)) if k != target]
    if any(f is None or not f for f in others):
        return Family.full(space)
    l = min(s.l for s in spaces)
    # distinct agreement patterns over the other families' chosen members
    first, *rest = others
    patterns = {tuple((i, u[i]) for i in range(l)) for u in first.members()}
    for f in rest:
        members = f.members()
        patterns = {tuple((i, a) for i, a in p if u[i] == a) for p in patterns for u in members}
    masks = value_masks(space, l)
    allowed = (1 << space.cardinality) - 1
    for p in sorted(patterns):
        allowed &= agreeing_mask(masks, p, t)
        if not allowed:
            break
    return Family(space, allowed)


class _Relation:
    """Compatibility rows between two spaces, both directions, as bit-masks."""

    def __init__(self, left: CompositionSpace, right: CompositionSpace, t: int):
        self.left, self.right = left, right
        l = min(left.l, right.l)
        self.rows1 = partner_masks(left, right, t, l)
        self.rows2 = partner_masks(right, left, t, l)
        self.full1 = (1 << left.cardinality) - 1
        self.full2 = (1 << right.cardinality) - 1

    def comp2(self, mask1: int) -> int:
        out = self.full2
        for k in iter_bits(mask1):
            out &= self.rows1[k]
        return out

    def comp1(self, mask2: int) -> int:
        out = self.full1
        for k in iter_bits(mask2):
            out &= self.rows2[k]
        return out


@lru_cache(maxsize=32)
def _relation(left: CompositionSpace, right: CompositionSpace, t: int) -> _Relation:
    return _Relation(left, right, t)


def closure_r2(problem: SearchProblem, S: Family) -> tuple[Family, Family]:
    """Return (comp2(S), comp1(comp2(S))) for S in the first space."""
    if problem.r != 2:
        raise ValueError("closure_r2 needs exactly two spaces")
    if S.space != problem.spaces[0]:
        raise ValueError(f"S lives in {S.space}, expected {problem.spaces[0]}")
    rel = _relation(problem.spaces[0], problem.spaces[1], problem.t)
    polar = rel.comp2(S.mask)
    return Family(rel.right, polar), Family(rel.left, rel.comp1(polar))


# --------------------------------------------------------------------------
# two families: closed-pair enumeration


class _Best:
    """Running maximum with deterministic tie handling."""

    def __init__(self, floor: int, collect: bool):
        self.threshold = max(floor, 1)
        self.product = 0
        self.extents: list[int] = []
        self.collect = collect

    def offer(self, extent: int, p: int):
        if p < self.threshold:
            return
        if p > self.product:
            self.product = p
            self.threshold = p
            self.extents = [extent]
        elif p == self.product:
            if self.collect:
                self.extents.append(extent)
            elif _extent_key(extent) < _extent_key(self.extents[0]):
                self.extents = [extent]


def _cbo_branch(rel: _Relation, extent: int, intent: int, start: int, best: _Best, budget: int):
    """Depth-first Close-by-One below a canonical concept.  Returns (nodes, exhausted)."""
    n1 = rel.left.cardinality
    rows1 = rel.rows1
    nodes = 0
    exhausted = False

    def visit(extent: int, intent: int, start: int):
        nonlocal nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        ext_size = extent.bit_count()
        best.offer(extent, ext_size * intent.bit_count())

        # members that could still join without emptying the polar
        addable = []
        for j in range(start, n1):
            if extent >> j & 1:
                continue
            s = (intent & rows1[j]).bit_count()
            if s:
                addable.append((j, s))
        if not addable:
            return
        if (ext_size + len(addable)) * max(s for _, s in addable) < best.threshold:
            return
        for pos, (j, s) in enumerate(addable):
            if (ext_size + len(addable) - pos) * s < best.threshold:
                continue
            new_intent = intent & rows1[j]
            new_extent = rel.comp1(new_intent)
            low = (1 << j) - 1
            if (new_extent ^ extent) & low:
                continue
            visit(new_extent, new_intent, j + 1)
            if exhausted:
                return

    visit(extent, intent, start)
    return nodes, exhausted


def _root(rel: _Relation) -> tuple[int, int]:
    intent = rel.full2
    return rel.comp1(intent), intent


def _top_branches(rel: _Relation) -> list[int]:
    """Indices j whose single-step extension of the root concept is canonical."""
    extent, intent = _root(rel)
    out = []
    for j in range(rel.left.cardinality):
        if extent >> j & 1:
            continue
        new_intent = intent & rel.rows1[j]
        if not new_intent:
            continue
        new_extent = rel.comp1(new_intent)
        if (new_extent ^ extent) & ((1 << j) - 1):
            continue
        out.append(j)
    return out


def _run_top_branch(args) -> tuple[int, list[int], int, bool]:
    left, right, t, j, floor, collect, budget = args
    rel = _relation(left, right, t)
    extent, intent = _root(rel)
    new_intent = intent & rel.rows1[j]
    new_extent = rel.comp1(new_intent)
    best = _Best(floor, collect)
    nodes, exhausted = _cbo_branch(rel, new_extent, new_intent, j + 1, best, budget)
    return best.product, best.extents, nodes, exhausted


def max_product_r2(
    problem: SearchProblem, all_maximizers: bool = False, workers: int = 1
) -> SearchResult:
    """Exact max of |A1| * |A2| over 2-cross t-intersecting pairs.

    The search tree below each canonical child of the root concept is an
    independent unit with its own ``node_budget``; units share only the star
    lower bound, so results (node counts included) do not depend on how the
    units are scheduled across ``workers``.
    """
    if problem.r != 2:
        raise ValueError("max_product_r2 needs exactly two spaces")
    left, right = problem.spaces
    rel = _relation(left, right, problem.t)
    floor = problem.star_product()

    root_best = _Best(floor, all_maximizers)
    root_extent, root_intent = _root(rel)
    root_best.offer(root_extent, root_extent.bit_count() * root_intent.bit_count())

    jobs = [
        (left, right, problem.t, j, floor, all_maximizers, problem.node_budget)
        for j in _top_branches(rel)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_top_branch, jobs))
    else:
        outcomes = [_run_top_branch(job) for job in jobs]

    nodes = 1
    exhausted = False
    product = root_best.product
    extents = list(root_best.extents)
    for p, exts, n, ex in outcomes:
        nodes += n
        exhausted = exhausted or ex
        if p > product:
            product, extents = p, list(exts)
        elif p == product and p > 0:
            extents.extend(exts)

    if product < floor:
        return _star_fallback(problem, nodes, all_maximizers)
    if product == 0:
        return _empty_result(problem, not exhausted, nodes, all_maximizers)
    extents.sort(key=_extent_key)
    systems = [
        (Family(left, e), Family(right, rel.comp2(e))) for e in extents
    ]
    return SearchResult(
        product,
        systems[0],
        not exhausted,
        nodes,
        systems if all_maximizers else None,
    )


# --------------------------------------------------------------------------
# any number of families: membership branch-and-bound


class _TupleMasks:
    """Lazily computed masks over the last space, one per tuple of earlier members."""

    def __init__(self, spaces: Sequence[CompositionSpace], t: int):
        self.spaces = spaces
        self.t = t
        self.l = min(s.l for s in spaces)
        self.last_masks = value_masks(spaces[-1], self.l)
        self.cache: dict[tuple[int, ...], int] = {}

    def get(self, ranks: tuple[int, ...]) -> int:
        m = self.cache.get(ranks)
        if m is None:
            us = [s.elements[k] for s, k in zip(self.spaces, ranks)]
            first = us[0]
            common = [
                (i, first[i]) for i in range(self.l) if all(u[i] == first[i] for u in us[1:])
            ]
            m = agreeing_mask(self.last_masks, common, self.t)
            self.cache[ranks] = m
        return m

    def through(self, family: int, rank: int, inc: list[int]) -> int:
        """AND of masks of all tuples that use ``rank`` in ``family`` and ``inc`` elsewhere."""
        pools = [
            [rank] if f == family else list(iter_bits(inc[f])) for f in range(len(inc))
        ]
        out = -1
        for combo in itertools.product(*pools):
            out &= self.get(combo)
            if not out:
                break
        return out


def max_product_general(problem: SearchProblem, all_maximizers: bool = False) -> SearchResult:
    """Exact max of the product over r-cross t-intersecting systems, any r >= 2.

    Membership of each element of the first r - 1 spaces is decided in a
    round-robin rank order; the last family is always the full compatible set
    of the decided ones.  After every inclusion the undecided candidates of
    the other families are filtered to those that keep the last family
    non-empty.  Exactness is claimed only within the problem's micro limits.
    """
    spaces = problem.spaces
    r = problem.r
    d = r - 1
    tm = _TupleMasks(spaces, problem.t)
    full_last = (1 << spaces[-1].cardinality) - 1
    order = [
        (f, k)
        for k in range(max(s.cardinality for s in spaces[:d]))
        for f in range(d)
        if k < spaces[f].cardinality
    ]
    best = _Best(problem.star_product(), all_maximizers)
    found: dict[tuple[int, ...], None] = {}
    nodes = 0
    exhausted = False
    budget = problem.node_budget

    def key(incs: tuple[int, ...]) -> tuple:
        return tuple(_extent_key(m) for m in incs)

    def record(inc: list[int], allowed: int):
        p = allowed.bit_count()
        for m in inc:
            p *= m.bit_count()
        if p < best.threshold or p == 0:
            return
        sig = tuple(inc)
        if p > best.product:
            best.product = p
            best.threshold = p
            found.clear()
            found[sig] = None
        elif all_maximizers or not found or key(sig) < key(next(iter(found))):
            if not all_maximizers:
                found.clear()
            found[sig] = None

    def visit(pos: int, inc: list[int], cand: list[int], allowed: int):
        nonlocal nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if all(inc) and not allowed:
            return
        bound = allowed.bit_count()
        for f in range(d):
            bound *= (inc[f] | cand[f]).bit_count()
        if bound < best.threshold:
            return
        while pos < len(order) and not cand[order[pos][0]] >> order[pos][1] & 1:
            pos += 1
        if pos == len(order):
            if all(inc):
                record(inc, allowed)
            return
        f, k = order[pos]
        bit = 1 << k
        # include
        new_inc = list(inc)
        new_inc[f] |= bit
        new_cand = list(cand)
        new_cand[f] &= ~bit
        new_allowed = allowed
        if all(new_inc[g] for g in range(d) if g != f):
            new_allowed &= tm.through(f, k, new_inc)
        if new_allowed:
            if all(new_inc):
                for g in range(d):
                    keep = 0
                    for c in iter_bits(new_cand[g]):
                        if new_allowed & tm.through(g, c, new_inc):
                            keep |= 1 << c
                    new_cand[g] = keep
            visit(pos + 1, new_inc, new_cand, new_allowed)
            if exhausted:
                return
        # exclude
        new_cand = list(cand)
        new_cand[f] &= ~bit
        visit(pos + 1, inc, new_cand, allowed)

    cand0 = [(1 << s.cardinality) - 1 for s in spaces[:d]]
    visit(0, [0] * d, cand0, full_last)

    optimal = not exhausted and problem.within_limits()
    if best.product < problem.star_product():
        return _star_fallback(problem, nodes, all_maximizers)
    if best.product == 0:
        return _empty_result(problem, optimal, nodes, all_maximizers)
    systems = []
    for sig in sorted(found, key=key):
        allowed = full_last
        for combo in itertools.product(*(list(iter_bits(m)) for m in sig)):
            allowed &= tm.get(combo)
        systems.append(tuple(Family(s, m) for s, m in zip(spaces, sig)) + (Family(spaces[-1], allowed),))
    return SearchResult(
        best.product, systems[0], optimal, nodes, systems if all_maximizers else None
    )


# --------------------------------------------------------------------------
# exhaustive reference


def brute_oracle(problem: SearchProblem, all_maximizers: bool = False) -> SearchResult:
    """Exhaustive maximum: every subset of the first r - 1 spaces, last one completed.

    Agreement is evaluated straight from ``agree_set`` so this shares no
    bit-mask machinery with the searches it checks.
    """
    if not problem.within_limits():
        raise ValueError(
            f"oracle limits {problem.limits} exceeded by "
            f"{[s.cardinality for s in problem.spaces[:-1]]}"
        )
    spaces = problem.spaces
    t, l = problem.t, problem.l
    last = spaces[-1]
    d = len(spaces) - 1
    full_last = (1 << last.cardinality) - 1

    tuple_mask: dict[tuple[int, ...], int] = {}
    for ranks in itertools.product(*(range(s.cardinality) for s in spaces[:d])):
        us = [s.unrank(k) for s, k in zip(spaces, ranks)]
        m = 0
        for kv, v in enumerate(last):
            if len(agree_set(us + [v], l)) >= t:
                m |= 1 << kv
        tuple_mask[ranks] = m

    best_p = 0
    found: list[tuple[int, ...]] = []
    nodes = 0

    def offer(chosen: list[int], allowed: int):
        nonlocal best_p, found
        p = allowed.bit_count()
        for m in chosen:
            p *= m.bit_count()
        if p == 0 or p < best_p:
            return
        if p > best_p:
            best_p, found = p, []
        found.append(tuple(chosen))

    def subsets(f: int, chosen: list[int]):
        # masks for each candidate element of family f against earlier choices
        nonlocal nodes
        n_f = spaces[f].cardinality
        if f < d - 1:
            def rec(k: int, mask: int):
                nonlocal nodes
                nodes += 1
                chosen[f] = mask
                subsets(f + 1, chosen)
                for j in range(k, n_f):
                    rec(j + 1, mask | 1 << j)
            rec(0, 0)
            chosen[f] = 0
            return
        earlier = [list(iter_bits(chosen[g])) for g in range(f)]
        elem_mask = []
        for j in range(n_f):
            m = full_last
            for combo in itertools.product(*earlier):
                m &= tuple_mask[combo + (j,)]
            elem_mask.append(m)

        def rec_last(k: int, mask: int, allowed: int):
            nonlocal nodes
            nodes += 1
            chosen[f] = mask
            offer(chosen, allowed if mask else full_last)
            for j in range(k, n_f):
                rec_last(j + 1, mask | 1 << j, allowed & elem_mask[j])
        rec_last(0, 0, full_last)
        chosen[f] = 0

    subsets(0, [0] * d)

    if best_p == 0:
        return _empty_result(problem, True, nodes, all_maximizers)

    def key(sig):
        return tuple(_extent_key(m) for m in sig)

    systems = []
    for sig in sorted(set(found), key=key):
        allowed = full_last
        for combo in itertools.product(*(list(iter_bits(m)) for m in sig)):
            allowed &= tuple_mask[combo]
        systems.append(tuple(Family(s, m) for s, m in zip(spaces, sig)) + (Family(last, allowed),))
    return SearchResult(best_p, systems[0], True, nodes, systems if all_maximizers else None)


# --------------------------------------------------------------------------
# structure of the maximisers


@dataclass(frozen=True)
class ExtremalReport:
    is_star: bool
    T_observed: tuple[frozenset[int] | None, ...]
    unique: bool


def star_systems(spaces: Sequence[CompositionSpace], t: int) -> dict[frozenset[int], tuple[Family, ...]]:
    l = min(s.l for s in spaces)
    return {
        frozenset(T): tuple(make_star(s, T) for s in spaces)
        for T in itertools.combinations(range(1, l + 1), t)
    }


def verify_extremal(result: SearchResult, t: int) -> ExtremalReport:
    """Match every maximiser against the common-T star systems.

    ``unique`` holds when the maximisers are exactly the distinct star systems.
    """
    if not result.optimal:
        raise ValueError("extremal structure needs a result proven optimal")
    maximizers = result.all_maximizers
    if maximizers is None:
        raise ValueError("run the search with all_maximizers=True")
    spaces = [f.space for f in result.witnesses]
    stars = star_systems(spaces, t)
    observed = []
    for system in maximizers:
        match = None
        if all(system):
            match = next((T for T, s in sorted(stars.items(), key=lambda kv: sorted(kv[0]))
                          if s == tuple(system)), None)
        observed.append(match)
    is_star = bool(maximizers) and all(T is not None for T in observed)
    distinct_stars = set(stars.values())
    unique = is_star and set(tuple(s) for s in maximizers) == distinct_stars
    return ExtremalReport(is_star, tuple(observed), unique)
