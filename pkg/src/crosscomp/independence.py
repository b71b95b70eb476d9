"""Independent subfamilies (pairwise empty agreement) and the lemma built on them."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .compositions import agree_set, check_indices
from .families import Family, project

DEFAULT_NODE_BUDGET = 2_000_000


def conflict_graph(family: Family) -> tuple[list[int], list[int]]:
    """Member ranks and, per member, a mask of the *local* indices it conflicts with.

    Two members conflict when they agree on at least one coordinate.
    """
    ranks = family.ranks()
    members = [family.space.unrank(k) for k in ranks]
    l = family.space.l
    by_value: list[dict[int, int]] = [{} for _ in range(l)]
    for j, u in enumerate(members):
        for i in range(l):
            by_value[i][u[i]] = by_value[i].get(u[i], 0) | (1 << j)
    adj = []
    for j, u in enumerate(members):
        m = 0
        for i in range(l):
            m |= by_value[i][u[i]]
        adj.append(m & ~(1 << j))
    return ranks, adj


def is_independent(family: Family) -> bool:
    _, adj = conflict_graph(family)
    return not any(adj)


def greedy_independent(family: Family) -> Family:
    ranks, adj = conflict_graph(family)
    remaining = (1 << len(ranks)) - 1
    keep = 0
    while remaining:
        j = (remaining & -remaining).bit_length() - 1
        keep |= 1 << ranks[j]
        remaining &= ~adj[j] & ~(1 << j)
    return Family(family.space, keep)


def _clique_cover_bound(cand: int, adj: list[int]) -> int:
    """Number of conflict cliques in a greedy cover of ``cand``.

    An independent set uses at most one vertex per clique.
    """
    count = 0
    while cand:
        j = (cand & -cand).bit_length() - 1
        clique_cand = cand & adj[j]
        cand &= ~(1 << j)
        while clique_cand:
            k = (clique_cand & -clique_cand).bit_length() - 1
            cand &= ~(1 << k)
            clique_cand &= adj[k]
        count += 1
    return count


def max_independent(family: Family, node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[Family, bool]:
    """Largest independent subfamily by branch-and-bound on the conflict graph.

    Vertices are branched in rank order, include first, so the first maximum
    found is also the lexicographically least one.  Returns the subfamily and
    whether the search finished inside ``node_budget``.
    """
    if node_budget < 1:
        raise ValueError("node_budget must be positive")
    ranks, adj = conflict_graph(family)
    best: list[int] = []
    nodes = 0
    exhausted = False

    def search(chosen: list[int], cand: int):
        nonlocal best, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > node_budget:
            exhausted = True
            return
        if not cand:
            if len(chosen) > len(best):
                best = list(chosen)
            return
        if len(chosen) + _clique_cover_bound(cand, adj) <= len(best):
            return
        j = (cand & -cand).bit_length() - 1
        chosen.append(j)
        search(chosen, cand & ~adj[j] & ~(1 << j))
        chosen.pop()
        search(chosen, cand & ~(1 << j))

    search([], (1 << len(ranks)) - 1)
    mask = 0
    for j in best:
        mask |= 1 << ranks[j]
    return Family(family.space, mask), not exhausted


@dataclass(frozen=True)
class GuaranteeParams:
    """Parameters of the independent-set guarantee.

    ``parts`` is the number of parts of the compositions (it is unrelated to
    the number of families r used elsewhere).
    """

    m: int
    n: int
    q: int
    parts: int
    s: int

    def __post_init__(self):
        if min(self.m, self.n, self.q, self.parts, self.s) < 1:
            raise ValueError("guarantee parameters must be positive integers")
        if self.m > self.n:
            raise ValueError(f"need m <= n, got m={self.m}, n={self.n}")
        if self.parts < 2 or self.s < 2:
            raise ValueError("need parts >= 2 and s >= 2")

    @property
    def n_threshold(self) -> int:
        return (2 * self.s) ** (2 ** (self.parts - 2) * self.q) + 1


def guarantee_applies(p: GuaranteeParams, family_size: int) -> bool:
    """Whether a family of this size in P(m, parts) is promised s+1 independent members.

    The size condition |A| >= n^(1/q) * C(n+parts-2, parts-2) is compared
    exactly as |A|^q >= n * C(...)^q.
    """
    if p.n < p.n_threshold:
        return False
    return family_size**p.q >= p.n * comb(p.n + p.parts - 2, p.parts - 2) ** p.q


class Verdict(enum.Enum):
    HYPOTHESIS_FAILS = "HYPOTHESIS_FAILS"
    BRANCH_A = "BRANCH_A"
    BRANCH_B = "BRANCH_B"
    BOTH = "BOTH"


class LemmaViolation(AssertionError):
    """Neither branch of the dichotomy holds although its hypothesis does."""


def dichotomy_check(
    A: Family,
    v: Sequence[int],
    xs: Sequence[int],
    ys: Sequence[int],
    t: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Verdict:
    """Decide which side of the slice dichotomy holds for ``A`` and ``v``.

    If the projection of ``A`` at (xs, ys) has an independent subfamily of size
    l - t + 1, then either some u in A agrees with v on at most t - 1
    coordinates (branch a) or v itself takes the values ys at xs (branch b).
    """
    v = tuple(v)
    if not v or any(x < 0 for x in v):
        raise ValueError(f"{v} is not a weak composition")
    l = min(A.space.l, len(v))
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if l < t + 2:
        raise ValueError(f"need l = {l} >= t + 2 = {t + 2}")
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != t or len(ys) != t:
        raise ValueError(f"need exactly t = {t} indices and values")
    check_indices(xs, l)
    if any(y < 0 for y in ys):
        raise ValueError(f"slice values must be non-negative, got {ys}")

    if sum(ys) > A.space.n:
        return Verdict.HYPOTHESIS_FAILS
    projected = project(A, xs, ys)
    indep, optimal = max_independent(projected, node_budget)
    if not optimal:
        raise RuntimeError("node budget exhausted before the independence number was settled")
    if indep.size < l - t + 1:
        return Verdict.HYPOTHESIS_FAILS

    branch_a = any(len(agree_set((v, u), l)) <= t - 1 for u in A.members())
    branch_b = all(v[x - 1] == y for x, y in zip(xs, ys))
    if branch_a and branch_b:
        return Verdict.BOTH
    if branch_a:
        return Verdict.BRANCH_A
    if branch_b:
        return Verdict.BRANCH_B
    raise LemmaViolation(f"neither branch holds for v={v}, xs={xs}, ys={ys}")
