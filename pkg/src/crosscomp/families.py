"""Families of compositions as rank bit-masks, and the operators on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .compositions import (
    Composition,
    CompositionSpace,
    check_indices,
    remove_coords,
)


def iter_bits(mask: int) -> Iterator[int]:
    """Positions of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Family:
    """A subset of one composition space; bit ``k`` of ``mask`` is rank ``k``."""

    space: CompositionSpace
    mask: int = 0

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.space.cardinality:
            raise ValueError(f"mask has bits outside the ranks of {self.space}")

    @classmethod
    def from_members(cls, space: CompositionSpace, members: Iterable[Sequence[int]]) -> "Family":
        mask = 0
        for u in members:
            mask |= 1 << space.rank(u)
        return cls(space, mask)

    @classmethod
    def full(cls, space: CompositionSpace) -> "Family":
        return cls(space, (1 << space.cardinality) - 1)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def __len__(self):
        return self.size

    def __bool__(self):
        return self.mask != 0

    def ranks(self) -> list[int]:
        return list(iter_bits(self.mask))

    def members(self) -> list[Composition]:
        return [self.space.unrank(k) for k in iter_bits(self.mask)]

    def __iter__(self):
        return iter(self.members())

    def __contains__(self, u) -> bool:
        if u not in self.space:
            return False
        return bool(self.mask >> self.space.rank(u) & 1)

    def issubset(self, other: "Family") -> bool:
        self._same_space(other)
        return self.mask & ~other.mask == 0

    def __and__(self, other: "Family") -> "Family":
        self._same_space(other)
        return Family(self.space, self.mask & other.mask)

    def __or__(self, other: "Family") -> "Family":
        self._same_space(other)
        return Family(self.space, self.mask | other.mask)

    def _same_space(self, other: "Family"):
        if self.space != other.space:
            raise ValueError(f"families live in different spaces: {self.space} vs {other.space}")


@dataclass(frozen=True)
class FamilySystem:
    families: tuple[Family, ...]
    t: int

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        if len(self.families) < 2:
            raise ValueError("a family system needs r >= 2 families")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")

    @property
    def r(self) -> int:
        return len(self.families)

    @property
    def l(self) -> int:
        return min(f.space.l for f in self.families)

    @property
    def in_theorem_regime(self) -> bool:
        return self.l >= self.t + 2

    @property
    def product(self) -> int:
        p = 1
        for f in self.families:
            p *= f.size
        return p


def make_star(space: CompositionSpace, T: Iterable[int]) -> Family:
    """All compositions of ``space`` that vanish on every coordinate of ``T``."""
    T = sorted(set(T))
    for i in T:
        if not 1 <= i <= space.l:
            raise ValueError(f"star coordinate {i} outside [1, {space.l}]")
    mask = 0
    for k, u in enumerate(space.elements):
        if all(u[i - 1] == 0 for i in T):
            mask |= 1 << k
    return Family(space, mask)


def value_masks(space: CompositionSpace, l: int) -> list[dict[int, int]]:
    """For each coordinate i < l, map value -> mask of ranks with u(i) = value."""
    masks: list[dict[int, int]] = [{} for _ in range(l)]
    for k, u in enumerate(space.elements):
        bit = 1 << k
        for i in range(l):
            masks[i][u[i]] = masks[i].get(u[i], 0) | bit
    return masks


def agreeing_mask(
    masks: list[dict[int, int]], fixed: Sequence[tuple[int, int]], t: int
) -> int:
    """Ranks agreeing with at least ``t`` of the (0-based coord, value) pairs."""
    if t <= 0:
        raise ValueError("t must be positive")
    if len(fixed) < t:
        return 0
    out = 0
    for subset in itertools.combinations(fixed, t):
        m = -1
        for i, a in subset:
            m &= masks[i].get(a, 0)
            if not m:
                break
        out |= m
    return out


def partner_masks(
    left: CompositionSpace, right: CompositionSpace, t: int, l: int | None = None
) -> list[int]:
    """Row ``k``: ranks v of ``right`` with |I(left[k], v)| >= t over [l]."""
    if l is None:
        l = min(left.l, right.l)
    masks = value_masks(right, l)
    return [
        agreeing_mask(masks, [(i, u[i]) for i in range(l)], t) for u in left.elements
    ]


def is_cross_t_intersecting(system: FamilySystem) -> tuple[bool, tuple[Composition, ...] | None]:
    """Check every r-tuple across the families agrees on at least t coordinates.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is the
    violating tuple that is least in lexicographic rank order.
    """
    fams = system.families
    if any(not f for f in fams):
        return True, None
    l, t = system.l, system.t
    if system.r == 2:
        a, b = fams
        rows = value_masks(b.space, l)
        for k in iter_bits(a.mask):
            u = a.space.unrank(k)
            ok = agreeing_mask(rows, [(i, u[i]) for i in range(l)], t)
            bad = b.mask & ~ok
            if bad:
                v = b.space.unrank((bad & -bad).bit_length() - 1)
                return False, (u, v)
        return True, None
    return _first_violation(fams, l, t)


def _first_violation(fams: Sequence[Family], l: int, t: int):
    """Depth-first over the families in rank order, tracking the coordinates on
    which everything chosen so far agrees.  Patterns already shown to admit no
    violation further down are skipped, which keeps the first violation found
    the least one in rank order."""
    last = fams[-1]
    last_masks = value_masks(last.space, l)
    members = [f.members() for f in fams[:-1]]
    safe: list[set] = [set() for _ in fams]

    def walk(k: int, pattern: tuple, prefix: list):
        if k == len(fams) - 1:
            bad = last.mask & ~agreeing_mask(last_masks, pattern, t)
            if bad:
                v = last.space.unrank((bad & -bad).bit_length() - 1)
                return tuple(prefix) + (v,)
            return None
        for u in members[k]:
            narrowed = tuple((i, a) for i, a in pattern if u[i] == a)
            if len(narrowed) < t:
                return complete(prefix + [u], k + 1)
            if narrowed in safe[k + 1]:
                continue
            found = walk(k + 1, narrowed, prefix + [u])
            if found:
                return found
            safe[k + 1].add(narrowed)
        return None

    def complete(prefix: list, k: int):
        # agreement already below t: any completion by least members violates
        return tuple(prefix) + tuple(fams[j].space.unrank(fams[j].ranks()[0]) for j in range(k, len(fams)))

    first = members[0]
    for u in first:
        pattern = tuple((i, u[i]) for i in range(l))
        found = walk(1, pattern, [u]) if len(pattern) >= t else complete([u], 1)
        if found:
            return False, found
    return True, None


def _check_slice_args(family: Family, xs, ys) -> tuple[tuple[int, ...], tuple[int, ...]]:
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys):
        raise ValueError(f"{len(xs)} indices but {len(ys)} values")
    xs = check_indices(xs, family.space.l)
    if any(y < 0 for y in ys):
        raise ValueError(f"slice values must be non-negative, got {ys}")
    return xs, ys


def slice_family(family: Family, xs: Sequence[int], ys: Sequence[int]) -> Family:
    """Members u with u(x_i) = y_i for every i."""
    xs, ys = _check_slice_args(family, xs, ys)
    space = family.space
    keep = 0
    for k in iter_bits(family.mask):
        u = space.unrank(k)
        if all(u[x - 1] == y for x, y in zip(xs, ys)):
            keep |= 1 << k
    return Family(space, keep)


def project(family: Family, xs: Sequence[int], ys: Sequence[int]) -> Family:
    """Slice at (xs, ys) and drop those coordinates; lands in P(n - sum ys, l - |xs|)."""
    xs, ys = _check_slice_args(family, xs, ys)
    space = family.space
    if sum(ys) > space.n:
        raise ValueError(f"slice values sum to {sum(ys)} > n = {space.n}")
    if len(xs) >= space.l:
        raise ValueError(f"cannot remove {len(xs)} of {space.l} coordinates")
    target = CompositionSpace(space.n - sum(ys), space.l - len(xs))
    sliced = slice_family(family, xs, ys)
    return Family.from_members(target, (remove_coords(u, xs) for u in sliced.members()))
