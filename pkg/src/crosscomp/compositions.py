"""Weak compositions and the spaces P(n, l) they live in.

A composition is represented as a plain tuple of non-negative ints.  The
space enumerates its elements in lexicographic ascending order, which fixes
ranks, family bit-masks and search order once and for all.

Coordinate indices are 1-based at every public entry point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Iterator, Sequence

Composition = tuple[int, ...]

# ranks are kept within a signed 64-bit word
MAX_RANK_CARDINALITY = 2**63 - 1


def count_compositions(n: int, l: int) -> int:
    """Number of weak compositions of ``n`` into ``l`` parts."""
    if l < 1:
        raise ValueError(f"number of parts must be >= 1, got {l}")
    if n < 0:
        raise ValueError(f"total must be non-negative, got {n}")
    return comb(n + l - 1, l - 1)


@dataclass(frozen=True)
class CompositionSpace:
    n: int
    l: int

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"number of parts must be >= 1, got {self.l}")
        if self.n < 0:
            raise ValueError(f"total must be non-negative, got {self.n}")
        if self.cardinality > MAX_RANK_CARDINALITY:
            raise ValueError(
                f"P({self.n},{self.l}) has {self.cardinality} elements, "
                "too many for machine-width ranks"
            )

    def __str__(self):
        return f"P({self.n},{self.l})"

    @cached_property
    def cardinality(self) -> int:
        return count_compositions(self.n, self.l)

    def __len__(self):
        return self.cardinality

    def __iter__(self) -> Iterator[Composition]:
        return _lex_compositions(self.n, self.l)

    @cached_property
    def elements(self) -> tuple[Composition, ...]:
        """All elements in rank order (materialised on first use)."""
        return tuple(self)

    @cached_property
    def _index(self) -> dict[Composition, int]:
        return {u: k for k, u in enumerate(self.elements)}

    def __contains__(self, u) -> bool:
        try:
            self.validate(u)
        except (ValueError, TypeError):
            return False
        return True

    def validate(self, u: Sequence[int]) -> Composition:
        u = tuple(u)
        if len(u) != self.l:
            raise ValueError(f"{format_composition(u)} has {len(u)} parts, expected {self.l}")
        if any(not isinstance(x, int) or x < 0 for x in u):
            raise ValueError(f"{format_composition(u)} has a negative or non-integer part")
        if sum(u) != self.n:
            raise ValueError(f"{format_composition(u)} sums to {sum(u)}, expected {self.n}")
        return u

    def rank(self, u: Sequence[int]) -> int:
        u = self.validate(u)
        cached = self.__dict__.get("_index")
        if cached is not None:
            return cached[u]
        k = 0
        remaining = self.n
        for i, part in enumerate(u[:-1]):
            tail = self.l - i - 1
            # compositions with a smaller value at position i, same prefix
            k += comb(remaining + tail, tail) - comb(remaining - part + tail, tail)
            remaining -= part
        return k

    def unrank(self, k: int) -> Composition:
        if not 0 <= k < self.cardinality:
            raise ValueError(f"rank {k} out of range for {self} (size {self.cardinality})")
        cached = self.__dict__.get("elements")
        if cached is not None:
            return cached[k]
        parts = []
        remaining = self.n
        for i in range(self.l - 1):
            tail = self.l - i - 1
            part = 0
            while True:
                block = comb(remaining - part + tail - 1, tail - 1)
                if k < block:
                    break
                k -= block
                part += 1
            parts.append(part)
            remaining -= part
        parts.append(remaining)
        return tuple(parts)


def _lex_compositions(n: int, l: int) -> Iterator[Composition]:
    if l == 1:
        yield (n,)
        return
    u = [0] * (l - 1) + [n]
    while True:
        yield tuple(u)
        # successor: bump the rightmost non-final position that still has
        # mass to its right, and push the rest of the mass to the end
        j = l - 2
        while j >= 0 and sum(u[j + 1:]) == 0:
            j -= 1
        if j < 0:
            return
        rest = sum(u[j + 1:]) - 1
        u[j] += 1
        for i in range(j + 1, l - 1):
            u[i] = 0
        u[l - 1] = rest


def agree_set(us: Sequence[Sequence[int]], l: int | None = None) -> frozenset[int]:
    """1-based coordinates in [l] where every composition takes the same value.

    ``l`` defaults to the shortest length among ``us``.
    """
    if not us:
        raise ValueError("need at least one composition")
    shortest = min(len(u) for u in us)
    if l is None:
        l = shortest
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if shortest < l:
        raise ValueError(f"a composition has only {shortest} parts, fewer than l={l}")
    first = us[0]
    return frozenset(
        i + 1 for i in range(l) if all(u[i] == first[i] for u in us[1:])
    )


def check_indices(xs: Iterable[int], l: int) -> tuple[int, ...]:
    """Validate 1-based, strictly increasing indices into a length-``l`` tuple."""
    xs = tuple(xs)
    for x in xs:
        if not isinstance(x, int) or not 1 <= x <= l:
            raise ValueError(f"coordinate index {x} outside [1, {l}]")
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise ValueError(f"indices {xs} are not strictly increasing")
    return xs


def remove_coords(u: Sequence[int], xs: Iterable[int]) -> Composition:
    """Delete the (1-based, original-position) coordinates ``xs`` from ``u``."""
    xs = tuple(xs)
    if len(set(xs)) != len(xs):
        raise ValueError(f"duplicated index in {xs}")
    drop = set(check_indices(sorted(xs), len(u)))
    return tuple(part for i, part in enumerate(u, start=1) if i not in drop)


def format_composition(u: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in u) + ")"


def parse_composition(text: str) -> Composition:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"composition {text!r} must be parenthesised, e.g. (0,2,1)")
    body = body[1:-1].strip()
    if not body:
        raise ValueError("empty composition")
    try:
        parts = tuple(int(x) for x in body.split(","))
    except ValueError:
        raise ValueError(f"composition {text!r} has a non-integer part") from None
    if any(x < 0 for x in parts):
        raise ValueError(f"composition {text!r} has a negative part")
    return parts
