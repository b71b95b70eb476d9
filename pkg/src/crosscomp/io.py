"""File formats: family / system / search-result JSON and scan CSV."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable

from .compositions import CompositionSpace, format_composition
from .families import Family, FamilySystem


class FormatError(ValueError):
    pass


def family_to_json(family: Family) -> dict[str, Any]:
    return {
        "n": family.space.n,
        "l": family.space.l,
        "members": [list(u) for u in family.members()],
    }


def family_from_json(data: Any, where: str = "family") -> Family:
    if not isinstance(data, dict):
        raise FormatError(f"{where}: expected an object with n, l, members")
    for key in ("n", "l", "members"):
        if key not in data:
            raise FormatError(f"{where}: missing key {key!r}")
    n, l, members = data["n"], data["l"], data["members"]
    if not isinstance(n, int) or not isinstance(l, int) or isinstance(n, bool):
        raise FormatError(f"{where}: n and l must be integers")
    try:
        space = CompositionSpace(n, l)
    except ValueError as e:
        raise FormatError(f"{where}: {e}") from None
    if not isinstance(members, list):
        raise FormatError(f"{where}: members must be a list")
    mask = 0
    for idx, u in enumerate(members):
        if not isinstance(u, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in u):
            raise FormatError(f"{where}: member #{idx} {u!r} is not a list of integers")
        try:
            mask |= 1 << space.rank(u)
        except ValueError as e:
            raise FormatError(f"{where}: member #{idx} {format_composition(u)}: {e}") from None
    return Family(space, mask)


def system_to_json(system: FamilySystem) -> dict[str, Any]:
    return {"t": system.t, "families": [family_to_json(f) for f in system.families]}


def system_from_json(data: Any) -> FamilySystem:
    if not isinstance(data, dict) or "t" not in data or "families" not in data:
        raise FormatError("system: expected an object with t and families")
    t = data["t"]
    if not isinstance(t, int) or isinstance(t, bool) or t < 1:
        raise FormatError(f"system: t must be a positive integer, got {t!r}")
    fams = data["families"]
    if not isinstance(fams, list) or len(fams) < 2:
        raise FormatError("system: families must be a list of at least two families")
    return FamilySystem(
        tuple(family_from_json(f, f"families[{i}]") for i, f in enumerate(fams)), t
    )


def result_to_json(result) -> dict[str, Any]:
    out = {
        "product": str(result.product),
        "optimal": result.optimal,
        "nodes": result.nodes_explored,
        "witnesses": [family_to_json(f) for f in result.witnesses],
    }
    if result.all_maximizers is not None:
        out["all_maximizers"] = [
            [family_to_json(f) for f in system] for system in result.all_maximizers
        ]
    return out


def result_from_json(data: dict[str, Any]):
    from .search import SearchResult

    maximizers = data.get("all_maximizers")
    return SearchResult(
        product=int(data["product"]),
        witnesses=tuple(family_from_json(f) for f in data["witnesses"]),
        optimal=bool(data["optimal"]),
        nodes_explored=int(data["nodes"]),
        all_maximizers=None
        if maximizers is None
        else [tuple(family_from_json(f) for f in system) for system in maximizers],
    )


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


SCAN_HEADER = ["n", "max_product", "star_bound", "equals_star", "unique_star", "T_observed"]


def format_tsets(tsets: Iterable[Iterable[int]]) -> str:
    return ";".join("{" + ",".join(str(i) for i in sorted(T)) + "}" for T in tsets)


def scan_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for row in rows:
        writer.writerow([
            row.n,
            str(row.max_product),
            str(row.star_bound),
            str(row.equals_star).lower(),
            str(row.unique_star).lower(),
            format_tsets(row.T_observed),
        ])
    return buf.getvalue()
