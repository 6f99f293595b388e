"""Independent certification of claimed packings.

Only the host graph, the family and the claimed color classes are consulted;
shapes are compared through canonical tree codes.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .graph import Graph, is_connected
from .packing import Packing
from .trees import TreeFamily, canonical_form

MISSING_EDGE = "MISSING_EDGE"
DOUBLE_COLOR = "DOUBLE_COLOR"
SHAPE_MISMATCH = "SHAPE_MISMATCH"
BAD_COLOR_INDEX = "BAD_COLOR_INDEX"


@dataclass
class Violation:
    kind: str
    color: object = None
    edge: object = None
    detail: str = ""


@dataclass
class VerifyReport:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [asdict(v) for v in self.violations]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, default=str)


def _as_edge(raw) -> tuple[int, int] | None:
    try:
        u, v = raw
        u, v = int(u), int(v)
    except (TypeError, ValueError):
        return None
    return (u, v) if u < v else (v, u)


def verify_packing(g: Graph, family: TreeFamily, p: Packing) -> VerifyReport:
    out: list[Violation] = []
    colors = getattr(p, "colors", None)
    if not isinstance(colors, dict):
        return VerifyReport(False, [Violation(SHAPE_MISMATCH, detail="packing has no color map")])

    usage: Counter = Counter()
    per_color: dict[object, list[tuple[int, int]]] = {}
    for color, raw_edges in colors.items():
        if not isinstance(color, int) or color not in family.trees:
            out.append(Violation(BAD_COLOR_INDEX, color, None, f"no tree of order {color!r} in family"))
        good = []
        for raw in raw_edges:
            e = _as_edge(raw)
            if e is None or e[0] == e[1] or not g.has_edge(*e):
                out.append(Violation(MISSING_EDGE, color, raw, "edge not in host"))
                continue
            usage[e] += 1
            good.append(e)
        per_color[color] = good

    for e, count in sorted(usage.items()):
        if count > 1:
            holders = sorted((c for c, es in per_color.items() if e in es), key=str)
            out.append(Violation(DOUBLE_COLOR, holders, list(e), f"edge used {count} times"))

    for i, tree in family.trees.items():
        es = per_color.get(i, [])
        detail = _shape_problem(es, tree)
        if detail:
            out.append(Violation(SHAPE_MISMATCH, i, None, detail))
    return VerifyReport(not out, out)


def _shape_problem(edges, tree) -> str:
    if len(set(edges)) != len(edges):
        return "repeated edge inside one color"
    verts = sorted({v for e in edges for v in e})
    if len(edges) != tree.n - 1:
        return f"{len(edges)} edges, tree needs {tree.n - 1}"
    if tree.n == 1:
        return ""
    index = {v: i for i, v in enumerate(verts)}
    if len(verts) != tree.n:
        return f"spans {len(verts)} vertices, tree has {tree.n}"
    sub = Graph(len(verts), ((index[u], index[v]) for u, v in edges))
    if not is_connected(sub):
        return "color class is not connected"
    if canonical_form(sub) != canonical_form(tree):
        return "color class is a different tree"
    return ""
