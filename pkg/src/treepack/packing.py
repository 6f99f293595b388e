"""Packings as edge colorings: color i holds the edges of the copy of T_i."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import Edge, norm_edge


@dataclass
class Packing:
    k: int
    colors: dict[int, list[Edge]]
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_embeddings(cls, k: int, trees: Mapping[int, object], embeddings: Mapping[int, Mapping[int, int]], **meta) -> "Packing":
        colors = {}
        for i, emb in embeddings.items():
            colors[i] = sorted(norm_edge(emb[a], emb[b]) for a, b in trees[i].edges)
        return cls(k, dict(sorted(colors.items())), dict(meta))

    def edge_count(self) -> int:
        return sum(len(es) for es in self.colors.values())

    def color_of(self) -> dict[Edge, int]:
        return {e: i for i, es in self.colors.items() for e in es}

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "colors": {str(i): [list(e) for e in es] for i, es in sorted(self.colors.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Packing":
        colors = {int(i): [tuple(e) for e in es] for i, es in data["colors"].items()}
        return cls(int(data.get("k", max(colors, default=1))), colors)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self, n: int | None = None, extra_edges: Iterable[Edge] = ()) -> str:
        """Graphviz source; colored edges carry ``color`` and ``label`` attributes."""
        lines = ["graph packing {"]
        if n is not None:
            lines.extend(f"  {v};" for v in range(n))
        for i, es in sorted(self.colors.items()):
            for u, v in es:
                lines.append(f'  {u} -- {v} [color="{_palette(i)}", label="T{i}"];')
        seen = set(self.color_of())
        for u, v in extra_edges:
            if norm_edge(u, v) not in seen:
                lines.append(f'  {u} -- {v} [color="gray", style="dashed"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


_PALETTE = ("black", "blue", "red", "darkgreen", "orange", "purple", "brown", "cyan", "magenta", "gold")


def _palette(i: int) -> str:
    return _PALETTE[i % len(_PALETTE)]
