"""Simple undirected graphs on dense vertex ids, plus host generators.

Graphs are immutable. The edge tuple is sorted lexicographically and every
edge is stored as ``(u, v)`` with ``u < v``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed graph input (bad endpoint, self-loop, parse error)."""


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    __slots__ = ("n", "edges", "adj", "_nbrsets", "_edgeset")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise GraphError(f"vertex count must be nonnegative, got {n}")
        seen: set[Edge] = set()
        for pair in edges:
            u, v = int(pair[0]), int(pair[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"endpoint out of range in ({u}, {v}) for n={n}")
            if u == v:
                raise GraphError(f"self-loop ({u}, {v})")
            seen.add(norm_edge(u, v))
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in nbrs)
        self._nbrsets = tuple(frozenset(a) for a in self.adj)
        self._edgeset = frozenset(self.edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._nbrsets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self._edgeset

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def from_edge_list(n: int, pairs: Iterable[Sequence[int]]) -> Graph:
    return Graph(n, (tuple(p) for p in pairs))


def induced_subgraph(g: Graph, keep: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Subgraph induced on ``keep``, relabelled densely in increasing id order.

    Returns the graph and the old->new id mapping.
    """
    kept = sorted(set(keep))
    mapping = {old: new for new, old in enumerate(kept)}
    edges = [
        (mapping[u], mapping[v]) for u, v in g.edges if u in mapping and v in mapping
    ]
    return Graph(len(kept), edges), mapping


def degrees(g: Graph) -> list[int]:
    return [len(a) for a in g.adj]


def min_degree(g: Graph) -> int:
    """Minimum degree. The empty vertex set has no minimum; 0 is returned."""
    return min((len(a) for a in g.adj), default=0)


def average_degree(g: Graph) -> Fraction:
    if g.n == 0:
        return Fraction(0)
    return Fraction(2 * g.m, g.n)


def remove_edges(g: Graph, dead: Iterable[Edge]) -> Graph:
    gone = {norm_edge(*e) for e in dead}
    return Graph(g.n, (e for e in g.edges if e not in gone))


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Apply vertex permutation ``v -> perm[v]``."""
    return Graph(g.n, ((perm[u], perm[v]) for u, v in g.edges))


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in g.adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


# ---------------------------------------------------------------------------
# text edge-list format: "n m" then m lines "u v"


def dumps(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def loads(text: str) -> Graph:
    rows = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    rows = [(i, parts) for i, parts in rows if parts]
    if not rows:
        raise GraphError("line 1: empty graph file")
    lineno, head = rows[0]
    if len(head) != 2:
        raise GraphError(f"line {lineno}: expected 'n m' header")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphError(f"line {lineno}: non-integer header {head!r}") from None
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    pairs = []
    for lineno, parts in body:
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer endpoint") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: endpoint out of range in ({u}, {v})")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop ({u}, {v})")
        pairs.append((u, v))
    return Graph(n, pairs)


# ---------------------------------------------------------------------------
# generators


def complete_graph(n: int) -> Graph:
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def mycielskian(g: Graph) -> Graph:
    """One Mycielski step: copies u_i of each v_i plus an apex w.

    Vertex layout: v_i -> i, u_i -> n + i, w -> 2n.
    """
    n = g.n
    edges = list(g.edges)
    for a, b in g.edges:
        edges.append((a, n + b))
        edges.append((b, n + a))
    edges.extend((n + i, 2 * n) for i in range(n))
    return Graph(2 * n + 1, edges)


def mycielski(k: int) -> tuple[Graph, list[int]]:
    """The k-chromatic triangle-free Mycielski graph M_k and a proper k-coloring.

    M_2 = K_2, M_3 = C_5, M_4 = Groetzsch graph. The coloring comes from the
    construction: u_i copies the color of v_i and the apex takes a new color.
    """
    if k < 2:
        raise ValueError("Mycielski graphs are defined for k >= 2")
    g = complete_graph(2)
    colors = [0, 1]
    for step in range(3, k + 1):
        g = mycielskian(g)
        colors = colors + colors + [step - 1]
    return g, colors


def random_gnm(n: int, m: int, rng: random.Random) -> Graph:
    total = n * (n - 1) // 2
    if m > total:
        raise ValueError(f"G({n}, {m}) impossible: at most {total} edges")
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return Graph(n, rng.sample(all_pairs, m))


def random_min_degree(n: int, d: int, rng: random.Random) -> Graph:
    """Random graph with minimum degree at least ``d`` (requires n > d)."""
    if n <= d:
        raise ValueError(f"need n > d, got n={n}, d={d}")
    edges: set[Edge] = set()
    deg = [0] * n
    order = list(range(n))
    rng.shuffle(order)
    for v in order:
        while deg[v] < d:
            w = rng.choice([x for x in range(n) if x != v and norm_edge(v, x) not in edges])
            edges.add(norm_edge(v, w))
            deg[v] += 1
            deg[w] += 1
    return Graph(n, edges)


def peel_rounds(
    g: Graph, threshold: Fraction | int, within: Iterable[int] | None = None
) -> tuple[list[int], list[list[int]]]:
    """Repeatedly delete every vertex of degree < ``threshold`` until none is left.

    Each round deletes all low-degree vertices at once. Returns the surviving
    vertices and the vertices removed in each round.
    """
    alive = set(range(g.n)) if within is None else set(within)
    deg = {v: sum(1 for w in g.adj[v] if w in alive) for v in alive}
    rounds = []
    while True:
        low = sorted(v for v in alive if deg[v] < threshold)
        if not low:
            break
        rounds.append(low)
        for v in low:
            alive.discard(v)
        for v in low:
            for w in g.adj[v]:
                if w in alive:
                    deg[w] -= 1
    return sorted(alive), rounds
