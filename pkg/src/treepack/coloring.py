"""Exact vertex coloring, vertex-critical subgraphs, and Grundy (first-fit) colorings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import Graph, induced_subgraph, peel_rounds

DEFAULT_COLOR_BUDGET = 5_000_000


class ColoringError(ValueError):
    """Structural problem with a coloring (not a partition, improper, wrong k)."""


class ColoringTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class OrderedColoring:
    """Color classes A_1..A_k, in order, as tuples of vertex ids."""

    classes: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, classes: Iterable[Iterable[int]]) -> "OrderedColoring":
        return cls(tuple(tuple(sorted(c)) for c in classes))

    @property
    def k(self) -> int:
        return len(self.classes)

    def color_of(self) -> dict[int, int]:
        return {v: i for i, cls_ in enumerate(self.classes) for v in cls_}

    def vertices(self) -> list[int]:
        return sorted(v for c in self.classes for v in c)

    def to_json(self) -> dict:
        return {"classes": [list(c) for c in self.classes]}

    @classmethod
    def from_json(cls, data: Mapping) -> "OrderedColoring":
        return cls.of(data["classes"])

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass
class ChromaticResult:
    status: str  # "OK" or "TIMEOUT"
    k: int | None
    coloring: list[int] | None
    nodes: int = 0
    lower: int = 0
    upper: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "OK"


def classes_from_colors(colors: Sequence[int] | Mapping[int, int]) -> list[list[int]]:
    items = colors.items() if isinstance(colors, Mapping) else enumerate(colors)
    byc: dict[int, list[int]] = {}
    for v, c in items:
        byc.setdefault(c, []).append(v)
    return [sorted(byc[c]) for c in sorted(byc)]


def is_proper(g: Graph, colors: Sequence[int]) -> bool:
    return all(colors[u] != colors[v] for u, v in g.edges)


# ---------------------------------------------------------------------------
# exact chromatic number


def greedy_clique(g: Graph) -> list[int]:
    best: list[int] = []
    order = sorted(range(g.n), key=lambda v: -g.degree(v))
    for v in order:
        clique = [v]
        cand = set(g.adj[v])
        while cand:
            w = max(cand, key=lambda x: (len(cand & g.neighbor_set(x)), -x))
            clique.append(w)
            cand &= g.neighbor_set(w)
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def dsatur_coloring(g: Graph) -> list[int]:
    """Greedy DSATUR coloring (upper bound)."""
    colors = [-1] * g.n
    for _ in range(g.n):
        v = max(
            (x for x in range(g.n) if colors[x] < 0),
            key=lambda x: (len({colors[w] for w in g.adj[x]} - {-1}), g.degree(x), -x),
        )
        used = {colors[w] for w in g.adj[v]}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


class _Search:
    def __init__(self, g: Graph, budget: int):
        self.g = g
        self.budget = budget
        self.nodes = 0

    def colorable(self, k: int) -> list[int] | None:
        """Backtracking k-coloring with DSATUR branching; raises ColoringTimeout."""
        g = self.g
        n = g.n
        if n == 0:
            return []
        if k <= 0:
            return None
        colors = [-1] * n
        forb = [[0] * k for _ in range(n)]
        sat = [0] * n

        def pick() -> int:
            best, key = -1, None
            for x in range(n):
                if colors[x] < 0:
                    kx = (sat[x], g.degree(x))
                    if key is None or kx > key:
                        best, key = x, kx
            return best

        def assign(v: int, c: int, delta: int) -> None:
            for w in g.adj[v]:
                f = forb[w]
                if delta > 0:
                    if f[c] == 0:
                        sat[w] += 1
                    f[c] += 1
                else:
                    f[c] -= 1
                    if f[c] == 0:
                        sat[w] -= 1

        def rec(done: int, used: int) -> bool:
            self.nodes += 1
            if self.nodes > self.budget:
                raise ColoringTimeout(f"coloring search exceeded {self.budget} nodes")
            if done == n:
                return True
            v = pick()
            if sat[v] >= k:
                return False
            for c in range(min(used + 1, k)):
                if forb[v][c]:
                    continue
                colors[v] = c
                assign(v, c, +1)
                if rec(done + 1, max(used, c + 1)):
                    return True
                assign(v, c, -1)
                colors[v] = -1
            return False

        return list(colors) if rec(0, 0) else None


def chromatic_number(g: Graph, budget: int = DEFAULT_COLOR_BUDGET) -> ChromaticResult:
    """Exact chromatic number with a witness coloring.

    Bounds come from a greedy clique and DSATUR; the search then tries
    ``upper - 1, upper - 2, ...`` until a value is not colorable. If the node
    budget runs out the result has status TIMEOUT and no number.
    """
    if g.n == 0:
        return ChromaticResult("OK", 0, [], 0, 0, 0)
    lower = max(len(greedy_clique(g)), 1)
    best = dsatur_coloring(g)
    upper = max(best) + 1
    search = _Search(g, budget)
    try:
        k = upper - 1
        while k >= lower:
            witness = search.colorable(k)
            if witness is None:
                break
            best = witness
            k -= 1
    except ColoringTimeout:
        return ChromaticResult("TIMEOUT", None, None, search.nodes, lower, upper)
    return ChromaticResult("OK", max(best) + 1, best, search.nodes, lower, upper)


def is_k_colorable(g: Graph, k: int, budget: int = DEFAULT_COLOR_BUDGET) -> list[int] | None:
    return _Search(g, budget).colorable(k)


def critical_subgraph(
    g: Graph, k: int, budget: int = DEFAULT_COLOR_BUDGET
) -> tuple[Graph, list[int]]:
    """A vertex-critical k-chromatic induced subgraph and the kept vertex ids.

    Vertices are tried in ascending id; one is deleted whenever the rest is
    still not (k-1)-colorable.
    """
    res = chromatic_number(g, budget)
    if not res.ok:
        raise ColoringTimeout("chromatic number not certified within budget")
    if res.k != k:
        raise ColoringError(f"graph has chromatic number {res.k}, not {k}")
    kept = list(range(g.n))
    for v in range(g.n):
        trial = [x for x in kept if x != v]
        sub, _ = induced_subgraph(g, trial)
        if is_k_colorable(sub, k - 1, budget) is None:
            kept = trial
    h, _ = induced_subgraph(g, kept)
    return h, kept


# ---------------------------------------------------------------------------
# Grundy colorings


def _refine(nbrs: Mapping[int, frozenset[int]] | Sequence[frozenset[int]], classes) -> list[list[int]]:
    sets = [set(c) for c in classes if c]
    where = {v: i for i, c in enumerate(sets) for v in c}
    while True:
        moved = False
        for v in sorted(where):
            i = where[v]
            nv = nbrs[v]
            for j in range(i):
                if not (nv & sets[j]):
                    sets[i].discard(v)
                    sets[j].add(v)
                    where[v] = j
                    moved = True
                    break
            if moved:
                break
        if not moved:
            break
        if any(not s for s in sets):
            sets = [s for s in sets if s]
            where = {v: i for i, c in enumerate(sets) for v in c}
    return [sorted(s) for s in sets if s]


def grundy_refine(g: Graph, proper: Iterable[Iterable[int]] | Sequence[int]) -> OrderedColoring:
    """Turn a proper coloring into a Grundy coloring with no more classes.

    ``proper`` is either a list of classes or a per-vertex color list. The
    lowest-id vertex lacking a neighbour in some lower class moves into the
    lowest such class; repeat until no vertex moves.
    """
    proper = list(proper)
    if proper and isinstance(proper[0], int):
        classes = classes_from_colors(proper)
    else:
        classes = [sorted(c) for c in proper]
    _require_partition(g, classes)
    col = {v: i for i, c in enumerate(classes) for v in c}
    for u, v in g.edges:
        if col[u] == col[v]:
            raise ColoringError(f"input coloring is not proper at edge ({u}, {v})")
    return OrderedColoring.of(_refine([g.neighbor_set(v) for v in range(g.n)], classes))


def _require_partition(g: Graph, classes: Sequence[Iterable[int]]) -> None:
    seen: list[int] = [v for c in classes for v in c]
    if sorted(seen) != list(range(g.n)):
        raise ColoringError("classes do not partition the vertex set")


def check_grundy(g: Graph, c: OrderedColoring) -> bool:
    """True iff every class is independent and every vertex of A_i sees A_1..A_{i-1}."""
    _require_partition(g, c.classes)
    return _grundy_ok([g.neighbor_set(v) for v in range(g.n)], c.classes)


def _grundy_ok(nbrs, classes) -> bool:
    sets = [set(x) for x in classes]
    for i, cls_ in enumerate(sets):
        for v in cls_:
            nv = nbrs[v]
            if nv & cls_:
                return False
            if any(not (nv & sets[j]) for j in range(i)):
                return False
    return True


def peel_tail(
    g: Graph, c: OrderedColoring, i: int
) -> tuple[Graph, OrderedColoring, dict[int, int]]:
    """Induced graph on the top ``i`` classes with those classes renumbered 1..i.

    Returns the graph, the reindexed coloring (new ids), and the old->new map.
    """
    if not 1 <= i <= c.k:
        raise ColoringError(f"peel_tail needs 1 <= i <= {c.k}, got {i}")
    top = c.classes[c.k - i:]
    h, mapping = induced_subgraph(g, (v for cls_ in top for v in cls_))
    return h, OrderedColoring.of([[mapping[v] for v in cls_] for cls_ in top]), mapping


# ---------------------------------------------------------------------------
# host preparation for the constructive packer


@dataclass
class PreparedHost:
    """A vertex subset of the host with a Grundy k-coloring and min degree >= k-1."""

    vertices: list[int]
    classes: list[list[int]]
    nbrs: dict[int, frozenset[int]] = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.classes)

    def min_degree(self) -> int:
        return min((len(s) for s in self.nbrs.values()), default=0)


def prepare_host(g: Graph, within: Iterable[int], classes: Sequence[Iterable[int]], k: int) -> PreparedHost:
    """Restrict to the (k-1)-core of ``g[within]`` and Grundy-refine ``classes`` there.

    Deleting a vertex of degree < k-1 never changes k-colorability, so a
    k-chromatic input keeps chromatic number k on the core; the refined
    coloring is proper, hence still has exactly k classes. Fewer classes means
    the input was not k-chromatic and raises ColoringError.
    """
    core, _ = peel_rounds(g, k - 1, within)
    alive = set(core)
    nbrs = {v: frozenset(w for w in g.adj[v] if w in alive) for v in core}
    restricted = [[v for v in c if v in alive] for c in classes]
    refined = _refine(nbrs, restricted)
    if len(refined) != k:
        raise ColoringError(
            f"expected a Grundy {k}-coloring on the {k - 1}-core, got {len(refined)} classes"
        )
    return PreparedHost(core, refined, nbrs)
