"""Degree-based packers: minimum degree via B-sets, average degree via peeling."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .graph import Edge, Graph, min_degree, norm_edge, peel_rounds, remove_edges
from .packing import Packing
from .search import pack_exhaustive
from .trees import Tree, TreeFamily, centers


class DegreePreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# B-sets


@dataclass
class BSets:
    """Layers B_1..B_k of vertices the levelwise embedding steers around."""

    k: int
    layers: list[list[int]]

    def union(self, upto: int | None = None) -> set[int]:
        """Vertices in B_1..B_upto (all layers when ``upto`` is None)."""
        upto = len(self.layers) if upto is None else max(upto, 0)
        return {v for layer in self.layers[:upto] for v in layer}

    @property
    def total(self) -> int:
        return sum(len(x) for x in self.layers)

    @property
    def bound(self) -> int:
        return self.k ** (self.k - 1) * (self.k * self.k - self.k)

    def layer_bounds_ok(self) -> bool:
        """|B_i| <= (k-1)|B_1 u ... u B_{i-1}| for every i >= 2."""
        seen = len(self.layers[0]) if self.layers else 0
        for layer in self.layers[1:]:
            if len(layer) > (self.k - 1) * seen:
                return False
            seen += len(layer)
        return True

    def within_bound(self) -> bool:
        return self.total <= self.bound


def compute_b_sets(gp: Graph, k: int) -> BSets:
    low = k - 1
    b1 = sorted(v for v in range(gp.n) if gp.degree(v) < low)
    layers = [b1]
    union = set(b1)
    for _ in range(2, k + 1):
        frontier = {w for v in union for w in gp.adj[v] if w not in union}
        layer = sorted(v for v in frontier if sum(1 for w in gp.adj[v] if w not in union) < low)
        layers.append(layer)
        union.update(layer)
    return BSets(k, layers)


# ---------------------------------------------------------------------------
# levelwise embedding


@dataclass
class EmbedFailure:
    """Why a levelwise embedding starved: the tree level and the deepest B-layer excluded there."""

    level: int
    layer: int
    host_vertex: int | None
    detail: str

    def to_json(self) -> dict:
        return {"level": self.level, "layer": self.layer, "host_vertex": self.host_vertex, "detail": self.detail}


def _levels(t: Tree, root: int) -> tuple[list[int], dict[int, int], dict[int, int]]:
    order, parent, depth = [root], {root: -1}, {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in t.adj[v]:
            if w not in depth:
                depth[w] = depth[v] + 1
                parent[w] = v
                order.append(w)
                queue.append(w)
    return order, parent, depth


def embed_tree_levelwise(gp: Graph, t: Tree, b: BSets, k: int) -> dict[int, int] | EmbedFailure:
    """Embed ``t`` (at most k vertices) root outside B, level i outside B_1..B_{k-i}.

    The tree is rooted at its first centre; host roots are tried in ascending
    id and every other vertex takes the first unused neighbour of its parent's
    image. Returns tree vertex -> host vertex, or the failure of the last root tried.
    """
    if t.n > k:
        raise DegreePreconditionError(f"tree has {t.n} vertices, more than k={k}")
    order, parent, depth = _levels(t, centers(t)[0])
    banned_at = [b.union(k - i) for i in range(k)]
    roots = [v for v in range(gp.n) if v not in banned_at[0]]
    if not roots:
        return EmbedFailure(0, k, None, "every host vertex lies in B")
    last: EmbedFailure | None = None
    for r in roots:
        emb = {order[0]: r}
        used = {r}
        for v in order[1:]:
            lvl = depth[v]
            at = emb[parent[v]]
            bad = banned_at[lvl]
            h = next((w for w in gp.adj[at] if w not in used and w not in bad), None)
            if h is None:
                last = EmbedFailure(lvl, k - lvl, at, f"no unused neighbour of {at} outside B_1..B_{k - lvl}")
                break
            emb[v] = h
            used.add(h)
        else:
            return emb
    return last


# ---------------------------------------------------------------------------
# minimum degree


@dataclass
class DegreeResult:
    ok: bool
    packing: Packing | None
    reports: list[dict] = field(default_factory=list)
    fallback_used: bool = False

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "fallback_used": self.fallback_used,
            "reports": self.reports,
            "packing": self.packing.to_json() if self.packing else None,
        }


def _tree_edges(t: Tree, emb: Mapping[int, int]) -> list[Edge]:
    return [norm_edge(emb[a], emb[b]) for a, b in t.edges]


def pack_min_degree(g: Graph, family: TreeFamily, fallback: bool = True, budget: int | None = None) -> DegreeResult:
    """Remove T_k, T_{k-1}, ..., T_2 one at a time, each embedded levelwise around fresh B-sets.

    If a tree starves, the remaining trees go to the exhaustive packer on the
    residual graph, then on the whole host; ``fallback_used`` records this.
    """
    k = family.k
    if g.n < k:
        raise DegreePreconditionError(f"host has {g.n} vertices, fewer than k={k}")
    if min_degree(g) < k - 1:
        raise DegreePreconditionError(f"minimum degree {min_degree(g)} is below k-1={k - 1}")
    residual = g
    embeddings: dict[int, dict[int, int]] = {}
    reports: list[dict] = []
    for i in range(k, 1, -1):
        b = compute_b_sets(residual, k)
        step = {"tree": i, "b_sizes": [len(x) for x in b.layers], "b_total": b.total,
                "layer_bounds_ok": b.layer_bounds_ok(), "within_bound": b.within_bound(),
                "removed_so_far": g.m - residual.m}
        res = embed_tree_levelwise(residual, family[i], b, k)
        if isinstance(res, EmbedFailure):
            step["failure"] = res.to_json()
            reports.append(step)
            if not fallback:
                return DegreeResult(False, None, reports)
            return _finish_by_search(g, residual, family, i, embeddings, reports, budget)
        reports.append(step)
        embeddings[i] = res
        residual = remove_edges(residual, _tree_edges(family[i], res))
    return DegreeResult(True, Packing.from_embeddings(k, family.trees, embeddings, source="mindeg"), reports)


def _finish_by_search(g, residual, family, i, embeddings, reports, budget) -> DegreeResult:
    k = family.k
    rest = TreeFamily({j: family[j] for j in range(2, i + 1)})
    res = pack_exhaustive(residual, rest, budget)
    if res.sat:
        p = res.packing
        colors = dict(p.colors)
        for j, emb in embeddings.items():
            colors[j] = sorted(_tree_edges(family[j], emb))
        return DegreeResult(True, Packing(k, dict(sorted(colors.items())), {"source": "mindeg+search"}), reports, True)
    whole = pack_exhaustive(g, family, budget)
    if whole.sat:
        whole.packing.meta["source"] = "search"
        return DegreeResult(True, whole.packing, reports, True)
    reports.append({"search": whole.status})
    return DegreeResult(False, None, reports, True)


# ---------------------------------------------------------------------------
# peeling and average degree


@dataclass
class PeelResult:
    graph: Graph
    survivors: list[int]
    rounds: list[list[int]]
    averages: list[Fraction]

    @property
    def monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.averages, self.averages[1:]))


def _avg(g: Graph, alive: set[int]) -> Fraction:
    if not alive:
        return Fraction(0)
    twice = sum(1 for v in alive for w in g.adj[v] if w in alive)
    return Fraction(twice, len(alive))


def peel(g: Graph, threshold: Fraction | int) -> PeelResult:
    """Iteratively drop vertices of degree below ``threshold``.

    ``averages`` holds the exact average degree before the first round and
    after each round. It is non-decreasing whenever the threshold is at most
    half the starting average degree.
    """
    threshold = Fraction(threshold)
    survivors, rounds = peel_rounds(g, threshold)
    alive = set(range(g.n))
    averages = [_avg(g, alive)]
    for r in rounds:
        alive.difference_update(r)
        averages.append(_avg(g, alive))
    keep = set(survivors)
    out = Graph(g.n, (e for e in g.edges if e[0] in keep and e[1] in keep))
    return PeelResult(out, survivors, rounds, averages)


def greedy_embed(g: Graph, t: Tree, vertices: Iterable[int]) -> dict[int, int] | None:
    """First-fit BFS embedding of ``t`` rooted at the first of ``vertices`` that works."""
    order, parent, _ = _levels(t, centers(t)[0])
    for r in vertices:
        emb = {order[0]: r}
        used = {r}
        for v in order[1:]:
            at = emb[parent[v]]
            h = next((w for w in g.adj[at] if w not in used), None)
            if h is None:
                break
            emb[v] = h
            used.add(h)
        else:
            return emb
    return None


def pack_avg_degree(g: Graph, family: TreeFamily, k: int, strategy: str = "peel") -> DegreeResult:
    """Pack T_s, ..., T_2 (s = family.k) into a host with at least (k-1)n/2 edges.

    ``strategy="peel"`` peels the residual to minimum degree (k'-1)/2 before
    embedding each tree, with k' dropping by one per tree. ``"chain"`` skips
    the peeling and embeds greedily into the whole residual graph.
    """
    s, n = family.k, g.n
    if 2 * s > k:
        raise DegreePreconditionError(f"need s <= k/2, got s={s}, k={k}")
    if k > n:
        raise DegreePreconditionError(f"need k <= n, got k={k}, n={n}")
    if 2 * g.m < (k - 1) * n:
        raise DegreePreconditionError(f"host has {g.m} edges, needs at least {(k - 1) * n}/2")
    if strategy not in ("peel", "chain"):
        raise ValueError(f"unknown strategy {strategy!r}")
    residual = g
    embeddings: dict[int, dict[int, int]] = {}
    reports: list[dict] = []
    kk = k
    for i in range(s, 1, -1):
        step: dict = {"tree": i, "k": kk, "edges_before": residual.m}
        if strategy == "peel":
            pr = peel(residual, Fraction(kk - 1, 2))
            step["peel_rounds"] = len(pr.rounds)
            step["peel_monotone"] = pr.monotone
            step["core_min_degree"] = min((pr.graph.degree(v) for v in pr.survivors), default=None)
            pool = pr.survivors
            host = pr.graph
        else:
            pool = sorted(range(n), key=lambda v: (-residual.degree(v), v))
            host = residual
        emb = greedy_embed(host, family[i], pool)
        if emb is None:
            step["failure"] = "greedy embedding failed"
            reports.append(step)
            return DegreeResult(False, None, reports)
        embeddings[i] = emb
        residual = remove_edges(residual, _tree_edges(family[i], emb))
        step["edges_after"] = residual.m
        step["residual_bound_ok"] = 2 * residual.m >= (kk - 2) * n
        reports.append(step)
        kk -= 1
    return DegreeResult(True, Packing.from_embeddings(s, family.trees, embeddings, source=f"avgdeg:{strategy}"), reports)


def remove_random_edges(g: Graph, count: int, rng) -> tuple[Graph, list[Edge]]:
    """Delete ``count`` uniformly chosen edges (all of them if fewer exist)."""
    dead = rng.sample(list(g.edges), min(count, g.m))
    return remove_edges(g, dead), sorted(dead)


def edges_to_remove(k: int) -> int:
    """Number of edges an adversary may delete before packing."""
    return comb(k, 2)

