"""Reference implementations kept apart from the package.

None of these import the package's search, canonical-form or coloring code.
They are slow on purpose and only meant for small instances.
"""

from __future__ import annotations

import heapq
import itertools

import networkx as nx


def prufer_decode(seq: tuple[int, ...], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = sorted(leaves)
    edges.append((u, v))
    return edges


def refinement_signatures(graphs: list[tuple[int, list[tuple[int, int]]]]) -> list[tuple]:
    """Color-refinement fingerprints with a palette shared by all graphs, so equal
    fingerprints mean equal stable colorings. On trees this separates isomorphism classes."""
    adj = []
    for n, edges in graphs:
        a = [[] for _ in range(n)]
        for u, v in edges:
            a[u].append(v)
            a[v].append(u)
        adj.append(a)
    colors = [[0] * n for n, _ in graphs]
    seen = 1
    while True:
        keys = [
            [(col[v], tuple(sorted(col[w] for w in a[v]))) for v in range(len(a))]
            for a, col in zip(adj, colors)
        ]
        ordered = {key: i for i, key in enumerate(sorted({k for ks in keys for k in ks}))}
        colors = [[ordered[k] for k in ks] for ks in keys]
        # stop once the joint partition no longer splits
        if len(ordered) == seen:
            break
        seen = len(ordered)
    return [tuple(sorted(c)) for c in colors]


def count_free_trees(n: int) -> int:
    if n <= 2:
        return 1
    labeled = [(n, prufer_decode(seq, n)) for seq in itertools.product(range(n), repeat=n - 2)]
    return len(set(refinement_signatures(labeled)))


def naive_pack(host_edges: list[tuple[int, int]], trees: dict[int, list[tuple[int, int]]]) -> bool:
    """Does the family pack? Tries every edge subset per tree, isomorphism by networkx."""
    options = {}
    for i, tedges in trees.items():
        target = nx.Graph(tedges)
        target.add_nodes_from(range(i))
        found = []
        for sub in itertools.combinations(host_edges, i - 1):
            h = nx.Graph(sub)
            if h.number_of_nodes() == i and nx.is_connected(h) and nx.is_isomorphic(h, target):
                found.append(frozenset(sub))
        options[i] = found
    order = sorted(trees, key=lambda i: len(options[i]))

    def rec(idx: int, used: frozenset) -> bool:
        if idx == len(order):
            return True
        return any(not (opt & used) and rec(idx + 1, used | opt) for opt in options[order[idx]])

    return rec(0, frozenset())


def brute_chromatic(n: int, edges: list[tuple[int, int]]) -> int:
    for k in range(0 if n == 0 else 1, n + 1):
        for col in itertools.product(range(k), repeat=n):
            if all(col[u] != col[v] for u, v in edges):
                return k
    return n
