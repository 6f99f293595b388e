from __future__ import annotations

import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_chromatic
from treepack.coloring import (
    ColoringError,
    OrderedColoring,
    check_grundy,
    chromatic_number,
    critical_subgraph,
    grundy_refine,
    is_k_colorable,
    peel_tail,
    prepare_host,
)
from treepack.graph import Graph, complete_graph, cycle_graph, min_degree, mycielski, path_graph, random_gnm


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(n, chosen)


def test_chromatic_examples():
    assert chromatic_number(complete_graph(5)).k == 5
    assert chromatic_number(cycle_graph(5)).k == 3
    for k in range(2, 6):
        res = chromatic_number(mycielski(k)[0])
        assert res.ok and res.k == k


def test_chromatic_timeout_is_explicit():
    res = chromatic_number(mycielski(5)[0], budget=50)
    assert res.status == "TIMEOUT" and res.k is None


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_chromatic_matches_brute_force(g):
    res = chromatic_number(g)
    assert res.k == brute_chromatic(g.n, list(g.edges))
    assert all(res.coloring[u] != res.coloring[v] for u, v in g.edges)
    assert max(res.coloring) + 1 == res.k


def test_critical_subgraph_examples():
    k4_pendant = Graph(5, list(complete_graph(4).edges) + [(3, 4)])
    h, kept = critical_subgraph(k4_pendant, 4)
    assert kept == [0, 1, 2, 3] and h == complete_graph(4)
    h, kept = critical_subgraph(complete_graph(5), 5)
    assert kept == list(range(5))
    c7_chord = Graph(7, list(cycle_graph(7).edges) + [(0, 2)])
    h, kept = critical_subgraph(c7_chord, 3)
    assert kept == [0, 1, 2]
    with pytest.raises(ColoringError):
        critical_subgraph(cycle_graph(5), 4)


@pytest.mark.parametrize("seed", range(8))
def test_critical_subgraph_is_critical(seed):
    rng = random.Random(seed)
    g = random_gnm(9, 18, rng)
    k = chromatic_number(g).k
    h, _ = critical_subgraph(g, k)
    assert chromatic_number(h).k == k and min_degree(h) >= k - 1
    for v in range(h.n):
        rest = Graph(h.n, [e for e in h.edges if v not in e])
        # deleting v (edges gone, v isolated) must drop the chromatic number
        assert is_k_colorable(rest, k - 1) is not None


def test_grundy_examples():
    p3 = path_graph(3)
    assert grundy_refine(p3, [[0, 2], [1]]).classes == ((0, 2), (1,))
    k3 = grundy_refine(complete_graph(3), [2, 0, 1])
    assert k3.k == 3 and check_grundy(complete_graph(3), k3)
    c5 = cycle_graph(5)
    for col in itertools.product(range(3), repeat=5):
        if all(col[u] != col[v] for u, v in c5.edges):
            out = grundy_refine(c5, list(col))
            assert out.k == 3 and check_grundy(c5, out)


def test_check_grundy_examples():
    k4 = complete_graph(4)
    for perm in itertools.permutations(range(4)):
        assert check_grundy(k4, OrderedColoring.of([[v] for v in perm]))
    p4 = path_graph(4)
    assert check_grundy(p4, OrderedColoring.of([[0, 2], [1, 3]]))
    # vertex 2 sits in A_3 but has no neighbour in A_2
    assert not check_grundy(p4, OrderedColoring.of([[1, 3], [0], [2]]))
    with pytest.raises(ColoringError):
        check_grundy(p4, OrderedColoring.of([[0, 1]]))


def test_grundy_refine_rejects_improper():
    with pytest.raises(ColoringError):
        grundy_refine(path_graph(3), [[0, 1], [2]])


@pytest.mark.parametrize("seed", range(100))
def test_grundy_refine_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    g = random_gnm(n, rng.randint(0, n * (n - 1) // 2), rng)
    colors = list(range(n))
    rng.shuffle(colors)
    out = grundy_refine(g, colors)
    assert check_grundy(g, out) and out.k <= n


def test_peel_tail_examples():
    k4 = complete_graph(4)
    c = OrderedColoring.of([[0], [1], [2], [3]])
    h, cc, _ = peel_tail(k4, c, 4)
    assert h == k4 and cc == c
    h, cc, mapping = peel_tail(k4, c, 2)
    assert h == complete_graph(2) and cc.classes == ((0,), (1,)) and mapping == {2: 0, 3: 1}
    g, col = mycielski(4)
    gc = grundy_refine(g, col)
    h, cc, _ = peel_tail(g, gc, 3)
    assert check_grundy(h, cc)


def test_peel_tail_can_lose_min_degree():
    # Grundy 3-coloring of C_5 whose top two classes leave vertex 1 isolated;
    # this is why each recursion level restricts to a core again.
    c5 = cycle_graph(5)
    c = OrderedColoring.of([[0, 2], [1, 3], [4]])
    assert check_grundy(c5, c)
    h, cc, mapping = peel_tail(c5, c, 2)
    assert check_grundy(h, cc)
    assert min_degree(h) == 0 and h.degree(mapping[1]) == 0


def test_prepare_host_restores_min_degree():
    c5 = cycle_graph(5)
    host = prepare_host(c5, [1, 3, 4], [[1, 3], [4]], 2)
    assert host.k == 2 and host.min_degree() >= 1 and 1 not in host.vertices
    with pytest.raises(ColoringError):
        prepare_host(path_graph(3), [0, 1, 2], [[0], [1], [2]], 3)


def test_ordered_coloring_json():
    c = OrderedColoring.of([[2, 0], [1]])
    assert json.loads(c.dumps()) == {"classes": [[0, 2], [1]]}
    assert OrderedColoring.from_json(c.to_json()) == c
