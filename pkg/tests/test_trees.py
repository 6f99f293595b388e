from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import count_free_trees
from treepack.graph import relabel
from treepack.trees import (
    Tree,
    TreeError,
    TreeFamily,
    attach_pieces,
    canonical_form,
    classify,
    enumerate_families,
    enumerate_free_trees,
    find_pending_stars,
    path_tree,
    reattachment_options,
    remove_leaves,
    spider_tree,
    star_tree,
    tree_from_code,
    tree_isomorphism,
)

COUNTS = {1: 1, 2: 1, 3: 1, 4: 2, 5: 3, 6: 6, 7: 11, 8: 23, 9: 47, 10: 106}


@st.composite
def trees(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    parents = [draw(st.integers(0, v - 1)) for v in range(1, n)]
    return Tree(n, ((p, v) for v, p in zip(range(1, n), parents)))


def test_enumeration_counts():
    for n, c in COUNTS.items():
        assert len(enumerate_free_trees(n)) == c


@pytest.mark.parametrize("n", range(2, 8))
def test_enumeration_matches_prufer_oracle(n):
    assert len(enumerate_free_trees(n)) == count_free_trees(n)


def test_enumeration_out_of_range():
    for bad in (0, 13):
        with pytest.raises(ValueError):
            enumerate_free_trees(bad)


def test_enumeration_canonical_and_sorted():
    reps = enumerate_free_trees(8)
    codes = [canonical_form(t) for t in reps]
    assert codes == sorted(codes) and len(set(codes)) == len(codes)


def test_canonical_form_examples():
    assert canonical_form(Tree(3, [(0, 1), (1, 2)])) == canonical_form(Tree(3, [(1, 0), (0, 2)]))
    assert canonical_form(path_tree(4)) != canonical_form(star_tree(4))
    assert len({canonical_form(t) for t in enumerate_free_trees(6)}) == 6


@given(trees(), st.randoms(use_true_random=False))
def test_canonical_form_is_relabeling_invariant(t, rnd):
    perm = list(range(t.n))
    rnd.shuffle(perm)
    u = Tree.from_graph(relabel(t, perm))
    assert canonical_form(u) == canonical_form(t)
    assert classify(u) == classify(t)
    iso = tree_isomorphism(t, u)
    assert iso is not None and all(u.has_edge(iso[a], iso[b]) for a, b in t.edges)
    assert canonical_form(tree_from_code(canonical_form(t))) == canonical_form(t)


def test_classify_examples():
    s = classify(star_tree(5))
    assert s.is_star and s.is_spider
    p5 = classify(path_tree(5))
    assert p5.is_path and p5.is_spider and not p5.is_star
    p6 = classify(path_tree(6))
    assert p6.is_path and not p6.is_spider


def test_pending_star_examples():
    sp = spider_tree([1, 1, 2])  # centre 0, leaves 1, 2, leg 3-4
    stars = find_pending_stars(sp)
    assert [(r.center, r.order, r.neighbor) for r in stars] == [(0, 3, 3), (3, 2, 0)]
    p4 = find_pending_stars(path_tree(4))
    assert [(r.center, r.order) for r in p4] == [(1, 2), (2, 2)]
    double = Tree(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)])
    assert [r.order for r in find_pending_stars(double)] == [3, 3]
    with pytest.raises(TreeError):
        find_pending_stars(star_tree(5))


def test_every_nonstar_has_a_pending_star():
    for n in range(3, 11):
        for t in enumerate_free_trees(n):
            if not classify(t).is_star:
                stars = find_pending_stars(t)
                assert stars
                for r in stars:
                    big = [w for w in t.adj[r.center] if len(t.adj[w]) > 1]
                    assert big == [r.neighbor]
                    assert all(len(t.adj[x]) == 1 for x in r.leaves)


def test_remove_leaves_examples():
    assert canonical_form(remove_leaves(path_tree(5), [4]).tree) == canonical_form(path_tree(4))
    cut = remove_leaves(spider_tree([1, 1, 2]), [0, 1, 2])
    assert cut.tree.n == 2 and cut.pieces[0].attach == 3
    with pytest.raises(TreeError):
        remove_leaves(star_tree(4), [1, 2, 3])
    with pytest.raises(TreeError):
        remove_leaves(path_tree(5), [2])


@settings(max_examples=60)
@given(trees(max_n=9), st.data())
def test_remove_then_reattach_is_identity(t, data):
    leaves = t.leaves()
    pick = data.draw(st.lists(st.sampled_from(leaves), unique=True, min_size=1, max_size=max(1, min(3, t.n - 2))))
    try:
        cut = remove_leaves(t, pick)
    except TreeError:
        return
    opts = reattachment_options(cut, t)
    glued, _ = attach_pieces(cut.tree, opts[0], [p.order for p in cut.pieces])
    assert canonical_form(glued) == canonical_form(t)


def test_family_json_round_trip():
    fam = TreeFamily([path_tree(2), path_tree(3), star_tree(4), path_tree(5)])
    data = json.loads(fam.dumps())
    assert data["k"] == 5 and data["trees"]["2"] == [[0, 1]]
    again = TreeFamily.from_json(data)
    assert again.key() == fam.key() and again.nonstars() == [5]
    with pytest.raises(TreeError):
        TreeFamily.from_json({"k": 4, "trees": {"2": [[0, 1]], "4": [[0, 1], [1, 2], [2, 3]]}})


def test_enumerate_families_counts():
    assert sum(1 for _ in enumerate_families(7)) == 396
    assert sum(1 for _ in enumerate_families(7, max_nonstars=3)) == 296
    rng = random.Random(0)
    fam = rng.choice(list(enumerate_families(6, max_nonstars=3)))
    assert len(fam.nonstars()) <= 3
