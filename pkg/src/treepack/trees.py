"""Free trees: canonical forms, enumeration, and structural classifiers.

A tree is a :class:`~treepack.graph.Graph` that is connected with ``n - 1``
edges. A family is the sequence T_2..T_k with ``|V(T_i)| = i``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .graph import Edge, Graph, GraphError, is_connected

MAX_ENUM_N = 12


class TreeError(ValueError):
    pass


class Tree(Graph):
    __slots__ = ()

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        super().__init__(n, edges)
        if n < 1:
            raise TreeError("a tree needs at least one vertex")
        if self.m != n - 1 or not is_connected(self):
            raise TreeError(f"not a tree: n={n}, m={self.m}")

    @classmethod
    def from_graph(cls, g: Graph) -> "Tree":
        return cls(g.n, g.edges)

    def leaves(self) -> list[int]:
        return [v for v in range(self.n) if len(self.adj[v]) == 1]

    def __repr__(self) -> str:
        return f"Tree({self.n}, {list(self.edges)})"


def path_tree(n: int) -> Tree:
    return Tree(n, ((i, i + 1) for i in range(n - 1)))


def star_tree(n: int) -> Tree:
    return Tree(n, ((0, i) for i in range(1, n)))


def spider_tree(legs: Sequence[int]) -> Tree:
    """Spider with centre 0 and one leg per entry, of the given lengths."""
    edges = []
    nxt = 1
    for length in legs:
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return Tree(nxt, edges)


# ---------------------------------------------------------------------------
# canonical forms (AHU encoding rooted at a centre)


def centers(t: Graph) -> list[int]:
    """The one or two centres of a tree, found by stripping leaves."""
    n = t.n
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in t.adj]
    layer = [v for v in range(n) if deg[v] <= 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in t.adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def rooted_code(t: Graph, root: int, parent: int = -1) -> str:
    # iterative post-order, deep paths would hit the recursion limit otherwise
    codes: dict[int, str] = {}
    stack = [(root, parent, False)]
    while stack:
        v, p, done = stack.pop()
        if done:
            codes[v] = "(" + "".join(sorted(codes[w] for w in t.adj[v] if w != p)) + ")"
            continue
        stack.append((v, p, True))
        stack.extend((w, v, False) for w in t.adj[v] if w != p)
    return codes[root]


def canonical_form(t: Graph) -> str:
    """Isomorphism-complete string for a tree: equal iff the trees are isomorphic."""
    return min(rooted_code(t, c) for c in centers(t))


def tree_from_code(code: str) -> Tree:
    """Build the tree for a rooted code; the root gets id 0, ids in preorder."""
    edges = []
    stack: list[int] = []
    nxt = 0
    for ch in code:
        if ch == "(":
            if stack:
                edges.append((stack[-1], nxt))
            stack.append(nxt)
            nxt += 1
        elif ch == ")":
            stack.pop()
        else:
            raise TreeError(f"bad character {ch!r} in tree code")
    return Tree(nxt, edges)


def tree_isomorphism(t1: Graph, t2: Graph) -> dict[int, int] | None:
    """An explicit isomorphism t1 -> t2 as a vertex dict, or None."""
    if t1.n != t2.n:
        return None
    c1 = centers(t1)
    for c2 in centers(t2):
        if rooted_code(t1, c1[0]) != rooted_code(t2, c2):
            continue
        mapping: dict[int, int] = {}
        stack = [(c1[0], -1, c2, -1)]
        while stack:
            a, pa, b, pb = stack.pop()
            mapping[a] = b
            kids1 = sorted((rooted_code(t1, w, a), w) for w in t1.adj[a] if w != pa)
            kids2 = sorted((rooted_code(t2, w, b), w) for w in t2.adj[b] if w != pb)
            for (_, w1), (_, w2) in zip(kids1, kids2):
                stack.append((w1, a, w2, b))
        return mapping
    return None


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def _codes(n: int) -> tuple[str, ...]:
    if n == 1:
        return ("()",)
    found = set()
    for code in _codes(n - 1):
        base = tree_from_code(code)
        for v in range(base.n):
            grown = Graph(n, base.edges + ((v, n - 1),))
            found.add(canonical_form(grown))
    return tuple(sorted(found))


def enumerate_free_trees(n: int) -> list[Tree]:
    """One representative per isomorphism class of trees on ``n`` vertices.

    Representatives are built from their canonical code (centre = vertex 0)
    and listed in canonical-code order.
    """
    if not 1 <= n <= MAX_ENUM_N:
        raise TreeError(f"tree enumeration supports 1 <= n <= {MAX_ENUM_N}, got {n}")
    return [tree_from_code(c) for c in _codes(n)]


# ---------------------------------------------------------------------------
# classifiers


@dataclass(frozen=True)
class TreeShape:
    is_star: bool
    is_path: bool
    is_spider: bool


def is_star(t: Graph) -> bool:
    return t.n >= 2 and any(len(a) == t.n - 1 for a in t.adj)


def is_path(t: Graph) -> bool:
    return all(len(a) <= 2 for a in t.adj)


def spider_centers(t: Graph) -> list[int]:
    out = []
    for c in range(t.n):
        ok = True
        for v in range(t.n):
            if v == c:
                continue
            if sum(1 for w in t.adj[v] if w != c) > 1:
                ok = False
                break
        if ok:
            out.append(c)
    return out


def is_spider(t: Graph) -> bool:
    return bool(spider_centers(t))


def classify(t: Graph) -> TreeShape:
    if t.n < 2:
        raise TreeError("classify needs at least 2 vertices")
    return TreeShape(is_star(t), is_path(t), is_spider(t))


@dataclass(frozen=True)
class PendingStar:
    center: int
    leaves: tuple[int, ...]
    neighbor: int

    @property
    def order(self) -> int:
        return 1 + len(self.leaves)

    @property
    def vertices(self) -> tuple[int, ...]:
        return (self.center,) + self.leaves


def find_pending_stars(t: Graph) -> list[PendingStar]:
    """Every vertex with exactly one non-leaf neighbour and at least one leaf."""
    if t.n < 3 or is_star(t):
        raise TreeError("a star has no pending star")
    deg = [len(a) for a in t.adj]
    out = []
    for x in range(t.n):
        big = [w for w in t.adj[x] if deg[w] > 1]
        small = tuple(w for w in t.adj[x] if deg[w] == 1)
        if len(big) == 1 and small:
            out.append(PendingStar(x, small, big[0]))
    return out


def leaf_supports(t: Graph) -> list[int]:
    """Vertices adjacent to at least one leaf, ascending."""
    return sorted({t.adj[v][0] for v in range(t.n) if len(t.adj[v]) == 1})


def leaf_at(t: Graph, support: int, avoid: Iterable[int] = ()) -> int:
    """Smallest leaf hanging off ``support`` and not in ``avoid``."""
    bad = set(avoid)
    for w in t.adj[support]:
        if len(t.adj[w]) == 1 and w not in bad:
            return w
    raise TreeError(f"vertex {support} has no available leaf")


# ---------------------------------------------------------------------------
# cutting pieces off and gluing them back


@dataclass(frozen=True)
class Piece:
    """A star hanging off ``attach`` through ``center``; a bare leaf has no leaves."""

    attach: int
    center: int
    leaves: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return 1 + len(self.leaves)


@dataclass(frozen=True)
class TreeCut:
    tree: Tree
    new_to_old: tuple[int, ...]
    pieces: tuple[Piece, ...]

    def old_to_new(self) -> dict[int, int]:
        return {old: new for new, old in enumerate(self.new_to_old)}


def remove_leaves(t: Tree, victims: Iterable[int]) -> TreeCut:
    """Remove leaves and/or whole pending stars from ``t``.

    Each connected piece of ``victims`` must be a single leaf of ``t`` or a
    pending-star centre together with all of its leaves. The remainder must be
    a tree on at least two vertices. Pieces record where they were attached.
    """
    dead = set(victims)
    if not dead <= set(range(t.n)):
        raise TreeError(f"victims {sorted(dead)} not all in tree")
    keep = [v for v in range(t.n) if v not in dead]
    if len(keep) < 2:
        raise TreeError(f"removing {sorted(dead)} leaves fewer than two vertices")
    deg = [len(a) for a in t.adj]
    pieces = []
    seen: set[int] = set()
    for v in sorted(dead):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            a = stack.pop()
            for w in t.adj[a]:
                if w in dead and w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        outside = [(a, w) for a in comp for w in t.adj[a] if w not in dead]
        if len(outside) != 1:
            raise TreeError(f"removing {sorted(comp)} would disconnect the tree")
        center, attach = outside[0]
        leaves = tuple(sorted(comp - {center}))
        if len(comp) == 1:
            if deg[center] != 1:
                raise TreeError(f"vertex {center} is not a leaf")
        else:
            all_leaves = {w for w in t.adj[center] if deg[w] == 1}
            if set(leaves) != all_leaves or deg[attach] <= 1:
                raise TreeError(f"{sorted(comp)} is not a whole pending star")
        pieces.append(Piece(attach, center, leaves))
    index = {old: new for new, old in enumerate(keep)}
    rest = Tree(len(keep), ((index[u], index[v]) for u, v in t.edges if u in index and v in index))
    return TreeCut(rest, tuple(keep), tuple(pieces))


def attach_pieces(
    base: Graph, attachments: Sequence[int], orders: Sequence[int]
) -> tuple[Tree, list[tuple[int, list[int]]]]:
    """Glue stars of the given orders onto ``base`` at the given vertices.

    New vertices are numbered after ``base``'s. Returns the glued tree and, per
    piece, ``(center_id, leaf_ids)``.
    """
    edges = list(base.edges)
    nxt = base.n
    placed = []
    for at, order in zip(attachments, orders):
        center = nxt
        edges.append((at, center))
        nxt += 1
        leaves = []
        for _ in range(order - 1):
            edges.append((center, nxt))
            leaves.append(nxt)
            nxt += 1
        placed.append((center, leaves))
    return Tree(nxt, edges), placed


def reattachment_options(cut: TreeCut, target: Graph) -> list[tuple[int, ...]]:
    """Attachment tuples (in ``cut.tree`` ids) that rebuild a tree isomorphic to ``target``.

    The tuple the cut was made at comes first; the rest follow in
    lexicographic order.
    """
    return list(_reattachment_options(cut.tree, cut.new_to_old, cut.pieces, canonical_form(target)))


def _reattachment_options(base, new_to_old, pieces, want) -> Iterator[tuple[int, ...]]:
    old_to_new = {old: new for new, old in enumerate(new_to_old)}
    orders = [p.order for p in pieces]
    original = tuple(old_to_new[p.attach] for p in pieces)
    yield original
    for combo in itertools.product(range(base.n), repeat=len(pieces)):
        if combo == original:
            continue
        glued, _ = attach_pieces(base, combo, orders)
        if canonical_form(glued) == want:
            yield combo


# ---------------------------------------------------------------------------
# families


class TreeFamily:
    """The sequence T_2..T_k, indexed by order."""

    __slots__ = ("k", "trees")

    def __init__(self, trees: Mapping[int, Tree] | Sequence[Tree]):
        if isinstance(trees, Mapping):
            items = {int(i): t for i, t in trees.items()}
        else:
            items = {t.n: t for t in trees}
            if len(items) != len(trees):
                raise TreeError("family has two trees of the same order")
        k = max(items, default=1)
        if sorted(items) != list(range(2, k + 1)):
            raise TreeError(f"family orders must be exactly 2..{k}, got {sorted(items)}")
        for i, t in items.items():
            if not isinstance(t, Tree):
                t = items[i] = Tree.from_graph(t)
            if t.n != i:
                raise TreeError(f"slot {i} holds a tree on {t.n} vertices")
        self.k = k
        self.trees: dict[int, Tree] = dict(sorted(items.items()))

    def __getitem__(self, i: int) -> Tree:
        return self.trees[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def nonstars(self) -> list[int]:
        return [i for i, t in self.trees.items() if not is_star(t)]

    def total_edges(self) -> int:
        return sum(i - 1 for i in self.trees)

    def key(self) -> tuple[str, ...]:
        return tuple(canonical_form(self.trees[i]) for i in self.trees)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "trees": {str(i): [list(e) for e in t.edges] for i, t in self.trees.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TreeFamily":
        try:
            trees = {
                int(i): Tree(int(i), (tuple(e) for e in edges))
                for i, edges in data["trees"].items()
            }
        except (KeyError, TypeError, ValueError, GraphError) as exc:
            raise TreeError(f"malformed family JSON: {exc}") from exc
        fam = cls(trees)
        if "k" in data and int(data["k"]) != fam.k:
            raise TreeError(f"family declares k={data['k']} but holds trees up to {fam.k}")
        return fam

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __repr__(self) -> str:
        return f"TreeFamily(k={self.k}, nonstars={self.nonstars()})"


def enumerate_families(k: int, max_nonstars: int | None = None) -> Iterator[TreeFamily]:
    """All families T_2..T_k from the free-tree representatives, in product order."""
    pools = [enumerate_free_trees(i) for i in range(2, k + 1)]
    for combo in itertools.product(*pools):
        fam = TreeFamily(list(combo))
        if max_nonstars is None or len(fam.nonstars()) <= max_nonstars:
            yield fam
