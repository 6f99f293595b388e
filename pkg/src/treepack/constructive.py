"""Inductive packing of T_2..T_k into a k-chromatic graph when at most three trees are not stars.

Each level works on a host with a Grundy k-coloring A_1..A_k and minimum
degree at least k-1. A reduction plan trims leaves and pending stars from up
to three non-stars and drops t stars; the trimmed family is packed into the
top k-t classes, and the trimmed parts plus the dropped stars are then laid
on edges that touch the bottom classes A_1..A_t, which the inner packing
never uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .coloring import (
    ColoringError,
    OrderedColoring,
    PreparedHost,
    _grundy_ok,
    chromatic_number,
    classes_from_colors,
    critical_subgraph,
    is_proper,
    prepare_host,
)
from .graph import Edge, Graph, norm_edge
from .packing import Packing
from .trees import (
    Tree,
    TreeCut,
    TreeFamily,
    attach_pieces,
    find_pending_stars,
    is_spider,
    is_star,
    leaf_at,
    leaf_supports,
    reattachment_options,
    remove_leaves,
    tree_isomorphism,
)

CLAIM1 = "CLAIM1"
CLAIM2 = "CLAIM2"
CLAIM3 = "CLAIM3"
CLAIM4 = "CLAIM4"
CLAIM5 = "CLAIM5"
CASE1 = "CASE1"
CASE2_1 = "CASE2_1"
CASE2_2_1 = "CASE2_2_1"
CASE2_2_2_1 = "CASE2_2_2_1"
CASE2_2_2_2 = "CASE2_2_2_2"
CASE2_3_1 = "CASE2_3_1"
CASE2_3_2_1 = "CASE2_3_2_1"
CASE2_3_2_2 = "CASE2_3_2_2"
BASE_K_LE_3 = "BASE_K_LE_3"

CASE_TAGS = (
    CLAIM1, CLAIM2, CLAIM3, CLAIM4, CLAIM5, CASE1, CASE2_1, CASE2_2_1,
    CASE2_2_2_1, CASE2_2_2_2, CASE2_3_1, CASE2_3_2_1, CASE2_3_2_2, BASE_K_LE_3,
)

DEFAULT_COMPLETION_BUDGET = 200_000


class PackingPreconditionError(ValueError):
    pass


class DispatchError(RuntimeError):
    """No case applies. The case analysis is total, so this is a bug."""


class CompletionError(RuntimeError):
    """A finishing step found no uncolored edge where one should exist."""

    def __init__(self, message: str, state: dict):
        super().__init__(message)
        self.state = state


class InvariantError(AssertionError):
    pass


# ---------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class PieceSpec:
    """One trimmed piece: its tree vertices, a name, and preferred classes for its centre."""

    vertices: tuple[int, ...]
    name: str
    hint: tuple[int, ...] = (1,)


@dataclass(frozen=True)
class Removal:
    order: int
    pieces: tuple[PieceSpec, ...]

    @property
    def victims(self) -> tuple[int, ...]:
        return tuple(sorted(v for p in self.pieces for v in p.vertices))


@dataclass(frozen=True)
class ReductionPlan:
    case_tag: str
    k: int
    removals: tuple[Removal, ...] = ()
    deferred_stars: tuple[int, ...] = ()
    star_hints: tuple[tuple[int, ...], ...] = ()
    # tree vertex ids the case names (u, v, x, y, w, z, u_i, x_i), per tree order
    anchors: Mapping[int, Mapping[str, int]] = field(default_factory=dict)

    @property
    def recursion_depth_drop(self) -> int:
        return len(self.deferred_stars)

    t = recursion_depth_drop

    def removed_edges(self) -> int:
        return sum(len(r.victims) for r in self.removals)

    def star_edges(self) -> int:
        return sum(s - 1 for s in self.deferred_stars)

    def describe(self) -> dict:
        return {
            "case": self.case_tag,
            "k": self.k,
            "t": self.t,
            "removals": {
                r.order: [{"name": p.name, "vertices": list(p.vertices)} for p in r.pieces]
                for r in self.removals
            },
            "deferred_stars": list(self.deferred_stars),
        }


def _leaf_piece(t: Tree, support: int, name: str, hint=(1,), avoid=()) -> PieceSpec:
    return PieceSpec((leaf_at(t, support, avoid),), name, tuple(hint))


def _star_piece(r, name: str, hint=(1,)) -> PieceSpec:
    return PieceSpec(r.vertices, name, tuple(hint))


def _distinct_supports(t: Tree, count: int, avoid=()) -> list[int]:
    sup = [s for s in leaf_supports(t) if s not in set(avoid)]
    if len(sup) < count:
        raise DispatchError(f"tree {t!r} has fewer than {count} leaf supports")
    return sup[:count]


def _pair_with_distinct_neighbors(stars):
    for a, b in itertools.combinations(stars, 2):
        if a.neighbor != b.neighbor and not set(a.vertices) & set(b.vertices):
            return a, b
    return None


def _smallest(stars, pred):
    pool = [s for s in stars if pred(s)]
    return min(pool, key=lambda s: (s.order, s.center)) if pool else None


def select_reduction(family: TreeFamily, k: int | None = None) -> ReductionPlan:
    """Pick the claim or case that applies, in the order the induction tries them.

    Claims 1-4 first, Claim 5 for k <= 6, then Case 1 / Case 2 and sub-cases.
    Ties go to the smallest pending-star order, then the smallest centre id.
    """
    k = family.k if k is None else k
    T = family.trees
    if len(family.nonstars()) > 3:
        raise PackingPreconditionError(f"family has {len(family.nonstars())} non-stars, at most 3 allowed")
    if k <= 3:
        return ReductionPlan(BASE_K_LE_3, k)
    star = {i: is_star(T[i]) for i in T}

    if star[k]:
        return ReductionPlan(CLAIM1, k, (), (k,), ((1,),))

    Tk = T[k]
    if star[k - 1]:
        u = leaf_supports(Tk)[0]
        return ReductionPlan(
            CLAIM2, k, (Removal(k, (_leaf_piece(Tk, u, "u"),)),), (k - 1,), ((1,),),
            {k: {"u": u}},
        )

    if k >= 5 and star[k - 2] and star[k - 3]:
        u, v = _distinct_supports(Tk, 2)
        x, y = _distinct_supports(T[k - 1], 2)
        return ReductionPlan(
            CLAIM3, k,
            (
                Removal(k, (_leaf_piece(Tk, u, "u", (1, 2)), _leaf_piece(Tk, v, "v", (2, 1)))),
                Removal(k - 1, (_leaf_piece(T[k - 1], x, "x", (1, 2)), _leaf_piece(T[k - 1], y, "y", (2, 1)))),
            ),
            (k - 2, k - 3), ((1, 2), (2, 1)),
            {k: {"u": u, "v": v}, k - 1: {"x": x, "y": y}},
        )

    pk = find_pending_stars(Tk)
    r4 = _smallest(pk, lambda s: k - s.order >= 2 and star[k - s.order])
    if r4 is not None:
        return ReductionPlan(
            CLAIM4, k, (Removal(k, (_star_piece(r4, "R", (1,)),)),), (k - r4.order,), ((1,),),
            {k: {"u": r4.neighbor}},
        )

    if k <= 6:
        if k != 6 or star[5] or star[4]:
            raise DispatchError(f"k={k}: claims 1-4 should have applied to {family!r}")
        r = _smallest(pk, lambda s: s.order == 2)
        if r is None:
            raise DispatchError("T_6 has no pending star of order 2")
        v = leaf_supports(T[4])[0]
        return ReductionPlan(
            CLAIM5, k,
            (
                Removal(6, (_star_piece(r, "R", (1,)),)),
                Removal(4, (_leaf_piece(T[4], v, "v", (1,)),)),
            ),
            (3,), ((1,),),
            {6: {"u": r.neighbor}, 4: {"v": v}},
        )

    n2, n3 = not star[k - 2], not star[k - 3]
    if n2 == n3 or len(family.nonstars()) != 3:
        raise DispatchError(f"k={k}: expected exactly one of T_k-2, T_k-3 to be a non-star in {family!r}")
    orders = {s.order for s in pk}

    if n3:
        if orders != {3}:
            raise DispatchError(f"Case 1 expects only order-3 pending stars in T_k, got {sorted(orders)}")
        R = min(pk, key=lambda s: s.center)
        u = R.neighbor
        rv = set(R.vertices)
        v = next(
            (s for s in leaf_supports(Tk)
             if s != u and s not in rv and any(len(Tk.adj[w]) == 1 and w not in rv for w in Tk.adj[s])),
            None,
        )
        if v is None:
            raise DispatchError("Case 1: no leaf outside R with a neighbour other than u")
        x = leaf_supports(T[k - 1])[0]
        return ReductionPlan(
            CASE1, k,
            (
                Removal(k, (_star_piece(R, "R", (2,)), _leaf_piece(Tk, v, "v", (1,), rv))),
                Removal(k - 1, (_leaf_piece(T[k - 1], x, "x", (1, 2)),)),
            ),
            (k - 2, k - 4), ((1, 2), (2, 1)),
            {k: {"u": u, "v": v}, k - 1: {"x": x}},
        )

    if orders != {2}:
        raise DispatchError(f"Case 2 expects only order-2 pending stars in T_k, got {sorted(orders)}")
    T1, T2 = T[k - 1], T[k - 2]

    if not is_spider(Tk):
        pair = _pair_with_distinct_neighbors(pk)
        if pair is None:
            raise DispatchError("Case 2.1: no two pending stars with distinct neighbours")
        R1, R2 = pair
        x, y = _distinct_supports(T1, 2)
        return ReductionPlan(
            CASE2_1, k,
            (
                Removal(k, (_star_piece(R1, "R1", (1,)), _star_piece(R2, "R2", (2,)))),
                Removal(k - 1, (_leaf_piece(T1, x, "x", (1, 2)), _leaf_piece(T1, y, "y", (2, 1)))),
            ),
            (k - 3, k - 4), ((1,), (2,)),
            {k: {"u": R1.neighbor, "v": R2.neighbor}, k - 1: {"x": x, "y": y}},
        )

    u1, u2, u3 = _distinct_supports(Tk, 3)
    p1 = find_pending_stars(T1)
    p2 = find_pending_stars(T2)

    def tk_removal(h1, h2, h3) -> Removal:
        return Removal(k, (
            _leaf_piece(Tk, u1, "u1", h1), _leaf_piece(Tk, u2, "u2", h2), _leaf_piece(Tk, u3, "u3", h3),
        ))

    R = _smallest(p1, lambda s: s.order >= 4)
    if R is not None:
        r = R.order
        w, z = _distinct_supports(T2, 2)
        return ReductionPlan(
            CASE2_2_1, k,
            (
                tk_removal((2,), (3,), (1,)),
                Removal(k - 1, (_star_piece(R, "R", (1,)),)),
                Removal(k - 2, (_leaf_piece(T2, w, "w", (2, 3)), _leaf_piece(T2, z, "z", (3, 2)))),
            ),
            (k - r - 1, k - 3, k - 4), ((1,), (2, 3), (3, 2)),
            {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x": R.neighbor}, k - 2: {"w": w, "z": z}},
        )

    R = _smallest(p1, lambda s: s.order == 3)
    if R is not None:
        R2 = _smallest(p2, lambda s: s.order >= 3)
        if R2 is not None:
            r = R2.order
            return ReductionPlan(
                CASE2_2_2_1, k,
                (
                    tk_removal((2,), (1,), (3,)),
                    Removal(k - 1, (_star_piece(R, "R", (3,)),)),
                    Removal(k - 2, (_star_piece(R2, "R'", (1,)),)),
                ),
                (k - r - 2, k - 4, k - 3), ((1,), (2, 3), (3, 2)),
                {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x": R.neighbor}, k - 2: {"w": R2.neighbor}},
            )
        R2 = min(p2, key=lambda s: s.center)
        rv = set(R2.vertices)
        z = _leaf_support_outside(T2, R2.neighbor, rv)
        return ReductionPlan(
            CASE2_2_2_2, k,
            (
                tk_removal((2,), (1,), (3,)),
                Removal(k - 1, (_star_piece(R, "R", (3,)),)),
                Removal(k - 2, (_star_piece(R2, "R'", (1,)), _leaf_piece(T2, z, "z", (2,), rv))),
            ),
            (k - 5, k - 4, k - 3), ((1,), (2,), (3,)),
            {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x": R.neighbor}, k - 2: {"w": R2.neighbor, "z": z}},
        )

    if {s.order for s in p1} != {2}:
        raise DispatchError("Case 2.2.3 expects only order-2 pending stars in T_k-1")

    if not is_spider(T1):
        pair = _pair_with_distinct_neighbors(p1)
        if pair is None:
            raise DispatchError("Case 2.2.3.1: no two pending stars with distinct neighbours")
        Ra, Rb = pair
        w, z = _distinct_supports(T2, 2)
        return ReductionPlan(
            CASE2_3_1, k,
            (
                tk_removal((2, 1), (1, 2), (3,)),
                Removal(k - 1, (_star_piece(Ra, "R", (1,)), _star_piece(Rb, "R'", (2,)))),
                Removal(k - 2, (_leaf_piece(T2, w, "w", (1, 2, 3)), _leaf_piece(T2, z, "z", (2, 3, 1)))),
            ),
            (k - 5, k - 4, k - 3), ((1,), (2,), (3,)),
            {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x": Ra.neighbor, "y": Rb.neighbor}, k - 2: {"w": w, "z": z}},
        )

    x1, x2, x3 = _distinct_supports(T1, 3)
    t1_removal = Removal(k - 1, (
        _leaf_piece(T1, x1, "x1", (2, 3)), _leaf_piece(T1, x2, "x2", (1,)), _leaf_piece(T1, x3, "x3", (3, 2)),
    ))
    R2 = _smallest(p2, lambda s: s.order >= 3)
    if R2 is not None:
        r = R2.order
        return ReductionPlan(
            CASE2_3_2_1, k,
            (
                tk_removal((2,), (3,), (1,)),
                t1_removal,
                Removal(k - 2, (_star_piece(R2, "R", (1,)),)),
            ),
            (k - r - 2, k - 4, k - 3), ((1,), (2, 3), (3, 2)),
            {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x1": x1, "x2": x2, "x3": x3}, k - 2: {"w": R2.neighbor}},
        )

    R2 = min(p2, key=lambda s: s.center)
    rv = set(R2.vertices)
    z = _leaf_support_outside(T2, R2.neighbor, rv)
    return ReductionPlan(
        CASE2_3_2_2, k,
        (
            tk_removal((2,), (1, 3), (3, 1)),
            Removal(k - 1, (
                _leaf_piece(T1, x1, "x1", (2,)), _leaf_piece(T1, x2, "x2", (3,)), _leaf_piece(T1, x3, "x3", (1,)),
            )),
            Removal(k - 2, (_star_piece(R2, "R", (2,)), _leaf_piece(T2, z, "z", (1,), rv))),
        ),
        (k - 5, k - 4, k - 3), ((1,), (2,), (3,)),
        {k: {"u1": u1, "u2": u2, "u3": u3}, k - 1: {"x1": x1, "x2": x2, "x3": x3}, k - 2: {"w": R2.neighbor, "z": z}},
    )


def _leaf_support_outside(t: Tree, w: int, block: set[int]) -> int:
    for s in leaf_supports(t):
        if s != w and s not in block and any(len(t.adj[x]) == 1 and x not in block for x in t.adj[s]):
            return s
    raise DispatchError(f"no leaf support other than {w} outside {sorted(block)}")


# ---------------------------------------------------------------------------
# applying a plan to the family


@dataclass
class Reduction:
    family: TreeFamily
    plan: ReductionPlan
    cuts: dict[int, TreeCut]        # original order -> cut
    slot_of: dict[int, int]         # original order -> slot in the reduced family
    hints: dict[int, list[tuple[int, ...]]]  # original order -> per-piece class hints (cut order)


def apply_reduction(family: TreeFamily, plan: ReductionPlan) -> Reduction:
    """Cut the planned pieces and re-slot every tree by its new order."""
    k = plan.k
    if plan.case_tag == BASE_K_LE_3:
        raise ValueError("the base case has nothing to reduce")
    slots: dict[int, Tree] = {}
    slot_of: dict[int, int] = {}
    cuts: dict[int, TreeCut] = {}
    hints: dict[int, list[tuple[int, ...]]] = {}
    deferred = set(plan.deferred_stars)
    for i in plan.deferred_stars:
        if not is_star(family[i]):
            raise ValueError(f"{plan.case_tag}: deferred tree T_{i} is not a star")
    removal_of = {r.order: r for r in plan.removals}
    for i, tree in family.trees.items():
        if i in deferred:
            continue
        if i in removal_of:
            rem = removal_of[i]
            cut = remove_leaves(tree, rem.victims)
            by_center = {p.center: p for p in cut.pieces}
            ordered, piece_hints = [], []
            for spec in rem.pieces:
                match = [by_center[v] for v in spec.vertices if v in by_center]
                if len(match) != 1:
                    raise ValueError(f"{plan.case_tag}: piece {spec.name} of T_{i} is not a leaf or pending star")
                ordered.append(match[0])
                piece_hints.append(spec.hint)
            cut = TreeCut(cut.tree, cut.new_to_old, tuple(ordered))
            cuts[i] = cut
            hints[i] = piece_hints
            slot = cut.tree.n
        else:
            slot = i
        if slot in slots:
            raise ValueError(f"{plan.case_tag}: slot collision at order {slot} (T_{i})")
        slots[slot] = cuts[i].tree if i in cuts else tree
        slot_of[i] = slot
    if sorted(slots) != list(range(2, k - plan.t + 1)):
        raise ValueError(f"{plan.case_tag}: reduced orders {sorted(slots)} are not 2..{k - plan.t}")
    return Reduction(TreeFamily(slots), plan, cuts, slot_of, hints)


# ---------------------------------------------------------------------------
# finishing a level


@dataclass
class _Ctx:
    host: PreparedHost
    t: int
    low: set[int]
    cls: dict[int, int]              # vertex -> 1-based class index
    colored: set[Edge]
    budget: int
    nodes: int = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Exhausted

    def free(self, a: int, b: int) -> bool:
        return norm_edge(a, b) not in self.colored

    def touches_low(self, a: int, b: int) -> bool:
        return a in self.low or b in self.low

    def rank(self, v: int, hint: Sequence[int]) -> tuple[int, int]:
        c = self.cls.get(v)
        if c is None or v not in self.low:
            return (len(hint) + 1, v)
        return (hint.index(c) if c in hint else len(hint), v)


class _Exhausted(Exception):
    pass


@dataclass
class _CutTask:
    order: int
    cut: TreeCut
    base_emb: dict[int, int]           # cut.tree vertex -> host vertex
    options: list[tuple[int, ...]]
    hints: list[tuple[int, ...]]


def realize_wlog(ctx: _Ctx, tasks: Sequence[_CutTask], stars: Sequence[int], star_hints) -> tuple[list, list] | None:
    """Bounded backtracking over the vertex choices a finishing step leaves open.

    For each trimmed tree it picks an attachment tuple (the original one
    first) and images for every piece centre and leaf; then it places the
    dropped stars at bottom-class vertices. Every new edge must be uncolored
    and touch A_1..A_t. Returns per-task choices and star placements, or None.
    """
    chosen: list = [None] * len(tasks)

    def pieces_rec(ti: int) -> Iterator[None]:
        if ti == len(tasks):
            yield None
            return
        task = tasks[ti]
        image = set(task.base_emb.values())
        for combo in task.options:
            picks: list = []
            for _ in _place_pieces(ctx, task, combo, 0, image, picks):
                chosen[ti] = (combo, list(picks))
                yield from pieces_rec(ti + 1)
            chosen[ti] = None

    for _ in pieces_rec(0):
        placed = _place_stars(ctx, stars, star_hints)
        if placed is not None:
            return list(chosen), placed
    return None


def _place_pieces(ctx: _Ctx, task: _CutTask, combo, pi: int, image: set[int], picks: list) -> Iterator[None]:
    if pi == len(task.cut.pieces):
        yield None
        return
    piece = task.cut.pieces[pi]
    hint = task.hints[pi]
    at = task.base_emb[combo[pi]]
    nbrs = ctx.host.nbrs
    centres = sorted(
        (c for c in nbrs[at] if c not in image and ctx.free(at, c) and ctx.touches_low(at, c)),
        key=lambda c: ctx.rank(c, hint),
    )
    need = len(piece.leaves)
    for c in centres:
        ctx.tick()
        e0 = norm_edge(at, c)
        ctx.colored.add(e0)
        image.add(c)
        leaf_pool = sorted(
            (d for d in nbrs[c] if d not in image and ctx.free(c, d) and ctx.touches_low(c, d)),
            key=lambda d: (d in ctx.low, d),
        )
        for leaves in itertools.combinations(leaf_pool, need):
            ctx.tick()
            es = [norm_edge(c, d) for d in leaves]
            ctx.colored.update(es)
            image.update(leaves)
            picks.append((c, leaves))
            yield from _place_pieces(ctx, task, combo, pi + 1, image, picks)
            picks.pop()
            image.difference_update(leaves)
            ctx.colored.difference_update(es)
        image.discard(c)
        ctx.colored.discard(e0)


def _place_stars(ctx: _Ctx, stars: Sequence[int], star_hints) -> list | None:
    """Choose bottom-class centres and disjoint uncolored edges for each star."""
    if not stars:
        return []
    nbrs = ctx.host.nbrs
    free_at = {v: [w for w in nbrs[v] if ctx.free(v, w)] for v in ctx.low}
    options = []
    for s, hint in zip(stars, star_hints):
        pool = sorted((v for v in ctx.low if len(free_at[v]) >= s - 1), key=lambda v: ctx.rank(v, hint))
        if not pool:
            return None
        options.append(pool)
    for centres in itertools.product(*options):
        ctx.tick()
        alloc = _allocate(centres, [s - 1 for s in stars], free_at)
        if alloc is not None:
            return [(c, ends) for c, ends in zip(centres, alloc)]
    return None


def _allocate(centres, needs, free_at) -> list[list[int]] | None:
    """Bipartite matching of star slots to distinct free edges at their centres."""
    slots = [(si, c) for si, (c, need) in enumerate(zip(centres, needs)) for _ in range(need)]
    owner: dict[Edge, int] = {}

    def augment(slot_idx: int, seen: set[Edge]) -> bool:
        _, c = slots[slot_idx]
        # prefer edges whose far end is not another centre
        for w in sorted(free_at[c], key=lambda w: (w in centres, w)):
            e = norm_edge(c, w)
            if e in seen:
                continue
            seen.add(e)
            if e not in owner or augment(owner[e], seen):
                owner[e] = slot_idx
                return True
        return False

    for idx in range(len(slots)):
        if not augment(idx, set()):
            return None
    out: list[list[int]] = [[] for _ in centres]
    for e, idx in owner.items():
        si, c = slots[idx]
        out[si].append(e[1] if e[0] == c else e[0])
    return [sorted(x) for x in out]


def _embedding_edges(tree: Graph, emb: Mapping[int, int]) -> set[Edge]:
    return {norm_edge(emb[a], emb[b]) for a, b in tree.edges}


def _star_embedding(tree: Tree, centre: int, ends: Sequence[int]) -> dict[int, int]:
    c = max(range(tree.n), key=lambda v: (len(tree.adj[v]), -v))
    emb = {c: centre}
    for leaf, h in zip(tree.adj[c], ends):
        emb[leaf] = h
    return emb


def complete_embedding(
    g: Graph,
    host: PreparedHost,
    family: TreeFamily,
    plan: ReductionPlan,
    red: Reduction,
    sub: Mapping[int, Mapping[int, int]],
    budget: int = DEFAULT_COMPLETION_BUDGET,
) -> dict[int, dict[int, int]]:
    """Extend the inner packing (keyed by reduced slot) to the whole family at this level."""
    t = plan.t
    low = {v for c in host.classes[:t] for v in c}
    cls = {v: i + 1 for i, c in enumerate(host.classes) for v in c}
    colored: set[Edge] = set()
    for slot, emb in sub.items():
        colored |= _embedding_edges(red.family[slot], emb)
    before = len(colored)
    if any(a in low or b in low for a, b in colored):
        raise InvariantError("inner packing used an edge at a bottom class")
    ctx = _Ctx(host, t, low, cls, colored, budget)

    tasks = []
    for i in sorted(red.cuts, reverse=True):
        cut = red.cuts[i]
        tasks.append(_CutTask(i, cut, dict(sub[red.slot_of[i]]), reattachment_options(cut, family[i]), red.hints[i]))

    def dump(reason: str) -> dict:
        return {
            "reason": reason,
            "plan": plan.describe(),
            "classes": [list(c) for c in host.classes],
            "inner": {s: dict(e) for s, e in sub.items()},
            "nodes": ctx.nodes,
        }

    try:
        found = realize_wlog(ctx, tasks, plan.deferred_stars, plan.star_hints)
    except _Exhausted:
        raise CompletionError(f"{plan.case_tag}: completion search exceeded {budget} nodes", dump("budget")) from None
    if found is None:
        raise CompletionError(f"{plan.case_tag}: no uncolored edges realise the finishing step", dump("unsat"))
    choices, star_places = found

    out: dict[int, dict[int, int]] = {}
    for i in family.trees:
        if i in red.cuts or i in plan.deferred_stars:
            continue
        out[i] = dict(sub[red.slot_of[i]])
    for task, (combo, picks) in zip(tasks, choices):
        cut = task.cut
        glued, placed = attach_pieces(cut.tree, combo, [p.order for p in cut.pieces])
        emb = dict(task.base_emb)
        for (c_id, leaf_ids), (c_img, leaf_imgs) in zip(placed, picks):
            emb[c_id] = c_img
            for a, b in zip(leaf_ids, leaf_imgs):
                emb[a] = b
        iso = tree_isomorphism(family[task.order], glued)
        if iso is None:
            raise InvariantError(f"re-attached T_{task.order} is not isomorphic to the original")
        out[task.order] = {v: emb[iso[v]] for v in range(family[task.order].n)}
    for s, (centre, ends) in zip(plan.deferred_stars, star_places):
        out[s] = _star_embedding(family[s], centre, ends)

    total = set()
    for i, emb in out.items():
        es = _embedding_edges(family[i], emb)
        if total & es:
            raise InvariantError(f"{plan.case_tag}: edge reused while finishing")
        total |= es
    if len(total) - before != plan.removed_edges() + plan.star_edges():
        raise InvariantError(f"{plan.case_tag}: edge accounting mismatch")
    return out


# ---------------------------------------------------------------------------
# driver


@dataclass
class _Run:
    g: Graph
    budget: int
    trace: list[dict] = field(default_factory=list)

    def check(self, host: PreparedHost, k: int, depth: int) -> None:
        grundy = _grundy_ok(host.nbrs, host.classes)
        mind = host.min_degree()
        self.trace.append({"depth": depth, "k": k, "n": len(host.vertices), "min_degree": mind, "grundy": grundy})
        if not grundy:
            raise InvariantError(f"depth {depth}: coloring is not Grundy")
        if host.k != k or mind < k - 1:
            raise InvariantError(f"depth {depth}: min degree {mind} < {k - 1}")


def _base(host: PreparedHost, family: TreeFamily) -> dict[int, dict[int, int]]:
    k = family.k
    out: dict[int, dict[int, int]] = {}
    if k < 2:
        return out
    nbrs = host.nbrs
    if k == 2:
        v = host.classes[-1][0]
        out[2] = {0: v, 1: min(nbrs[v])}
        return out
    v = min(host.vertices, key=lambda x: (-len(nbrs[x]), x))
    a, b = sorted(nbrs[v])[:2]
    t3 = family[3]
    mid = next(x for x in range(3) if len(t3.adj[x]) == 2)
    ends = [x for x in range(3) if x != mid]
    out[3] = {mid: v, ends[0]: a, ends[1]: b}
    used = {norm_edge(v, a), norm_edge(v, b)}
    for x in sorted(host.vertices):
        for y in sorted(nbrs[x]):
            if x < y and (x, y) not in used:
                out[2] = {0: x, 1: y}
                return out
    raise CompletionError("base case: no third edge", {"vertices": host.vertices})


def _pack_level(run: _Run, host: PreparedHost, family: TreeFamily, depth: int) -> dict[int, dict[int, int]]:
    k = family.k
    run.check(host, k, depth)
    plan = select_reduction(family)
    run.trace[-1]["case"] = plan.case_tag
    if plan.case_tag == BASE_K_LE_3:
        return _base(host, family)
    red = apply_reduction(family, plan)
    t = plan.t
    top = host.classes[t:]
    sub_host = prepare_host(run.g, [v for c in top for v in c], top, k - t)
    sub = _pack_level(run, sub_host, red.family, depth + 1)
    return complete_embedding(run.g, host, family, plan, red, sub, run.budget)


def pack_constructive(
    g: Graph,
    family: TreeFamily,
    coloring: OrderedColoring | Sequence[int] | None = None,
    *,
    prepare: str = "core",
    fallback: bool = True,
    budget: int = DEFAULT_COMPLETION_BUDGET,
) -> Packing:
    """Pack T_2..T_k (at most 3 non-stars) into a k-chromatic graph ``g``.

    ``coloring`` is a proper k-coloring (per-vertex colors or ordered
    classes); without one, the exact chromatic number is computed and must
    equal k. ``prepare="core"`` restricts to the (k-1)-core before Grundy
    refinement; ``prepare="critical"`` first extracts a vertex-critical
    subgraph. If a finishing step fails, the exhaustive packer is used when
    ``fallback`` is set and the failure is kept in ``meta["falsifications"]``.
    """
    k = family.k
    if len(family.nonstars()) > 3:
        raise PackingPreconditionError(f"constructive packing needs at most 3 non-stars, got {len(family.nonstars())}")
    if k <= 1:
        return Packing(k, {}, {"source": "constructive", "trace": [], "falsifications": []})
    if coloring is None:
        res = chromatic_number(g)
        if not res.ok:
            raise PackingPreconditionError("chromatic number could not be certified within budget")
        if res.k != k:
            raise PackingPreconditionError(f"host has chromatic number {res.k}, family needs {k}")
        classes = classes_from_colors(res.coloring)
    elif isinstance(coloring, OrderedColoring):
        classes = [list(c) for c in coloring.classes]
    else:
        if not is_proper(g, coloring):
            raise PackingPreconditionError("supplied coloring is not proper")
        classes = classes_from_colors(coloring)
    if len(classes) != k:
        raise PackingPreconditionError(f"supplied coloring has {len(classes)} classes, family needs {k}")

    within: list[int] = list(range(g.n))
    if prepare == "critical":
        _, within = critical_subgraph(g, k)
    elif prepare != "core":
        raise ValueError(f"unknown prepare mode {prepare!r}")
    try:
        host = prepare_host(g, within, classes, k)
    except ColoringError as exc:
        raise PackingPreconditionError(str(exc)) from exc

    run = _Run(g, budget)
    falsifications: list[dict] = []
    try:
        embeddings = _pack_level(run, host, family, 0)
    except CompletionError as exc:
        report = {"error": str(exc), "state": exc.state, "family": family.to_json()}
        if not fallback:
            raise
        from .search import pack_exhaustive

        falsifications.append(report)
        res = pack_exhaustive(g, family)
        if not res.sat:
            raise CompletionError(f"fallback search returned {res.status}", report) from exc
        res.packing.meta.update({"trace": run.trace, "falsifications": falsifications})
        return res.packing
    return Packing.from_embeddings(
        k, family.trees, embeddings, source="constructive", trace=run.trace, falsifications=falsifications
    )
