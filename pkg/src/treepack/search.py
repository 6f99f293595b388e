"""Exhaustive backtracking packer and the conjecture sweeps built on it.

Trees are placed largest first. Inside a tree, vertices are placed in BFS
order from a maximum-degree vertex, each one through an unused host edge at
its parent's image. The budget counts search nodes, never wall time.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .coloring import chromatic_number
from .constructive import CompletionError, pack_constructive
from .graph import Graph, complete_graph, dumps, loads
from .packing import Packing
from .trees import Tree, TreeFamily, enumerate_families
from .verify import verify_packing

SAT = "SAT"
UNSAT = "UNSAT"
TIMEOUT = "TIMEOUT"

DEFAULT_BUDGET = 2_000_000


def default_budget() -> int:
    raw = os.environ.get("TREEPACK_BUDGET_NODES")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass
class SearchResult:
    status: str
    packing: Packing | None = None
    nodes: int = 0
    elapsed: float = 0.0

    @property
    def sat(self) -> bool:
        return self.status == SAT


class _OutOfBudget(Exception):
    pass


def _tree_plan(t: Tree) -> tuple[list[int], list[int], list[int]]:
    """BFS order from a max-degree vertex, parent positions, and degrees."""
    deg = [len(a) for a in t.adj]
    root = max(range(t.n), key=lambda v: (deg[v], -v))
    order = [root]
    parent_pos = [-1]
    pos = {root: 0}
    head = 0
    while head < len(order):
        v = order[head]
        kids = sorted((w for w in t.adj[v] if w not in pos), key=lambda w: (-deg[w], w))
        for w in kids:
            pos[w] = len(order)
            order.append(w)
            parent_pos.append(head)
        head += 1
    return order, parent_pos, [deg[v] for v in order]


def pack_exhaustive(
    g: Graph,
    family: TreeFamily,
    budget: int | None = None,
    prune_symmetry: bool = False,
) -> SearchResult:
    """Find an edge-disjoint packing of the family into ``g``, or prove none exists.

    ``prune_symmetry`` only acts on complete hosts: vertices untouched by the
    partial packing are interchangeable there, so just the smallest is tried.
    """
    budget = default_budget() if budget is None else budget
    start = time.perf_counter()
    n = g.n
    orders = sorted(family.trees, reverse=True)
    if sum(i - 1 for i in orders) > g.m:
        return SearchResult(UNSAT, None, 0, time.perf_counter() - start)

    plans = [_tree_plan(family[i]) for i in orders]
    resid = [0] * n
    for u, v in g.edges:
        resid[u] |= 1 << v
        resid[v] |= 1 << u
    rdeg = [bin(r).count("1") for r in resid]
    full_deg = n - 1
    symmetric = prune_symmetry and g.m == n * (n - 1) // 2
    images: list[list[int]] = [[-1] * len(p[0]) for p in plans]
    nodes = 0

    def use(a: int, b: int) -> None:
        resid[a] &= ~(1 << b)
        resid[b] &= ~(1 << a)
        rdeg[a] -= 1
        rdeg[b] -= 1

    def free(a: int, b: int) -> None:
        resid[a] |= 1 << b
        resid[b] |= 1 << a
        rdeg[a] += 1
        rdeg[b] += 1

    def candidates(mask: int, need: int, inside: int) -> Iterable[int]:
        fresh_done = False
        while mask:
            low = mask & -mask
            h = low.bit_length() - 1
            mask ^= low
            if rdeg[h] < need:
                continue
            if symmetric and rdeg[h] == full_deg and not (inside >> h) & 1:
                if fresh_done:
                    continue
                fresh_done = True
            yield h

    def place(ti: int, pos: int, inside: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _OutOfBudget
        order, parent_pos, degs = plans[ti]
        if pos == len(order):
            return ti + 1 == len(plans) or place(ti + 1, 0, 0)
        img = images[ti]
        if pos == 0:
            need = degs[0]
            for h in candidates((1 << n) - 1, need, 0):
                img[0] = h
                if place(ti, 1, 1 << h):
                    return True
            img[0] = -1
            return False
        p = img[parent_pos[pos]]
        for h in candidates(resid[p] & ~inside, degs[pos], inside):
            use(p, h)
            img[pos] = h
            if place(ti, pos + 1, inside | (1 << h)):
                return True
            free(p, h)
        img[pos] = -1
        return False

    try:
        found = place(0, 0, 0) if plans else True
    except _OutOfBudget:
        return SearchResult(TIMEOUT, None, nodes, time.perf_counter() - start)
    elapsed = time.perf_counter() - start
    if not found:
        return SearchResult(UNSAT, None, nodes, elapsed)
    embeddings = {}
    for i, (order, _, _), img in zip(orders, plans, images):
        embeddings[i] = {v: img[p] for p, v in enumerate(order)}
    packing = Packing.from_embeddings(family.k, family.trees, embeddings, source="search")
    return SearchResult(SAT, packing, nodes, elapsed)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class Record:
    host: str
    family: list[str]
    outcome: str
    nodes: int
    elapsed: float | None = None
    verified: bool | None = None
    constructive: str | None = None
    note: str | None = None

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "host": self.host,
            "family": self.family,
            "outcome": self.outcome,
            "nodes": self.nodes,
        }
        if timings:
            out["elapsed"] = round(self.elapsed or 0.0, 6)
        for key in ("verified", "constructive", "note"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


@dataclass
class SweepReport:
    families_total: int = 0
    packed: int = 0
    failures: list[Record] = field(default_factory=list)
    timeouts: list[Record] = field(default_factory=list)
    records: list[Record] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    def add(self, rec: Record) -> None:
        self.records.append(rec)
        self.families_total += 1
        if rec.outcome == SAT and rec.verified is not False and rec.constructive in (None, "ok"):
            self.packed += 1
        elif rec.outcome == TIMEOUT:
            self.timeouts.append(rec)
        else:
            self.failures.append(rec)

    @property
    def clean(self) -> bool:
        return not self.failures and not self.timeouts

    def summary(self) -> dict:
        return {
            "families_total": self.families_total,
            "packed": self.packed,
            "failures": len(self.failures),
            "timeouts": len(self.timeouts),
            "skipped_hosts": len(self.skipped),
        }


def _fan_out(fn: Callable, jobs: Sequence, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _tpc_job(args) -> Record:
    n, fam_json, budget, prune = args
    fam = TreeFamily.from_json(fam_json)
    host = complete_graph(n)
    res = pack_exhaustive(host, fam, budget, prune_symmetry=prune)
    verified = None
    note = None
    if res.sat:
        verified = verify_packing(host, fam, res.packing).ok
        if res.packing.edge_count() != n * (n - 1) // 2:
            verified = False
            note = "not a perfect packing"
    return Record(f"K{n}", list(fam.key()), res.status, res.nodes, res.elapsed, verified, None, note)


def sweep_tpc(n: int, budget: int | None = None, jobs: int = 1, prune_symmetry: bool = True) -> SweepReport:
    """Pack every family T_2..T_n into K_n."""
    if not 2 <= n <= 8:
        raise ValueError(f"TPC sweep supports 2 <= n <= 8, got {n}")
    budget = default_budget() if budget is None else budget
    work = [(n, fam.to_json(), budget, prune_symmetry) for fam in enumerate_families(n)]
    report = SweepReport()
    for rec in _fan_out(_tpc_job, work, jobs):
        report.add(rec)
    return report


@dataclass
class Host:
    """A named host for the chromatic sweep; ``coloring`` is an optional proper coloring hint."""

    name: str
    graph: Graph
    coloring: list[int] | None = None


def _chromatic_job(args) -> Record:
    name, g_text, colors, fam_json, budget = args
    g = loads(g_text)
    fam = TreeFamily.from_json(fam_json)
    res = pack_exhaustive(g, fam, budget)
    verified = verify_packing(g, fam, res.packing).ok if res.sat else None
    constructive = None
    note = None
    if len(fam.nonstars()) <= 3:
        try:
            p = pack_constructive(g, fam, colors, fallback=False)
            ok = verify_packing(g, fam, p).ok
            constructive = "ok" if ok else "invalid"
        except CompletionError as exc:
            constructive = "falsified"
            note = str(exc)
        if constructive == "ok" and res.status == UNSAT:
            note = "oracle UNSAT contradicts a verified constructive packing"
            verified = False
    return Record(name, list(fam.key()), res.status, res.nodes, res.elapsed, verified, constructive, note)


def sweep_chromatic(
    k: int,
    hosts: Sequence[Host],
    family_filter: Callable[[TreeFamily], bool] | None = None,
    budget: int | None = None,
    jobs: int = 1,
    color_budget: int = 5_000_000,
) -> SweepReport:
    """Pack every family T_2..T_k (optionally filtered) into every certified k-chromatic host.

    A host whose chromatic number is not certified equal to ``k`` within
    ``color_budget`` nodes is skipped with a reason. The exact witness coloring
    is handed to the constructive packer for families it covers.
    """
    budget = default_budget() if budget is None else budget
    report = SweepReport()
    work = []
    families = [f for f in enumerate_families(k) if family_filter is None or family_filter(f)]
    for host in hosts:
        res = chromatic_number(host.graph, color_budget)
        if not res.ok:
            report.skipped.append({"host": host.name, "reason": f"chromatic number not certified within {color_budget} nodes"})
            continue
        if res.k != k:
            report.skipped.append({"host": host.name, "reason": f"chromatic number is {res.k}, not {k}"})
            continue
        text = dumps(host.graph)
        work.extend((host.name, text, res.coloring, f.to_json(), budget) for f in families)
    for rec in _fan_out(_chromatic_job, work, jobs):
        report.add(rec)
    return report
