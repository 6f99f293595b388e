"""Command-line entry point.

Exit codes: 0 success, 1 usage/parse/precondition error, 2 negative result
(UNSAT or a failed packing), 3 timeout.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Sequence

from .coloring import chromatic_number
from .constructive import CompletionError, PackingPreconditionError, pack_constructive
from .degree import DegreePreconditionError, pack_avg_degree, pack_min_degree
from .graph import GraphError, complete_graph, cycle_graph, dumps, loads, mycielski, random_gnm, random_min_degree
from .search import (
    SAT,
    TIMEOUT,
    Host,
    Record,
    SweepReport,
    _fan_out,
    default_budget,
    pack_exhaustive,
    sweep_chromatic,
    sweep_tpc,
)
from .trees import TreeError, TreeFamily, canonical_form, enumerate_families, enumerate_free_trees
from .verify import verify_packing

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2
EXIT_TIMEOUT = 3

MAX_TREE_N = 12


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"treepack: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# trees


def cmd_trees(args) -> int:
    if not 1 <= args.n <= MAX_TREE_N:
        raise UsageError(f"--n must be between 1 and {MAX_TREE_N}, got {args.n}")
    for t in enumerate_free_trees(args.n):
        if args.format == "canon":
            print(canonical_form(t))
        else:
            print(json.dumps([list(e) for e in t.edges]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# pack


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_graph(path: str):
    try:
        return loads(_read(path))
    except GraphError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_family(path: str) -> TreeFamily:
    text = _read(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return TreeFamily.from_json(data)
    except TreeError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_pack(args) -> int:
    g = _load_graph(args.graph)
    fam = _load_family(args.family)
    budget = args.budget
    packing = None
    status = SAT
    try:
        if args.mode == "constructive":
            if len(fam.nonstars()) > 3:
                raise UsageError(f"constructive mode needs at most 3 non-stars, family has {len(fam.nonstars())}")
            res = chromatic_number(g)
            if not res.ok:
                _err("chromatic number not certified within budget")
                return EXIT_TIMEOUT
            if res.k != fam.k:
                raise UsageError(f"host has chromatic number {res.k}, family needs {fam.k}")
            packing = pack_constructive(g, fam, res.coloring)
        elif args.mode == "search":
            res = pack_exhaustive(g, fam, budget, prune_symmetry=args.prune_symmetry)
            status, packing = res.status, res.packing
        elif args.mode == "mindeg":
            out = pack_min_degree(g, fam, budget=budget)
            packing = out.packing if out.ok else None
            status = SAT if out.ok else "FAIL"
        else:
            k = args.k if args.k is not None else min(g.n, (2 * g.m) // max(g.n, 1) + 1)
            out = pack_avg_degree(g, fam, k, strategy=args.strategy)
            packing = out.packing if out.ok else None
            status = SAT if out.ok else "FAIL"
    except (PackingPreconditionError, DegreePreconditionError) as exc:
        raise UsageError(str(exc)) from None
    except CompletionError as exc:
        _err(str(exc))
        return EXIT_NEGATIVE
    if status == TIMEOUT:
        _err("search budget exhausted")
        return EXIT_TIMEOUT
    if packing is None:
        _err(f"no packing ({status})")
        return EXIT_NEGATIVE
    report = verify_packing(g, fam, packing)
    text = packing.dumps() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not report.ok:
        _err(f"packing failed verification: {report.dumps()}")
        return EXIT_NEGATIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# conjecture sweeps


def _mindeg_job(args) -> Record:
    name, g_text, fam_json, budget = args
    g = loads(g_text)
    fam = TreeFamily.from_json(fam_json)
    out = pack_min_degree(g, fam, budget=budget)
    ok = out.ok and verify_packing(g, fam, out.packing).ok
    note = "search fallback" if out.fallback_used else None
    return Record(name, list(fam.key()), SAT if ok else "FAIL", 0, 0.0, ok, None, note)


def _avgdeg_job(args) -> Record:
    name, g_text, fam_json, k = args
    g = loads(g_text)
    fam = TreeFamily.from_json(fam_json)
    out = pack_avg_degree(g, fam, k)
    ok = out.ok and verify_packing(g, fam, out.packing).ok
    bounds = all(r.get("residual_bound_ok", False) and r.get("peel_monotone", False) for r in out.reports)
    note = None if bounds else "residual or peeling bound violated"
    return Record(name, list(fam.key()), SAT if ok and bounds else "FAIL", 0, 0.0, ok, None, note)


def _chromatic_hosts(k: int, suite: str, trials: int, rng: random.Random) -> list[Host]:
    if suite == "complete":
        return [Host(f"K{k}", complete_graph(k))]
    if suite == "mycielski":
        if not 2 <= k <= 7:
            raise UsageError("mycielski suite needs 2 <= k <= 7")
        g, _ = mycielski(k)
        hosts = [Host(f"M{k}", g)]
        if k == 3:
            hosts = [Host("C5", cycle_graph(5))]
        return hosts
    hosts = []
    for i in range(trials):
        n = rng.randint(k, 3 * k)
        m = rng.randint(k * (k - 1) // 2, n * (n - 1) // 2)
        hosts.append(Host(f"G({n},{m})#{i}", random_gnm(n, m, rng)))
    return hosts


def cmd_conjecture(args) -> int:
    rng = random.Random(args.seed)
    budget = args.budget
    if args.which == "tpc":
        if not 2 <= args.max_n <= 8:
            raise UsageError("--max-n must be between 2 and 8")
        report = SweepReport()
        for n in range(2, args.max_n + 1):
            part = sweep_tpc(n, budget, jobs=args.jobs, prune_symmetry=not args.no_prune)
            for rec in part.records:
                report.add(rec)
    elif args.which == "chromatic":
        if not 2 <= args.k <= 7:
            raise UsageError("--k must be between 2 and 7")
        hosts = _chromatic_hosts(args.k, args.suite, args.trials, rng)
        cap = args.max_nonstars
        filt = (lambda f: len(f.nonstars()) <= cap) if cap is not None else None
        report = sweep_chromatic(args.k, hosts, filt, budget, jobs=args.jobs)
    elif args.which == "mindeg":
        k = args.k
        if not 2 <= k <= 8:
            raise UsageError("--k must be between 2 and 8")
        n = args.n if args.n is not None else 40 * k
        if n <= k - 1:
            raise UsageError("--n must exceed k-1")
        fams = list(enumerate_families(k))
        work = []
        for i in range(args.trials):
            g = random_min_degree(n, k - 1, rng)
            fam = rng.choice(fams)
            work.append((f"mindeg(n={n},d={k - 1})#{i}", dumps(g), fam.to_json(), budget))
        report = SweepReport()
        for rec in _fan_out(_mindeg_job, work, args.jobs):
            report.add(rec)
    else:
        k = args.k
        if not 2 <= k <= 12:
            raise UsageError("--k must be between 2 and 12")
        s = max(2, k // 2)
        if 2 * s > k:
            raise UsageError("avgdeg needs k >= 4")
        fams = list(enumerate_families(s))
        work = []
        for i in range(args.trials):
            n = rng.randint(k, 3 * k)
            need = -(-(k - 1) * n // 2)
            m = rng.randint(need, min(n * (n - 1) // 2, need + n))
            g = random_gnm(n, m, rng)
            work.append((f"G({n},{m})#{i}", dumps(g), rng.choice(fams).to_json(), k))
        report = SweepReport()
        for rec in _fan_out(_avgdeg_job, work, args.jobs):
            report.add(rec)
    return _emit(report, args)


def _emit(report: SweepReport, args) -> int:
    lines = [json.dumps(r.to_json(args.timings), sort_keys=True) for r in report.records]
    lines.extend(json.dumps({"skipped": s}, sort_keys=True) for s in report.skipped)
    summary = json.dumps({"summary": report.summary()}, sort_keys=True)
    lines.append(summary)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)
    if report.timeouts and not report.failures:
        return EXIT_TIMEOUT
    return EXIT_OK if report.clean else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None, help="search node budget (default: TREEPACK_BUDGET_NODES or %d)" % default_budget())
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, default=0, help="seed for random host generation")
    common.add_argument("--timings", action="store_true", help="include elapsed seconds in reports")
    common.add_argument("--out", default=None, help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="treepack", description="Tree packing experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trees", help="list free trees on n vertices")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--format", choices=("edges", "canon"), default="edges")
    t.set_defaults(func=cmd_trees)

    k = sub.add_parser("pack", parents=[common], help="pack a family into a host graph")
    k.add_argument("--graph", required=True, help="edge-list file: 'n m' then m lines 'u v'")
    k.add_argument("--family", required=True, help="family JSON")
    k.add_argument("--mode", choices=("constructive", "search", "mindeg", "avgdeg"), default="search")
    k.add_argument("--k", type=int, default=None, help="degree parameter for avgdeg mode")
    k.add_argument("--strategy", choices=("peel", "chain"), default="peel", help="avgdeg strategy")
    k.add_argument("--prune-symmetry", action="store_true", help="symmetry pruning for search mode")
    k.set_defaults(func=cmd_pack)

    c = sub.add_parser("conjecture", help="run a conjecture sweep")
    csub = c.add_subparsers(dest="which", required=True)
    tpc = csub.add_parser("tpc", parents=[common])
    tpc.add_argument("--max-n", type=int, required=True)
    tpc.add_argument("--no-prune", action="store_true", help="disable symmetry pruning")
    ch = csub.add_parser("chromatic", parents=[common])
    ch.add_argument("--k", type=int, required=True)
    ch.add_argument("--suite", choices=("complete", "mycielski", "random"), default="complete")
    ch.add_argument("--trials", type=int, default=10, help="hosts in the random suite")
    ch.add_argument("--max-nonstars", type=int, default=None)
    md = csub.add_parser("mindeg", parents=[common])
    md.add_argument("--k", type=int, required=True)
    md.add_argument("--n", type=int, default=None)
    md.add_argument("--trials", type=int, default=20)
    ad = csub.add_parser("avgdeg", parents=[common])
    ad.add_argument("--k", type=int, required=True)
    ad.add_argument("--trials", type=int, default=20)
    c.set_defaults(func=cmd_conjecture)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "budget", None) is None and hasattr(args, "budget"):
        args.budget = default_budget()
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
