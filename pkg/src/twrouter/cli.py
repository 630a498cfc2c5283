"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 routing below its guaranteed size.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .decomp import heuristic_decomposition, read_td, write_td
from .formats import instance_to_dict, read_instance, write_instance
from .generators import gen_grid_gap, gen_partial_ktree, gen_pathwidth_ndp
from .graph import InputError, Instance, Mode
from .hardness import MCCInstance, build_gadget, check_structure, read_mcc, treedepth_witness, verify_equivalence
from .oracle import GuardError, exact
from .router import BoundError, solve_edp, solve_ndp
from .wl import wl_decompose

CSV_FIELDS = ["instance", "n", "m", "k", "r", "lp", "flow", "l1", "l2", "routed", "bound", "constant", "ms"]

log = logging.getLogger("twrouter")


def parse_range(text: str) -> list[int]:
    """``3``, ``1..4`` or ``1,2,5``."""
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out += list(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _load(args, want_path):
    inst = read_instance(args.graph)
    d = read_td(args.td) if args.td else heuristic_decomposition(inst.graph, want_path)
    return inst, d


def run_solve(name: str, inst: Instance, d, *, r=None, lp_method="highs", check_bound=True) -> tuple[dict, object]:
    solver = solve_ndp if inst.mode is Mode.NDP else solve_edp
    t0 = time.perf_counter()
    routing, rep = solver(inst, d, r=r, lp_method=lp_method, check_bound=False)
    ms = (time.perf_counter() - t0) * 1000
    row = {
        "instance": name,
        "n": inst.graph.n,
        "m": inst.graph.m,
        "k": inst.k,
        "r": rep.r,
        "lp": rep.lp,
        "flow": rep.flow,
        "l1": rep.l1,
        "l2": rep.l2,
        "routed": routing.size,
        "bound": max(rep.bound, rep.paper_bound or 0.0),
        "constant": rep.constant,
        "ms": round(ms, 3),
    }
    extra = {
        "routing": routing.to_dict(),
        "constants": {
            "rounding": rep.round_constant,
            "router": rep.constant,
            "d_max": rep.d_max,
            "paper_edp": 144 if inst.mode is Mode.EDP else None,
        },
        "theorem_bound": rep.bound,
        "paper_bound": rep.paper_bound,
        "rounding_calls": rep.rounding_calls,
    }
    if check_bound and routing.size + 1e-9 < row["bound"]:
        raise BoundError(f"routed {routing.size} < bound {row['bound']}")
    return row, extra


def _emit_rows(rows, as_json, out=None):
    out = out or sys.stdout
    if as_json:
        json.dump(rows, out, indent=1, default=str)
        out.write("\n")
        return
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def cmd_solve(args, mode: Mode):
    inst, d = _load(args, mode is Mode.NDP)
    if inst.mode is not mode:
        raise InputError(f"{args.graph} is a {inst.mode.value} instance")
    row, extra = run_solve(Path(args.graph).stem, inst, d, r=args.r, lp_method=args.lp, check_bound=not args.no_bound_check)
    if args.routing_out:
        Path(args.routing_out).write_text(json.dumps(extra["routing"], indent=1) + "\n")
    _emit_rows([{**row, **extra} if args.json else row], args.json)
    return 0


def cmd_wl(args):
    inst, d = _load(args, False)
    comps, rep = wl_decompose(inst, d, r=args.r, lp_method=args.lp)
    doc = {
        "flow": rep.flow,
        "r": rep.r,
        "l1": rep.l1,
        "l2": rep.l2,
        "weight": rep.weight,
        "bound": rep.bound,
        "components": [c.to_dict() for c in comps],
    }
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    if args.json:
        print(json.dumps(doc, indent=1))
    else:
        print(f"components={len(comps)} weight={rep.weight:.6g} bound={rep.bound:.6g} flow={rep.flow:.6g} r={rep.r} l1={rep.l1} l2={rep.l2}")
    return 0


def cmd_oracle(args):
    inst = read_instance(args.graph)
    opt, witness = exact(inst, max_vertices=args.max_vertices, max_pairs=args.max_pairs)
    if args.json:
        print(json.dumps({"opt": opt, "routing": witness.to_dict()}, indent=1))
    else:
        print(f"opt={opt}")
    return 0


def _generate(family: str, k: int, n: int, width: int, seed: int):
    if family == "grid":
        inst = gen_grid_gap(k)
        return inst, heuristic_decomposition(inst.graph)
    if family == "ktree":
        return gen_partial_ktree(n, width, k, seed)
    if family in ("ndp", "caterpillar"):
        return gen_pathwidth_ndp(n, width, k, seed, caterpillar=family == "caterpillar")
    raise InputError(f"unknown family {family!r}")


def cmd_gen(args):
    inst, d = _generate(args.family, args.k, args.n, args.width, args.seed)
    out = Path(args.out)
    write_instance(inst, out.with_suffix(".json"))
    write_td(d, inst.graph.n, out.with_suffix(".td"))
    print(f"wrote {out.with_suffix('.json')} and {out.with_suffix('.td')}")
    return 0


def random_mcc(k: int, n: int, seed: int, p: float = 0.5) -> MCCInstance:
    rng = random.Random(seed)
    classes = [list(range(i * n, (i + 1) * n)) for i in range(k)]
    edges = [
        (a, b)
        for i in range(k)
        for j in range(i + 1, k)
        for a in classes[i]
        for b in classes[j]
        if rng.random() < p
    ]
    return MCCInstance(k, classes, edges)


def cmd_gen_hardness(args):
    mcc = read_mcc(args.mcc) if args.mcc else random_mcc(args.k, args.n, args.seed, args.p)
    out = build_gadget(mcc)
    depth, _ = treedepth_witness(out)
    bad = check_structure(out)
    if bad:
        raise AssertionError(f"gadget structure violated: {bad[:3]}")
    if args.out:
        prefix = Path(args.out)
        write_instance(out.instance, prefix.with_suffix(".json"))
        prefix.with_suffix(".roles.json").write_text(json.dumps(out.role_table(), indent=1) + "\n")
    line = f"vertices={out.instance.graph.n} pairs={out.instance.k} ell={out.ell} treedepth_witness={depth}"
    if args.verify:
        ok = verify_equivalence(mcc)
        line += f" equivalence={'ok' if ok else 'FAILED'}"
        print(line)
        return 0 if ok else 2
    print(line)
    return 0


def _bench_one(job):
    family, k, n, width, seed, lp = job
    inst, d = _generate(family, k, n, width, seed)
    name = f"{family}-k{k}" if family == "grid" else f"{family}-n{n}-w{width}-k{k}-s{seed}"
    row, _ = run_solve(name, inst, d, lp_method=lp, check_bound=False)
    return row


def cmd_bench(args):
    jobs = [
        (args.family, k, args.n, args.width, seed, args.lp)
        for k in parse_range(args.k)
        for seed in (parse_range(args.seeds) if args.family != "grid" else [0])
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    buf = io.StringIO()
    _emit_rows(rows, args.json, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    short = [r for r in rows if r["routed"] + 1e-9 < r["bound"]]
    return 2 if short else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twrouter", description="Disjoint-paths routing on graphs of small treewidth.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def solve_args(p):
        p.add_argument("--graph", required=True, help="instance file (JSON or line format)")
        p.add_argument("--td", help="PACE .td decomposition (default: heuristic)")
        p.add_argument("--r", type=int, help="width parameter; raised to width+1 when smaller")
        p.add_argument("--lp", default="highs", choices=["highs", "simplex", "exact"])
        p.add_argument("--json", action="store_true")

    for name in ("solve-edp", "solve-ndp"):
        p = sub.add_parser(name)
        solve_args(p)
        p.add_argument("--routing-out", help="write the routing as JSON")
        p.add_argument("--no-bound-check", action="store_true")
    p = sub.add_parser("wl-decompose")
    solve_args(p)
    p.add_argument("--out", help="write components as JSON")
    p = sub.add_parser("oracle")
    p.add_argument("--graph", required=True)
    p.add_argument("--max-vertices", type=int, default=30)
    p.add_argument("--max-pairs", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p = sub.add_parser("gen")
    p.add_argument("--family", choices=["grid", "ktree", "ndp", "caterpillar"], required=True)
    p.add_argument("--k", type=int, default=3, help="grid size, or number of pairs")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p = sub.add_parser("gen-hardness")
    p.add_argument("--mcc", help="clique instance as JSON {k, classes, edges}")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--p", type=float, default=0.5, help="cross-edge probability for random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output prefix")
    p.add_argument("--verify", action="store_true")
    p = sub.add_parser("bench")
    p.add_argument("--family", choices=["grid", "ktree", "ndp", "caterpillar"], required=True)
    p.add_argument("--k", default="1..4", help="range such as 1..4")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--seeds", default="0")
    p.add_argument("--lp", default="highs", choices=["highs", "simplex", "exact"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.cmd == "solve-edp":
            return cmd_solve(args, Mode.EDP)
        if args.cmd == "solve-ndp":
            return cmd_solve(args, Mode.NDP)
        if args.cmd == "wl-decompose":
            return cmd_wl(args)
        if args.cmd == "oracle":
            return cmd_oracle(args)
        if args.cmd == "gen":
            return cmd_gen(args)
        if args.cmd == "gen-hardness":
            return cmd_gen_hardness(args)
        return cmd_bench(args)
    except BoundError as exc:
        print(f"bound violated: {exc}", file=sys.stderr)
        return 2
    except (InputError, GuardError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
