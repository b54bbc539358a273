"""``fdcop`` command line: solve, bench, gen, verify.

Exit codes: 0 success, 1 usage error, 2 run failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, oracle
from .baselines import cocoa_solve, hcms_solve
from .ccocoa import FREEZE_POLICIES, SolverConfig
from .ccocoa import solve as ccocoa_solve
from .model import parse_problem, serialize_problem


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _solver_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--k", type=int, default=3, help="discrete points per variable")
    ap.add_argument("--alpha", type=float, default=0.01, help="gradient step size")
    ap.add_argument("--refine-iters", type=int, default=100)
    ap.add_argument("--maxsum-iters", type=int, default=100)
    ap.add_argument("--freeze", choices=FREEZE_POLICIES, default="latest")
    ap.add_argument("--seed", type=int, default=0)


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(k=args.k, alpha=args.alpha, max_refine_iters=args.refine_iters,
                            maxsum_iters=args.maxsum_iters, freeze=args.freeze, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _topology_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--topology", choices=bench.TOPOLOGIES, default="sparse")
    ap.add_argument("--agents", type=int, default=50)
    ap.add_argument("--p", type=float, default=None, help="edge probability (sparse/dense)")
    ap.add_argument("--attach", type=int, default=2, help="edges per new node (scalefree)")


def _generator(args) -> bench.GeneratorConfig:
    try:
        return bench.GeneratorConfig(args.topology, args.agents, args.p, args.attach)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fdcop", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one problem file")
    s.add_argument("--problem", required=True, type=Path)
    s.add_argument("--algo", choices=("ccocoa", "cocoa", "hcms"), default="ccocoa")
    _solver_args(s)
    s.add_argument("--trace", action="store_true", help="print every message in delivery order")
    s.add_argument("--points", default=None, help="fixed points, e.g. '0:1,2;1:3,4'")
    s.add_argument("--order", default=None, help="forced activation order, e.g. '0,1,2,3'")

    b = sub.add_parser("bench", help="run a benchmark and write CSV")
    _topology_args(b)
    b.add_argument("--instances", type=int, default=50)
    b.add_argument("--algos", default="ccocoa,hcms", help="comma list, e.g. ccocoa,cocoa,hcms@500")
    _solver_args(b)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")

    g = sub.add_parser("gen", help="write a random problem file")
    _topology_args(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, default=None)

    v = sub.add_parser("verify", help="oracle checks on a problem file")
    v.add_argument("--problem", required=True, type=Path)
    vsub = v.add_subparsers(dest="check", required=True, parser_class=_Parser)
    grid = vsub.add_parser("grid", help="exhaustive uniform grid search")
    grid.add_argument("--points", type=int, required=True)
    grid.add_argument("--cap", type=int, default=oracle.DEFAULT_GRID_CAP)
    vsub.add_parser("quadmin", help="closed-form minimum when the Hessian is positive definite")
    gc = vsub.add_parser("gradcheck", help="finite-difference check of every local objective")
    gc.add_argument("--h", type=float, default=1e-5)
    return ap


def _fmt_assignment(a) -> str:
    return " ".join(f"x{i}={v:.6f}" for i, v in sorted(a.items()))


def _parse_points(text: str | None):
    if text is None:
        return None
    try:
        out = {}
        for chunk in text.split(";"):
            agent, _, vals = chunk.partition(":")
            out[int(agent)] = [float(v) for v in vals.split(",")]
        return out
    except ValueError:
        raise UsageError(f"bad --points value {text!r}") from None


def _parse_order(text: str | None):
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --order value {text!r}") from None


def cmd_solve(args) -> int:
    cfg = _config(args)
    points, order = _parse_points(args.points), _parse_order(args.order)
    p = parse_problem(args.problem.read_text())
    if args.algo == "hcms":
        if args.trace:
            print("note: hcms runs vectorized; no per-message trace", file=sys.stderr)
        m = hcms_solve(p, cfg, points=points)
    else:
        solve = ccocoa_solve if args.algo == "ccocoa" else cocoa_solve
        m = solve(p, cfg, trace=args.trace, points=points, order=order)
        if args.trace:
            for msg in m.trace:
                print(f"{msg.sender} -> {msg.receiver} {msg.kind} {msg.summary()}")
    print(f"algo: {m.algo}")
    print(f"assignment: {_fmt_assignment(m.assignment)}")
    print(f"cost: {m.cost!r}")
    counts = " ".join(f"{k}={v}" for k, v in sorted(m.messages.items()))
    print(f"messages: {m.total_messages} ({counts})")
    print(f"hold_events: {m.hold_events} beta: {m.beta_final}")
    print(f"time_s: {m.elapsed:.6f}")
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    try:
        algos = bench.parse_algos(args.algos, cfg)
        spec = bench.ExperimentSpec(_generator(args), algos, args.instances, args.seed, args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = bench.run_experiment(spec)
    if args.out is None:
        bench.write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.write_csv(rows, fh)
    return 0


def cmd_gen(args) -> int:
    text = serialize_problem(bench.generate(_generator(args), args.seed))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


def cmd_verify(args) -> int:
    p = parse_problem(args.problem.read_text())
    if args.check == "grid":
        a, c = oracle.grid_search(p, oracle.GridSpec(args.points, cap=args.cap))
        print(f"assignment: {_fmt_assignment(a)}")
        print(f"cost: {c!r}")
    elif args.check == "quadmin":
        res = oracle.quadratic_global_min(p)
        if res is None:
            print("indefinite")
        else:
            print(f"assignment: {_fmt_assignment(res.assignment)}")
            print(f"cost: {res.cost!r}")
            print(f"inside_domains: {res.feasible}")
    else:
        rng = np.random.default_rng(0)
        worst = 0.0
        for i in p.agents:
            scope, f, grad = oracle.local_objective_functions(p, i)
            point = [rng.uniform(p.domains[v].lb, p.domains[v].ub) for v in scope]
            err = oracle.finite_diff_check(f, grad, point, args.h)
            worst = max(worst, err)
            print(f"agent {i}: max error {err:.3e}")
        print(f"worst: {worst:.3e}")
    return 0


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fdcop: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"fdcop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
