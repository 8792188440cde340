"""Command-line entry point: ``dompath <subcommand> ...``.

Exit codes: 0 ok, 1 usage, 2 invalid input, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .floorplan import FloorplanError, ValidationError, load_floorplan
from .generators import generate_maze, generate_office
from .gp import GPConfig, worst_error_bound
from .graph import build_g1, build_g2_explicit
from .hull import HullSolver, obj, path_loss_db
from .pareto import pareto_for_dest
from .smoothed import PerturbationAborted, PerturbationConfig, smoothed_trial
from . import experiments

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _point(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y got {text!r}") from None
    return (x, y)


def _box(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4 or vals[2] <= vals[0] or vals[3] <= vals[1]:
        raise argparse.ArgumentTypeError(f"expected X0,Y0,X1,Y1 got {text!r}")
    return vals


def _write(path: str | None, data, binary: bool = False):
    if path is None or path == "-":
        if binary:
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    if binary:
        Path(path).write_bytes(data)
    else:
        Path(path).write_text(data)


def _gp_config(args) -> GPConfig:
    return GPConfig(r=args.r, u=args.u, seed=args.seed, prune=not args.no_prune)


def cmd_generate(args) -> int:
    if args.kind == "maze":
        plan = generate_maze(args.seed, cells=args.cells, cell_size=args.cell_size)
    else:
        plan = generate_office(rows=args.rows, cols=args.cols)
    _write(args.out, plan.to_json() + "\n")
    print(f"{plan.name}: {len(plan.walls)} walls, {len(plan.corners)} corners",
          file=sys.stderr)
    return EXIT_OK


def cmd_heatmap(args) -> int:
    plan = load_floorplan(args.plan)
    box = None
    if args.extent:
        x0, y0, x1, y1 = args.extent
        box = ((x0, y0), (x1, y1))
    hm = experiments.heatmap(plan, args.source, args.grid, args.algo, _gp_config(args),
                             args.epsilon, args.tx_dbm, box)
    out = args.out or "heatmap"
    _write(out + ".csv", hm.to_csv())
    _write(out + ".pgm", hm.to_pgm(), binary=True)
    json.dump(hm.stats, sys.stderr, indent=1)
    sys.stderr.write("\n")
    return EXIT_OK


def cmd_hull(args) -> int:
    plan = load_floorplan(args.plan)
    g1 = build_g1(plan, args.source, args.dest)
    solver = HullSolver(g1)
    lines = ["dest,B,sp_calls,index,dist_m,loss_db,obj_db,breakpoint_db_per_m"]
    for j, t in enumerate(args.dest):
        hull = solver.hull(j)
        for i, p in enumerate(hull.points):
            bp = f"{hull.breakpoints[i]:.9g}" if i < len(hull.breakpoints) else ""
            lines.append(f"\"{t[0]:g},{t[1]:g}\",{hull.size},{hull.sp_calls},{i},"
                         f"{p.dist:.9f},{p.loss:.9f},{obj(p.dist, p.loss, plan.alpha):.9f},{bp}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_eval_error(args) -> int:
    plan = load_floorplan(args.plan)
    points, _ = experiments.measurement_grid(plan, args.grid)
    rng = np.random.default_rng(args.seed)
    n_sources = max(1, math.ceil(args.pairs / args.per_source))
    groups = experiments.sample_pairs(points, n_sources, args.per_source, rng)
    us = [float(v) for v in np.random.default_rng(args.seed + 1).random(args.seeds)]
    report = experiments.evaluate_pairs(plan, points, groups, args.r, us, not args.no_prune)
    _write(args.out, report.to_csv())
    json.dump(report.summary(), sys.stderr, indent=1)
    sys.stderr.write("\n")
    return EXIT_OK


def cmd_pareto(args) -> int:
    plan = load_floorplan(args.plan)
    g1 = build_g1(plan, args.source, [args.dest])
    res = pareto_for_dest(g1, 0, args.epsilon)
    p = res.path
    pl = path_loss_db(p.dist, p.loss, plan.constants)
    _write(args.out, "dist_m,loss_db,obj_db,pl_db\n"
                     f"{p.dist:.9f},{p.loss:.9f},{res.obj:.9f},{pl:.9f}\n")
    st = res.stats
    json.dump({"epsilon": args.epsilon, "delta": st.delta, "rounds": st.rounds,
               "max_width": st.max_width, "width_bound_ok": st.width_bound_ok,
               "entries": st.entries, "g2_nodes": st.g2_nodes, "g2_edges": st.g2_edges},
              sys.stderr, indent=1)
    sys.stderr.write("\n")
    return EXIT_OK


def cmd_smoothed(args) -> int:
    plan = load_floorplan(args.plan)
    g1 = build_g1(plan, args.source, [args.dest])
    g2 = build_g2_explicit(g1)
    rho = args.rho if args.rho is not None else 1.0 / math.sqrt(2 * g2.n_edges)
    cfg = PerturbationConfig(rho, args.seed, args.trials, args.policy)
    rep = smoothed_trial(g2, 0, cfg)
    lines = ["trial,B,rejections"]
    lines += [f"{i},{b},{k}" for i, (b, k) in enumerate(zip(rep.B, rep.rejections))]
    _write(args.out, "\n".join(lines) + "\n")
    json.dump({"m": rep.m, "rho": rep.rho, "bound": rep.bound, "mean_B": rep.mean_B,
               "rejected_draws": rep.rejected_draws}, sys.stderr, indent=1)
    sys.stderr.write("\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    plan = load_floorplan(args.plan)
    points, _ = experiments.measurement_grid(plan, args.grid)
    rng = np.random.default_rng(args.seed)
    sources = rng.choice(len(points), size=min(args.sources, len(points)), replace=False)
    stats = experiments.pruning_stats(plan, sources, args.grid, args.r, args.u, args.seed)
    stats["worst_error_bound_db"] = worst_error_bound(args.r, plan.alpha)
    _write(args.out, json.dumps(stats, indent=1) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dompath", description="Indoor dominant-path propagation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, plan=True):
        if plan:
            sp.add_argument("--plan", required=True, help="floorplan JSON file")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0)

    def gp_flags(sp):
        sp.add_argument("--r", type=float, default=2.0, help="grid ratio (default 2)")
        sp.add_argument("--u", type=float, default=None, help="fixed grid offset in [0,1)")
        sp.add_argument("--no-prune", action="store_true", help="disable pruning (debug)")

    g = sub.add_parser("generate", help="write a synthetic floorplan")
    g.add_argument("kind", choices=["maze", "office"])
    common(g, plan=False)
    g.add_argument("--cells", type=int, default=20)
    g.add_argument("--cell-size", type=float, default=3.0)
    g.add_argument("--rows", type=int, default=12)
    g.add_argument("--cols", type=int, default=20)
    g.set_defaults(func=cmd_generate)

    h = sub.add_parser("heatmap", help="path loss over a measurement grid")
    common(h)
    gp_flags(h)
    h.add_argument("--source", type=_point, required=True, help="X,Y")
    h.add_argument("--grid", type=float, default=1.0)
    h.add_argument("--algo", choices=["gp", "exact", "pareto"], default="gp")
    h.add_argument("--epsilon", type=float, default=1.0)
    h.add_argument("--extent", type=_box, default=None,
                   help="X0,Y0,X1,Y1 grid extent (default: plan bounding box)")
    h.add_argument("--tx-dbm", type=float, default=None,
                   help="report tx power minus path loss instead of raw loss")
    h.set_defaults(func=cmd_heatmap)

    x = sub.add_parser("hull", help="exact hull per source-destination pair")
    common(x)
    x.add_argument("--source", type=_point, required=True)
    x.add_argument("--dest", type=_point, action="append", required=True)
    x.set_defaults(func=cmd_hull)

    e = sub.add_parser("eval-error", help="GP error against the exact solver")
    common(e)
    gp_flags(e)
    e.add_argument("--pairs", type=int, default=1000)
    e.add_argument("--per-source", type=int, default=20)
    e.add_argument("--seeds", type=int, default=1, help="number of random grid offsets")
    e.add_argument("--grid", type=float, default=1.0)
    e.set_defaults(func=cmd_eval_error)

    a = sub.add_parser("pareto", help="bucketed Pareto DP for one pair")
    common(a)
    a.add_argument("--source", type=_point, required=True)
    a.add_argument("--dest", type=_point, required=True)
    a.add_argument("--epsilon", type=float, default=1.0)
    a.set_defaults(func=cmd_pareto)

    s = sub.add_parser("smoothed", help="hull sizes under rho-perturbation")
    common(s)
    s.add_argument("--source", type=_point, required=True)
    s.add_argument("--dest", type=_point, required=True)
    s.add_argument("--rho", type=float, default=None, help="default 1/sqrt(2m)")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--policy", choices=["cycles", "entries", "none"], default="cycles")
    s.set_defaults(func=cmd_smoothed)

    t = sub.add_parser("stats", help="pruning and relaxation statistics")
    common(t)
    gp_flags(t)
    t.add_argument("--sources", type=int, default=3)
    t.add_argument("--grid", type=float, default=1.0)
    t.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dompath: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:      # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (FloorplanError, ValidationError, FileNotFoundError, PerturbationAborted,
            ValueError) as exc:
        print(f"dompath: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:       # noqa: BLE001
        print(f"dompath: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
