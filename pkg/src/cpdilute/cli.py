"""Command-line interface: gen, percolate, simulate, theory, oracle-check, experiment."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FsPath

import numpy as np

from . import cpsim, harness, oracle, percolate, theory
from .graphs import (dilute_bonds, dilute_sites, gen_erdos_renyi, gen_lattice2d,
                     gen_path, read_graph, read_mask, write_graph, write_mask)


def _build_graph(args, seed):
    if args.family == "path1d":
        return gen_path(args.n)
    if args.family == "lattice2d":
        return gen_lattice2d(args.L or int(round(args.n ** 0.5)))
    if args.family == "erdos_renyi":
        return gen_erdos_renyi(args.n, args.mu, seed)
    raise SystemExit(f"unknown family {args.family}")


def cmd_gen(args):
    g = _build_graph(args, args.seed)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(str(out / "graph.txt"), g)
    if args.dilute != "none":
        dilute = dilute_bonds if args.dilute == "bond" else dilute_sites
        dg = dilute(g, args.p, args.seed)
        write_mask(str(out / "mask.txt"), dg)
    print(f"wrote {out}/graph.txt ({g.n} vertices, {g.n_edges} edges)")
    return 0


def _load_diluted(args):
    g = read_graph(args.graph)
    if args.mask:
        return read_mask(args.mask, g)
    return dilute_bonds(g, 1.0, 0)


def cmd_percolate(args):
    dg = _load_diluted(args)
    report = percolate.components(dg)
    path = percolate.longest_path_dfs(dg, restarts=args.restarts, seed=args.seed)
    print(f"components: {report.n_components}  largest: {report.largest}  "
          f"longest_dfs_path: {path.length}")
    if args.report:
        with open(args.report, "w") as f:
            report.to_csv(f)
    if args.path_csv:
        with open(args.path_csv, "w") as f:
            path.to_csv(f)
    return 0


def cmd_simulate(args):
    dg = _load_diluted(args)
    t0, ratio, count = (float(x) for x in args.schedule.split(","))
    schedule = harness.geometric_schedule(t0, ratio, int(count))
    traj = cpsim.run_contact(dg, args.lam, args.t_max, schedule, seed=args.seed)
    with open(args.out, "w") as f:
        traj.to_csv(f)
    status = "censored" if traj.censored else "extinct"
    print(f"{status} at t={traj.extinction_time:.6g}; wrote {args.out}")
    return 0


def cmd_theory(args):
    params = dict(kv.split("=") for kv in args.params)
    params = {k: float(v) for k, v in params.items()}
    fns = {
        "alpha_nu": lambda: theory.alpha_nu(params["nu"]),
        "cluster_pmf": lambda: theory.cluster_pmf(int(params["s"]), params["nu"]),
        "noest_u_integral": lambda: theory.noest_u_integral(
            params["t"], params["a"], params["b"]),
        "noest_u_asymptotic": lambda: theory.noest_u_asymptotic(
            params["t"], params["a"], params["b"]),
        "er_u_saddle": lambda: theory.er_u_saddle(
            params["t"], params["nu"], params["A"]),
        "largest_cluster_asymptotic": lambda: theory.largest_cluster_asymptotic(
            int(params["N"]), params["nu"]),
    }
    if args.name == "scaling_predictions":
        pred = theory.scaling_predictions(args.regime, params)
        print(pred.to_json())
        return 0
    if args.name not in fns:
        raise SystemExit(f"unknown formula {args.name}; one of "
                         f"{sorted(fns) + ['scaling_predictions']}")
    print(json.dumps({"formula": args.name, "params": params,
                      "value": fns[args.name]()}))
    return 0


def cmd_oracle_check(args):
    checks = harness.oracle_check(reps=args.reps, seed=args.seed)
    failed = 0
    for name, passed, stat in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}  (statistic={stat:.4g})")
        failed += not passed
    if failed:
        print(f"{failed} check(s) failed")
        return 1
    return 0


def cmd_experiment(args):
    cfg = harness.ExperimentConfig.from_json(FsPath(args.config).read_text())
    if args.seed is not None:
        d = cfg.to_dict()
        d["seed"] = args.seed
        cfg = harness.ExperimentConfig.from_dict(d)
    summary = harness.run_experiment(cfg, out_dir=args.out)
    print(json.dumps({k: v for k, v in summary.items()
                      if k in ("experiment", "fit", "ratio", "prediction")},
                     indent=2, default=str))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cpdilute",
        description="Contact process on randomly diluted graphs: generation, "
                    "structure, simulation, theory, experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph and optional dilution mask")
    p.add_argument("--family", required=True,
                   choices=["path1d", "lattice2d", "erdos_renyi"])
    p.add_argument("--n", type=int, default=0, help="vertex count")
    p.add_argument("--L", type=int, default=0, help="lattice side")
    p.add_argument("--mu", type=float, default=1.0, help="ER mean degree")
    p.add_argument("--dilute", choices=["none", "bond", "site"], default="none")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("percolate", help="structural analysis of a diluted graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--mask", default="")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default="", help="cluster report CSV")
    p.add_argument("--path-csv", default="", help="longest DFS path CSV")
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("simulate", help="run the contact process")
    p.add_argument("--graph", required=True)
    p.add_argument("--mask", default="")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--schedule", default="0.1,1.3,40",
                   help="t0,ratio,count geometric sample times")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="evaluate a closed-form formula")
    p.add_argument("name")
    p.add_argument("--regime", default="", help="for scaling_predictions")
    p.add_argument("params", nargs="*", help="key=value pairs")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("oracle-check", help="run the oracle-vs-simulation suite")
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("experiment", help="run a named experiment from a config")
    p.add_argument("name", nargs="?", default="",
                   help="experiment name (must match the config)")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    args = parser.parse_args(argv)
    if args.command == "experiment" and args.name:
        cfg = harness.ExperimentConfig.from_json(FsPath(args.config).read_text())
        if cfg.experiment != args.name:
            raise SystemExit(f"config is for {cfg.experiment!r}, not {args.name!r}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
