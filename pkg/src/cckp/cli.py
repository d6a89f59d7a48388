"""Command-line interface: generate, solve, simulate, benchmark, verify."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import exact, fptas, gen, greedy, harness, model, online


def _print_json(data: dict) -> None:
    json.dump(data, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _stats_dict(stats: model.SolutionStats) -> dict:
    return {
        "objective": stats.objective,
        "weight_used": stats.weight_used,
        "cardinality_used": stats.cardinality_used,
        "partial_component_count": stats.partial_component_count,
        "feasible": stats.feasible,
        "violations": list(stats.violations),
    }


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = gen.GenConfig(args.dataset, args.n, args.card, args.seed)
    inst = gen.generate(cfg)
    model.save_instance(inst, args.output)
    print(f"wrote {inst.name} (n={inst.n}, C={inst.C}, W={inst.W:g}) to {args.output}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = model.validate_instance(model.load_instance(args.instance))
    if args.algo == "greedy":
        sol, _ = greedy.greedy_cardinality(inst, early_stop=not args.no_early_stop)
    elif args.algo == "fptas":
        if args.eps is None:
            raise SystemExit("--eps is required for --algo fptas")
        sol = fptas.fptas_solve(inst, args.eps)
    elif args.algo == "exact-enum":
        sol = exact.exact_enumerate(inst)
    elif args.algo == "exact-bnb":
        sol = exact.exact_bnb(inst)
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit(f"unknown algorithm {args.algo}")
    out = model.solution_to_dict(sol, inst.name)
    out["algorithm"] = args.algo
    out["stats"] = _stats_dict(model.objective(inst, sol))
    if args.curvature:
        out["curvature"] = greedy.curvature(inst)
    _print_json(out)
    return 0


def _cmd_online(args: argparse.Namespace) -> int:
    inst = model.validate_instance(model.load_instance(args.instance))
    solver = online.make_solver(args.solver, args.eps)
    if args.c is not None or args.d is not None or args.beta is not None:
        if None in (args.c, args.d, args.beta):
            raise SystemExit("--c, --d and --beta must be given together")
        params = online.OnlineParams(args.c, args.d, args.beta)
    else:
        params = online.preset_params(inst.C, inst.n)
    if args.perm:
        arrival = args.perm.split(",")
    else:
        rng = np.random.default_rng(args.seed)
        ids = sorted(item.id for item in inst.items)
        arrival = [ids[i] for i in rng.permutation(len(ids))]
    sol, trace = online.run_online(
        inst, arrival, params, solver, greedy_tail=args.greedy_tail
    )
    stats = model.objective(inst, sol)
    out = model.solution_to_dict(sol, inst.name)
    out["params"] = {
        "c": params.c, "d": params.d, "beta": params.beta, "preset": params.preset,
    }
    out["solver"] = {"name": solver.name, "alpha": solver.alpha}
    out["arrival"] = list(arrival)
    out["stats"] = _stats_dict(stats)
    _print_json(out)
    if args.trace:
        steps = [
            {
                "step": s.step, "phase": s.phase, "item": s.item_id,
                "solver_x": s.solver_x, "taken": s.taken,
                "weight_left": s.weight_left, "cardinality_left": s.cardinality_left,
                "tail": s.tail,
            }
            for s in trace.steps
        ]
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "instance": inst.name,
                    "sampling_end": trace.sampling_end,
                    "secretary_end": trace.secretary_end,
                    "steps": steps,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = harness.load_config(args.config)
    rows = harness.run_experiment(cfg)
    harness.write_outputs(cfg, rows, args.output)
    errors = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {args.output} ({errors} error rows)")
    return 1 if errors else 0


def _cmd_report(args: argparse.Namespace) -> int:
    from . import plots

    written = plots.render_report_figures(args.report, args.outdir)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from . import acceptance

    results = acceptance.run_all(verbose=True)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cckp",
        description=(
            "Cardinality-constrained continuous knapsack with concave "
            "piecewise-linear utilities: solvers and benchmarks"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("--dataset", choices=("A", "B"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--card", default="30%",
                   help="cardinality rule: an integer, '30%%' or '60%%'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve an instance offline")
    p.add_argument("--algo", choices=("greedy", "fptas", "exact-enum", "exact-bnb"),
                   required=True)
    p.add_argument("--eps", type=float, help="fptas accuracy in (0,1)")
    p.add_argument("--no-early-stop", action="store_true",
                   help="run all C greedy rounds even on zero gain")
    p.add_argument("--curvature", action="store_true",
                   help="report the curvature diagnostic of the relaxed set function")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("online", help="run the online algorithm on one arrival order")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=("exact", "greedy", "fptas"), default="greedy")
    p.add_argument("--eps", type=float)
    p.add_argument("--preset", choices=("auto",), default="auto",
                   help="pick (c, d, beta) from the published presets")
    p.add_argument("--c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--perm", help="comma-separated item ids (arrival order)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for a random arrival order (ignored with --perm)")
    p.add_argument("--greedy-tail", action="store_true",
                   help="fill the final arrival up to the residual capacity")
    p.add_argument("--trace", help="write the per-step trace to this JSON file")
    p.set_defaults(func=_cmd_online)

    p = sub.add_parser("bench", help="run a benchmark config and write reports")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="render figures and the aggregate CSV")
    p.add_argument("--report", required=True, help="report CSV from `cckp bench`")
    p.add_argument("-o", "--outdir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
