"""Command-line front end.

Subcommands: cluster (weighted k-means on a CSV point set), sensor (coverage
placement over a region file), verify (the invariant suite), bench (solver
comparison matrix as long-format CSV).

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 resource or feasibility error. All randomness flows from --seed (default
0); result payloads contain no timestamps or thread counts, so identical
configurations produce byte-identical files regardless of --threads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from importlib.resources import files
from pathlib import Path

from wkmeans import baselines, instances, ptas, sensor, verification
from wkmeans.core import (
    ClusteringResult,
    PointFileError,
    load_weighted_points,
    save_weighted_points,
)
from wkmeans.oracle import InstanceTooLarge, brute_force_opt
from wkmeans.ptas import EnumerationInfeasible
from wkmeans.sampling import RandomSource
from wkmeans.sensor import RegionFileError

__all__ = ["main", "entry"]


def _bundled(name: str) -> str:
    return str(files("wkmeans").joinpath("data", name))


def _tuple_budget(text: str):
    if text == "exhaustive":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "tuple budget must be a positive integer or 'exhaustive'"
        ) from None


def _ptas_overrides(args: argparse.Namespace) -> dict:
    out = {}
    if args.c1 is not None:
        out["c1"] = args.c1
    if args.c2 is not None:
        out["c2"] = args.c2
    if args.trials is not None:
        out["trials"] = args.trials
    if args.tuple_budget is not None:
        out["tuple_budget"] = args.tuple_budget
    if args.adjust_epsilon:
        out["adjust_epsilon"] = True
    return out


def _add_solver_flags(p: argparse.ArgumentParser, solvers: tuple[str, ...]) -> None:
    p.add_argument("--k", type=int, default=None, help="number of centers")
    p.add_argument("--epsilon", type=float, default=0.5, help="target accuracy")
    p.add_argument("--solver", choices=solvers, default="ptas")
    p.add_argument("--c1", type=float, default=None, help="sample-size multiplier")
    p.add_argument("--c2", type=float, default=None, help="subset-size multiplier")
    p.add_argument("--trials", type=int, default=None, help="independent trials")
    p.add_argument(
        "--tuple-budget",
        type=_tuple_budget,
        default=None,
        help="candidate tuples per trial, or 'exhaustive'",
    )
    p.add_argument(
        "--adjust-epsilon",
        action="store_true",
        help="derive N, M from the reduced accuracy eps/((1+eps/2)k)",
    )
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="worker thread cap")
    p.add_argument("--output", type=Path, default=None, help="result file (default stdout)")
    p.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="structured (json) or tabular (csv) output",
    )


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _json_document(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def cmd_cluster(args: argparse.Namespace) -> int:
    k = 2 if args.k is None else args.k
    if k < 1:
        print("error: k must be positive", file=sys.stderr)
        return 2
    P = load_weighted_points(args.input)
    seed = args.seed
    started = time.perf_counter()
    if args.solver == "ptas":
        result = ptas.solve(
            P, k, args.epsilon, _ptas_overrides(args), master_seed=seed,
            threads=args.threads,
        )
    elif args.solver == "kmeanspp-lloyd":
        result = baselines.kmeanspp_lloyd(P, k, RandomSource(seed))
    else:
        exact = brute_force_opt(P, k)
        meta = {
            "solver": "oracle",
            "partitions_evaluated": exact.partitions_evaluated,
            "groups": [list(g) for g in exact.groups],
        }
        result = ClusteringResult.from_centers(P, exact.centers, meta)
    elapsed = time.perf_counter() - started

    if args.format == "csv":
        _emit(_cluster_csv(P, result), args.output)
        print(
            f"cost={result.cost!r} centers={result.centers.centers.tolist()!r}",
            file=sys.stderr,
        )
    else:
        payload = {
            "command": "cluster",
            "input": str(args.input),
            "k": k,
            "epsilon": args.epsilon,
            "solver": args.solver,
            "seed": seed,
            "centers": result.centers.centers.tolist(),
            "assignment": result.assignment.tolist(),
            "cost": result.cost,
            "meta": result.meta,
        }
        _emit(_json_document(payload), args.output)
    print(f"solved in {elapsed:.3f}s", file=sys.stderr)
    return 0


def _cluster_csv(P, result: ClusteringResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(P.dim)] + ["weight", "cluster"])
    for i in range(P.n):
        writer.writerow(
            [repr(float(v)) for v in P.coords[i]]
            + [repr(float(P.weights[i])), int(result.assignment[i])]
        )
    return buf.getvalue()


def cmd_sensor(args: argparse.Namespace) -> int:
    region, file_grid_eps = sensor.load_region(args.region)
    grid_eps = args.grid_eps if args.grid_eps is not None else file_grid_eps
    if grid_eps is None:
        grid_eps = 0.25
    k = 1 if args.k is None else args.k
    if k < 1:
        print("error: k must be positive", file=sys.stderr)
        return 2
    started = time.perf_counter()
    report = sensor.place_sensors(
        region,
        k,
        args.epsilon,
        grid_eps,
        solver=args.solver,
        master_seed=args.seed,
        overrides=_ptas_overrides(args),
        threads=args.threads,
    )
    elapsed = time.perf_counter() - started
    payload = {
        "command": "sensor",
        "region": str(args.region),
        "k": k,
        "epsilon": args.epsilon,
        "grid_eps": grid_eps,
        "solver": args.solver,
        "seed": args.seed,
        "centers": report.centers.centers.tolist(),
        "coverage_cost": report.coverage,
        "quantization_cost": report.quantization_cost,
        "inertia_sum": report.inertia_sum,
        "n_cells": len(report.discretization.cells),
        "meta": report.result.meta,
    }
    _emit(_json_document(payload), args.output)
    points_path = args.points_output
    if points_path is None and args.output is not None:
        points_path = args.output.with_name(args.output.stem + "_points.csv")
    if points_path is not None:
        save_weighted_points(points_path, report.discretization.as_point_set)
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"solved in {elapsed:.3f}s", file=sys.stderr)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    only: tuple[str, ...] | None = None
    if args.only:
        names = []
        for chunk in args.only:
            names.extend(s for s in chunk.split(",") if s)
        only = tuple(names)
    thresholds = {}
    if args.parallel_axis_tol is not None:
        thresholds["parallel-axis"] = args.parallel_axis_tol
    results = verification.run_checks(args.seed, only, thresholds)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return 1
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.repeat < 1:
        print("error: repeat must be positive", file=sys.stderr)
        return 2
    solvers = tuple(args.solvers.split(","))
    valid = {"ptas", "kmeanspp-lloyd", "oracle"}
    if not set(solvers) <= valid:
        print(f"error: unknown solver in {args.solvers!r}", file=sys.stderr)
        return 2
    overrides = _ptas_overrides(args)
    # Desk-scale defaults: the theory constants would dominate the matrix.
    overrides.setdefault("c1", 8.0)
    overrides.setdefault("c2", 4.0)

    rows = []
    for inst in instances.oracle_instances():
        for solver in solvers:
            for j in range(args.repeat):
                seed = args.seed + j
                started = time.perf_counter()
                if solver == "ptas":
                    cost = ptas.solve(
                        inst.points, inst.k, args.epsilon, overrides,
                        master_seed=seed, threads=args.threads,
                    ).cost
                elif solver == "kmeanspp-lloyd":
                    cost = baselines.kmeanspp_lloyd(
                        inst.points, inst.k, RandomSource(seed)
                    ).cost
                else:
                    cost = brute_force_opt(inst.points, inst.k).cost
                elapsed = time.perf_counter() - started
                rows.append(
                    (inst.name, solver, seed, cost, cost / inst.opt_cost, elapsed)
                )

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["instance", "solver", "seed", "cost", "ratio_to_oracle", "wall_time_s"]
    )
    for name, solver, seed, cost, ratio, elapsed in rows:
        writer.writerow([name, solver, seed, repr(cost), repr(ratio), f"{elapsed:.6f}"])
    _emit(buf.getvalue(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wkmeans",
        description="Weighted k-means solvers and sensor-coverage placement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="cluster a weighted point CSV")
    p_cluster.add_argument(
        "--input",
        type=Path,
        default=Path(_bundled("sample_points.csv")),
        help="weighted point CSV (header x1,...,xd,weight)",
    )
    _add_solver_flags(p_cluster, ("ptas", "kmeanspp-lloyd", "oracle"))
    p_cluster.set_defaults(func=cmd_cluster)

    p_sensor = sub.add_parser("sensor", help="place sensors over a region")
    p_sensor.add_argument(
        "--region",
        type=Path,
        default=Path(_bundled("sample_region.json")),
        help="region file (polygon, density, optional grid_eps)",
    )
    p_sensor.add_argument(
        "--grid-eps", type=float, default=None, help="discretization cell size"
    )
    p_sensor.add_argument(
        "--points-output",
        type=Path,
        default=None,
        help="where to write the discretized point CSV",
    )
    _add_solver_flags(p_sensor, ("ptas", "kmeanspp-lloyd"))
    p_sensor.set_defaults(func=cmd_sensor)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument(
        "--only",
        action="append",
        default=None,
        metavar="CHECK[,CHECK...]",
        help=f"subset of checks; known: {', '.join(verification.check_names())}",
    )
    p_verify.add_argument(
        "--parallel-axis-tol",
        type=float,
        default=None,
        help="override the parallel-axis tolerance (harness self-test hook)",
    )
    p_verify.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="solver comparison matrix")
    p_bench.add_argument("--repeat", type=int, default=20, help="seeds per cell")
    p_bench.add_argument(
        "--solvers",
        default="ptas,kmeanspp-lloyd,oracle",
        help="comma-separated solver subset",
    )
    p_bench.add_argument("--epsilon", type=float, default=0.5)
    p_bench.add_argument("--c1", type=float, default=None)
    p_bench.add_argument("--c2", type=float, default=None)
    p_bench.add_argument("--trials", type=int, default=None)
    p_bench.add_argument("--tuple-budget", type=_tuple_budget, default=None)
    p_bench.add_argument("--adjust-epsilon", action="store_true")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--threads", type=int, default=1)
    p_bench.add_argument("--output", type=Path, default=None)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PointFileError, RegionFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EnumerationInfeasible, InstanceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
