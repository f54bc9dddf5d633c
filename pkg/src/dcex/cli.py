"""Command-line entry point: extract, benchmark, sweep, and scaling runs.

Every command is deterministic under a fixed ``--seed`` (wall-clock timings
excluded); each output file is accompanied by a ``<name>.manifest.json``
sidecar echoing the command, parameters, seed, tool version, and per-phase
timings.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import DmmConfig, run_dmm, run_uce
from .benchmark import BenchmarkSpec, generate
from .criterion import MODE_DIRECTED, CriterionParams
from .evaluation import best_pair_adjusted_jaccard, save_membership
from .extraction import (
    NULL_DEGREE_PRESERVING,
    NULL_SAME_EDGE_COUNT,
    ExtractionConfig,
    extract_all,
)
from .graph import load_edge_list, save_edge_list
from .sampler import ChainConfig, run_chain, write_trace_csv
from .seeding import derive_seed

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

SWEEP_COLUMNS = [
    "seed",
    "method",
    "rho",
    "n",
    "p1",
    "p2",
    "adjusted_jaccard",
    "runtime_ms",
    "error",
]
SCALING_COLUMNS = [
    "size",
    "replicates",
    "mean_runtime_ms",
    "min_runtime_ms",
    "max_runtime_ms",
    "mean_steps",
]


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # unexpected: runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcex",
        description="Local community extraction in directed networks.",
    )
    parser.add_argument("--version", action="version", version=f"dcex {__version__}")
    sub = parser.add_subparsers(required=True, metavar="command")

    p = sub.add_parser("extract", help="extract communities from an edge-list file")
    p.add_argument("--graph", required=True, help="edge-list file (src dst [weight])")
    p.add_argument("--method", choices=["dce", "uce", "dmm"], default="dce")
    p.add_argument("--undirected", action="store_true",
                   help="treat input lines as undirected edges")
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--n", type=float, default=5.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-communities", type=int, default=10)
    p.add_argument("--null-model", choices=[NULL_SAME_EDGE_COUNT, NULL_DEGREE_PRESERVING],
                   default=NULL_SAME_EDGE_COUNT)
    p.add_argument("--null-replicates", type=int, default=100,
                   help="0 disables the significance stop rule")
    p.add_argument("--significance-quantile", type=float, default=0.95)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--parts", type=int, default=3, help="dmm: number of parts")
    p.add_argument("--refinement-passes", type=int, default=10)
    p.add_argument("--trace", default=None,
                   help="dump a step,W,accepted,|S| CSV for one diagnostic chain")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("benchmark", help="generate planted benchmark graphs")
    p.add_argument("--n1", type=int, default=40, help="sink community size")
    p.add_argument("--n2", type=int, default=50, help="source community size")
    p.add_argument("--n0", type=int, default=410, help="background size")
    p.add_argument("--p1", type=float, default=0.7)
    p.add_argument("--p2", type=float, default=0.05)
    p.add_argument("--figure1", action="store_true",
                   help="use the illustration-figure layout (source group first)")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("sweep", help="generate/extract/evaluate over a parameter grid")
    p.add_argument("--rho", default="0.8", help="comma-separated values")
    p.add_argument("--n", default="5", help="comma-separated values")
    p.add_argument("--p1", default="0.7", help="comma-separated values")
    p.add_argument("--p2", default="0.05", help="comma-separated values")
    p.add_argument("--n1", type=int, default=40)
    p.add_argument("--n2", type=int, default=50)
    p.add_argument("--n0", type=int, default=410)
    p.add_argument("--methods", default="dce,uce,dmm")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=0.05)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--parts", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("scaling", help="time one-community extraction vs network size")
    p.add_argument("--sizes", default="2000,4000,6000,8000,10000")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--n", type=float, default=5.0)
    p.add_argument("--c", type=float, default=0.05)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scaling)

    return parser


def _write_manifest(out_path, command: str, params: dict, seed: int, timings: dict):
    manifest = {
        "command": command,
        "params": params,
        "master_seed": seed,
        "version": __version__,
        "timings": timings,
    }
    path = Path(str(out_path) + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- extract ---------------------------------------------------------------


def _cmd_extract(args) -> int:
    t0 = time.perf_counter()
    graph_path = Path(args.graph)
    if not graph_path.exists():
        print(f"error: graph file not found: {graph_path}", file=sys.stderr)
        return EXIT_USAGE
    g = load_edge_list(graph_path, directed=not args.undirected)
    t_load = time.perf_counter() - t0

    timings = {"load_s": t_load}
    t1 = time.perf_counter()
    if args.method == "dmm":
        labels = run_dmm(g, DmmConfig(args.parts, args.refinement_passes))
        assignments = {g.label_of(u): cid for u, cid in labels.assignments.items()}
        save_membership(assignments, args.out)
    else:
        params = CriterionParams(rho=args.rho, n=args.n, mode=MODE_DIRECTED)
        chain = ChainConfig(
            c=args.c, max_steps=args.max_steps, patience=args.patience, seed=args.seed
        )
        config = ExtractionConfig(
            criterion=params,
            chain=chain,
            restarts=args.restarts,
            max_communities=args.max_communities,
            null_replicates=args.null_replicates,
            null_model=args.null_model,
            significance_quantile=args.significance_quantile,
        )
        report = extract_all(g, config) if args.method == "dce" else run_uce(g, config)
        report.save_json(args.out)
        if args.trace:
            tchain = replace(
                chain, seed=derive_seed(args.seed, 0, 0, 0), instrument=True
            )
            tres = run_chain(g, params, tchain)
            write_trace_csv(tres.records, args.trace)
    timings["run_s"] = time.perf_counter() - t1

    _write_manifest(args.out, "extract", _echo_args(args), args.seed, timings)
    return EXIT_OK


def _echo_args(args) -> dict:
    return {
        k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None
    }


# -- benchmark -------------------------------------------------------------


def _cmd_benchmark(args) -> int:
    t0 = time.perf_counter()
    spec_base = BenchmarkSpec(
        n1=args.n1, n2=args.n2, n0=args.n0, p1=args.p1, p2=args.p2, seed=args.seed
    )
    if args.replicates < 0:
        raise ValueError("replicates must be >= 0")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for r in range(args.replicates):
        spec = replace(spec_base, seed=derive_seed(args.seed, r))
        graph, truth = generate(spec, figure1_variant=args.figure1)
        save_edge_list(graph, out_dir / f"bench_{r:04d}.edgelist")
        truth.to_file(out_dir / f"bench_{r:04d}.truth")
    timings = {"total_s": time.perf_counter() - t0}
    _write_manifest(out_dir / "benchmark", "benchmark", _echo_args(args), args.seed,
                    timings)
    return EXIT_OK


# -- sweep -----------------------------------------------------------------


def _parse_floats(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ValueError("empty value list")
    return vals


def _sweep_task(payload: dict) -> list[dict]:
    """One (cell, replicate) unit: generate, run every method, score. Picklable."""
    spec = BenchmarkSpec(
        n1=payload["n1"],
        n2=payload["n2"],
        n0=payload["n0"],
        p1=payload["p1"],
        p2=payload["p2"],
        seed=payload["bench_seed"],
    )
    graph, truth = generate(spec)
    truth_pair = (truth.s1, truth.s2)
    rows = []
    for mi, method in enumerate(payload["methods"]):
        row = {
            "seed": payload["bench_seed"],
            "method": method,
            "rho": payload["rho"],
            "n": payload["n"],
            "p1": payload["p1"],
            "p2": payload["p2"],
            "adjusted_jaccard": "",
            "runtime_ms": "",
            "error": "",
        }
        t0 = time.perf_counter()
        try:
            if method == "dmm":
                labels = run_dmm(graph, DmmConfig(target_parts=payload["parts"]))
                cand = labels.as_sets()
                aj, _ = best_pair_adjusted_jaccard(truth_pair, cand)
            else:
                config = ExtractionConfig(
                    criterion=CriterionParams(
                        rho=payload["rho"], n=payload["n"], mode=MODE_DIRECTED
                    ),
                    chain=ChainConfig(
                        c=payload["c"],
                        max_steps=payload["max_steps"],
                        patience=payload["patience"],
                        seed=derive_seed(payload["bench_seed"], 100 + mi),
                    ),
                    restarts=payload["restarts"],
                    max_communities=2,
                    null_replicates=0,
                )
                report = (
                    extract_all(graph, config)
                    if method == "dce"
                    else run_uce(graph, config)
                )
                found = report.member_sets()
                c1 = found[0] if len(found) > 0 else set()
                c2 = found[1] if len(found) > 1 else set()
                aj, _ = best_pair_adjusted_jaccard(truth_pair, [c1, c2])
            row["adjusted_jaccard"] = f"{aj:.6f}"
        except Exception as exc:
            row["error"] = str(exc).replace("\n", " ")
        row["runtime_ms"] = f"{(time.perf_counter() - t0) * 1e3:.3f}"
        rows.append(row)
    return rows


def _cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    rhos = _parse_floats(args.rho)
    ns = _parse_floats(args.n)
    p1s = _parse_floats(args.p1)
    p2s = _parse_floats(args.p2)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("dce", "uce", "dmm"):
            raise ValueError(f"unknown method {m!r}")
    if args.replicates < 0:
        raise ValueError("replicates must be >= 0")
    if args.jobs < 1:
        raise ValueError("jobs must be >= 1")

    cells = list(product(rhos, ns, p1s, p2s))
    payloads = []
    for ci, (rho, n, p1, p2) in enumerate(cells):
        # Validates the cell's generator parameters up front.
        BenchmarkSpec(n1=args.n1, n2=args.n2, n0=args.n0, p1=p1, p2=p2)
        CriterionParams(rho=rho, n=n)
        for rep in range(args.replicates):
            payloads.append(
                {
                    "n1": args.n1,
                    "n2": args.n2,
                    "n0": args.n0,
                    "p1": p1,
                    "p2": p2,
                    "rho": rho,
                    "n": n,
                    "c": args.c,
                    "restarts": args.restarts,
                    "max_steps": args.max_steps,
                    "patience": args.patience,
                    "parts": args.parts,
                    "methods": methods,
                    "bench_seed": derive_seed(args.seed, ci, rep),
                }
            )

    if args.jobs > 1 and payloads:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            all_rows = list(pool.map(_sweep_task, payloads))
    else:
        all_rows = [_sweep_task(p) for p in payloads]

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for rows in all_rows:
            for row in rows:
                writer.writerow(row)
    timings = {"total_s": time.perf_counter() - t0}
    _write_manifest(args.out, "sweep", _echo_args(args), args.seed, timings)
    return EXIT_OK


# -- scaling ---------------------------------------------------------------


def _scaling_task(payload: dict) -> dict:
    """Time a single-community chain search on one benchmark replicate.

    Background density scales as 10/N so the expected degree stays flat;
    the run times the community search itself (no significance chains).
    """
    size = payload["size"]
    spec = BenchmarkSpec(
        n1=40,
        n2=50,
        n0=size - 90,
        p1=0.7,
        p2=min(1.0, 10.0 / size),
        seed=payload["bench_seed"],
    )
    graph, _ = generate(spec)
    params = CriterionParams(rho=payload["rho"], n=payload["n"], mode=MODE_DIRECTED)
    chain = ChainConfig(
        c=payload["c"],
        max_steps=payload["max_steps"],
        patience=payload["patience"],
        seed=payload["chain_seed"],
    )
    t0 = time.perf_counter()
    result = run_chain(graph, params, chain)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return {"size": size, "runtime_ms": runtime_ms, "steps": result.steps_run}


def _cmd_scaling(args) -> int:
    t0 = time.perf_counter()
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated sizes, got {args.sizes!r}") from None
    if not sizes:
        raise ValueError("empty size list")
    if min(sizes) < 100:
        raise ValueError("scaling sizes must be >= 100")
    if args.replicates < 1:
        raise ValueError("replicates must be >= 1")
    if args.jobs < 1:
        raise ValueError("jobs must be >= 1")

    payloads = []
    for si, size in enumerate(sizes):
        for rep in range(args.replicates):
            payloads.append(
                {
                    "size": size,
                    "rho": args.rho,
                    "n": args.n,
                    "c": args.c,
                    "max_steps": args.max_steps,
                    "patience": args.patience,
                    "bench_seed": derive_seed(args.seed, si, rep, 0),
                    "chain_seed": derive_seed(args.seed, si, rep, 1),
                }
            )
    if args.jobs > 1 and payloads:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_scaling_task, payloads))
    else:
        results = [_scaling_task(p) for p in payloads]

    rows = []
    fit_points = []
    for size in sizes:
        runtimes = [r["runtime_ms"] for r in results if r["size"] == size]
        steps = [r["steps"] for r in results if r["size"] == size]
        mean_rt = sum(runtimes) / len(runtimes)
        rows.append(
            {
                "size": size,
                "replicates": len(runtimes),
                "mean_runtime_ms": f"{mean_rt:.3f}",
                "min_runtime_ms": f"{min(runtimes):.3f}",
                "max_runtime_ms": f"{max(runtimes):.3f}",
                "mean_steps": f"{sum(steps) / len(steps):.1f}",
            }
        )
        fit_points.append((size, mean_rt))

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SCALING_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    timings = {"total_s": time.perf_counter() - t0}
    if len(fit_points) >= 2:
        timings["fitted_exponent"] = fit_runtime_exponent(fit_points)
    _write_manifest(args.out, "scaling", _echo_args(args), args.seed, timings)
    return EXIT_OK


def fit_runtime_exponent(points) -> float:
    """Least-squares slope of log(runtime) against log(size)."""
    xs = np.log([float(p[0]) for p in points])
    ys = np.log([max(float(p[1]), 1e-9) for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope


if __name__ == "__main__":
    sys.exit(main())
