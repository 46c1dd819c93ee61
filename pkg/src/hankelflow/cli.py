"""Command-line front end.

Four modes:

* ``solve``   — one low-rank approximation run; writes a JSON solution and a
  TSV iteration/sigma trace.
* ``sysid``   — noise sweep for system identification: per-level mean misfit
  over seeded repetitions.
* ``polygon`` — polygon reconstruction from moments: recovered vertices plus
  error-vs-noise and error-vs-moment-count tables.
* ``bench``   — all of the above under one manifest recording the exact seeds.

Log verbosity is controlled by the HANKELFLOW_LOG environment variable
(DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bench, io
from .driver import SolveParams, distance, impose_missing, missing_mask, solve
from .exceptions import HankelFlowError
from .flow import FlowParams
from .hankel import HankelShape
from .moments import Polygon, complex_moments, recover_vertices, vertex_error

DEFAULT_TRIANGLE = np.array(
    [-0.4655 + 0.2201j, 0.0082 + 0.4599j, -0.3283 - 0.1809j]
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hankelflow",
        description="Hankel structured low-rank approximation and its applications",
    )
    parser.add_argument("--mode", required=True, choices=["solve", "sysid", "polygon", "bench"])
    parser.add_argument("--input", help="data vector file (one entry per line, '?' = missing)")
    parser.add_argument("--output", required=True, help="output directory")
    parser.add_argument("--m", type=int, help="Hankel row count for solve mode")
    parser.add_argument("--order", type=int, default=5, help="LTI model order (sysid)")
    parser.add_argument("--n-vertices", type=int, default=3, help="polygon vertex count")
    parser.add_argument("--n-moments", type=int, action="append",
                        help="max moment order N; repeatable for a sweep (polygon)")
    parser.add_argument("--noise", type=float, action="append",
                        help="noise level; repeatable for a sweep")
    parser.add_argument("--reps", type=int, default=50, help="repetitions per sweep point")
    parser.add_argument("--seed", type=int, default=0, help="master 64-bit seed")
    parser.add_argument("--samples", type=int, default=50, help="trajectory length (sysid)")
    parser.add_argument("--eps0", type=float, default=1e-2, help="initial perturbation norm")
    parser.add_argument("--delta", type=float, default=1e-2, help="outer norm increment")
    parser.add_argument("--tol-rank", type=float, default=1e-8,
                        help="rank tolerance, relative to ||H||_F")
    parser.add_argument("--tol-stationary", type=float, default=1e-8,
                        help="inner-flow stationarity tolerance")
    parser.add_argument("--h0", type=float, default=0.1, help="initial Euler step")
    parser.add_argument("--gamma", type=float, default=0.5, help="step reduction factor")
    parser.add_argument("--max-inner-steps", type=int, default=5000)
    parser.add_argument("--max-outer-iters", type=int, default=100)
    parser.add_argument("--weights", default="frobenius",
                        help="flow weights: 'unit', 'frobenius', or a weight file path")
    parser.add_argument("--distance", default="euclidean",
                        choices=["euclidean", "weighted", "frobenius"])
    parser.add_argument("--workers", type=int, default=bench.DEFAULT_WORKERS,
                        help="worker pool size for sweeps")
    return parser


def _solve_params(args) -> SolveParams:
    weights = args.weights
    if weights not in ("unit", "frobenius"):
        weights = np.asarray(io.read_vector(weights), dtype=float)
    return SolveParams(
        epsilon0=args.eps0,
        delta_increment=args.delta,
        flow=FlowParams(
            h0=args.h0,
            gamma=args.gamma,
            tol_stationary=args.tol_stationary,
            tol_rank=args.tol_rank,
            max_inner_steps=args.max_inner_steps,
        ),
        max_outer_iters=args.max_outer_iters,
        weights=weights,
        distance_mode=args.distance,
    )


def _run_solve(args, outdir: Path) -> int:
    if args.input is None or args.m is None:
        raise HankelFlowError("solve mode requires --input and --m")
    raw = io.read_vector(args.input)
    mask = missing_mask(raw)
    params = _solve_params(args)
    if mask.any():
        p, _ = impose_missing(raw)
        solution = solve(p, args.m, params=params)
        # Imputed entries do not count toward the reported misfit.
        shape = HankelShape.from_length(len(p), args.m)
        solution.distance = distance(
            p,
            solution.p_tilde,
            mode=params.distance_mode,
            weights=params.resolve_weights(shape) if params.distance_mode == "weighted" else None,
            m=args.m,
            exclude=mask,
        )
    else:
        solution = solve(raw, args.m, params=params)
    io.write_solution_json(outdir / "solution.json", solution)
    io.write_tsv(
        outdir / "trace.tsv",
        ["iteration", "sigma"],
        [(i, float(s)) for i, (_, s) in enumerate(solution.trace)],
    )
    io.write_tsv(
        outdir / "epsilon_trace.tsv",
        ["epsilon", "sigma"],
        [(float(e), float(s)) for e, s in solution.trace],
    )
    return 0 if solution.converged else 3


def _run_sysid(args, outdir: Path) -> int:
    noise = args.noise or [1e-4, 1e-3, 1e-2, 1e-1]
    rows = bench.sysid_noise_sweep(
        args.order, args.samples, noise, args.reps, args.seed,
        max_workers=args.workers,
    )
    io.write_tsv(
        outdir / "sysid_noise_sweep.tsv",
        ["noise_level", "mean_distance", "mean_true_noise_norm"],
        rows,
    )
    return 0


def _polygon_vertices(args) -> Polygon:
    if args.input:
        return Polygon(np.asarray(io.read_vector(args.input), dtype=complex))
    return Polygon(DEFAULT_TRIANGLE)


def _run_polygon(args, outdir: Path) -> int:
    poly = _polygon_vertices(args)
    moment_orders = args.n_moments or [8]
    noise = args.noise or [1e-3, 1e-2, 1e-1, 1.0]
    N0 = moment_orders[0]

    # Noiseless end-to-end reconstruction at the first moment order.
    tau = complex_moments(poly, N0)
    recovered, solution = recover_vertices(tau, poly.n, params=_solve_params(args))
    io.write_vector(outdir / "recovered_vertices.txt", recovered.vertices)
    with open(outdir / "vertex_error.txt", "w") as fh:
        fh.write(repr(vertex_error(poly, recovered)) + "\n")
    io.write_solution_json(outdir / "solution.json", solution)

    rows = bench.polygon_noise_sweep(
        poly, N0, noise, args.reps, args.seed, max_workers=args.workers
    )
    io.write_tsv(outdir / "polygon_error_vs_noise.tsv", ["noise_level", "mean_vertex_error"], rows)

    if len(moment_orders) > 1:
        fixed_noise = noise[0]
        mrows = bench.polygon_moment_sweep(
            poly, moment_orders, fixed_noise, args.reps, args.seed, max_workers=args.workers
        )
        io.write_tsv(
            outdir / "polygon_error_vs_moments.tsv",
            ["n_moments", "mean_vertex_error"],
            mrows,
        )
    return 0


def _run_bench(args, outdir: Path) -> int:
    manifest = {
        "seed": args.seed,
        "reps": args.reps,
        "order": args.order,
        "samples": args.samples,
        "noise": args.noise or [1e-3, 1e-2],
        "n_vertices": args.n_vertices,
        "n_moments": args.n_moments or [7, 8, 12],
        "outputs": [
            "sysid_noise_sweep.tsv",
            "polygon_error_vs_noise.tsv",
            "polygon_error_vs_moments.tsv",
        ],
    }
    args.noise = manifest["noise"]
    args.n_moments = manifest["n_moments"]
    _run_sysid(args, outdir)
    _run_polygon(args, outdir)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HANKELFLOW_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        if args.mode == "solve":
            return _run_solve(args, outdir)
        if args.mode == "sysid":
            return _run_sysid(args, outdir)
        if args.mode == "polygon":
            return _run_polygon(args, outdir)
        return _run_bench(args, outdir)
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HankelFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
