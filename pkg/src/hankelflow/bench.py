"""Seeded benchmark sweeps over noise levels and moment counts.

All randomness flows from a single 64-bit seed: each trial derives its own
generator from ``SeedSequence([seed, *counters])``, so trials are independent
of execution order and the sweeps can fan out over a worker pool while staying
byte-deterministic.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .driver import SolveParams, distance, solve
from .lti import add_noise, identify, random_stable_model, simulate_lti
from .moments import Polygon, complex_moments, recover_vertices, vertex_error

DEFAULT_WORKERS = 4


def spawn_rng(seed: int, *counters: int) -> np.random.Generator:
    """Deterministic child generator for a (seed, counter...) key."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, counters)]))


def scaled_params(base: SolveParams | None, scale: float) -> SolveParams:
    """Continuation parameters adapted to an expected distance scale.

    Starting well below the expected optimum and stepping at a fraction of it
    keeps the final perturbation norm from overshooting the distance.
    """
    base = base or SolveParams()
    scale = max(float(scale), 1e-12)
    # Sweep statistics tolerate a coarser terminal refinement than the default,
    # and a tighter per-phase step budget: on hard instances the flow spends
    # its whole budget for sub-percent progress per phase, so a cap bounds the
    # cost of the worst draws without measurably moving the aggregates.
    return replace(
        base,
        epsilon0=0.05 * scale,
        delta_increment=0.25 * scale,
        refine_rel=1e-3,
        flow=replace(base.flow, max_inner_steps=min(base.flow.max_inner_steps, 1200)),
    )


def _map(fn, items, max_workers: int | None):
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def sysid_noise_sweep(
    order: int,
    T: int,
    noise_levels,
    reps: int,
    seed: int,
    params: SolveParams | None = None,
    max_workers: int | None = DEFAULT_WORKERS,
):
    """Mean identification misfit per noise level over ``reps`` seeded runs.

    Returns rows (tau, mean_distance, mean_true_noise_norm) where the last
    column is the mean of ||p - p0||, the misfit of the feasible true data.
    """

    def trial(args):
        level_idx, tau, rep = args
        rng = spawn_rng(seed, level_idx, rep)
        model = random_stable_model(order, rng)
        initial = rng.standard_normal(order)
        p0 = simulate_lti(model, initial, T)
        p = add_noise(p0, tau, rng)
        run_params = scaled_params(params, tau * np.linalg.norm(p))
        _, solution = identify(p, order, params=run_params)
        return level_idx, solution.distance, distance(p, p0)

    jobs = [(i, tau, rep) for i, tau in enumerate(noise_levels) for rep in range(reps)]
    results = _map(trial, jobs, max_workers)
    rows = []
    for i, tau in enumerate(noise_levels):
        dists = [d for j, d, _ in results if j == i]
        truths = [t for j, _, t in results if j == i]
        rows.append((tau, float(np.mean(dists)), float(np.mean(truths))))
    return rows


def polygon_noise_sweep(
    vertices,
    N: int,
    noise_levels,
    reps: int,
    seed: int,
    params: SolveParams | None = None,
    max_workers: int | None = DEFAULT_WORKERS,
):
    """Mean vertex error per noise level over ``reps`` seeded runs; rows
    (tau, mean_vertex_error)."""
    poly = vertices if isinstance(vertices, Polygon) else Polygon(np.asarray(vertices, complex))
    tau_exact = complex_moments(poly, N)

    def trial(args):
        level_idx, tau_noise, rep = args
        rng = spawn_rng(seed, level_idx, rep)
        noisy = add_noise(tau_exact, tau_noise, rng)
        run_params = scaled_params(params, tau_noise * np.linalg.norm(noisy))
        recovered, _ = recover_vertices(noisy, poly.n, params=run_params)
        return level_idx, vertex_error(poly, recovered)

    jobs = [(i, lv, rep) for i, lv in enumerate(noise_levels) for rep in range(reps)]
    results = _map(trial, jobs, max_workers)
    rows = []
    for i, lv in enumerate(noise_levels):
        errs = [e for j, e in results if j == i]
        rows.append((lv, float(np.mean(errs))))
    return rows


def polygon_moment_sweep(
    vertices,
    moment_counts,
    noise_level: float,
    reps: int,
    seed: int,
    params: SolveParams | None = None,
    max_workers: int | None = DEFAULT_WORKERS,
):
    """Mean vertex error as a function of the moment order N at fixed noise;
    rows (N, mean_vertex_error)."""
    poly = vertices if isinstance(vertices, Polygon) else Polygon(np.asarray(vertices, complex))

    def trial(args):
        n_idx, N, rep = args
        rng = spawn_rng(seed, 1000 + n_idx, rep)
        tau_exact = complex_moments(poly, N)
        noisy = add_noise(tau_exact, noise_level, rng)
        run_params = scaled_params(params, noise_level * np.linalg.norm(noisy))
        recovered, _ = recover_vertices(noisy, poly.n, params=run_params)
        return n_idx, vertex_error(poly, recovered)

    jobs = [(i, N, rep) for i, N in enumerate(moment_counts) for rep in range(reps)]
    results = _map(trial, jobs, max_workers)
    rows = []
    for i, N in enumerate(moment_counts):
        errs = [e for j, e in results if j == i]
        rows.append((N, float(np.mean(errs))))
    return rows


def initial_estimate_dispersion(
    p,
    m: int,
    n_runs: int,
    seed: int,
    params: SolveParams | None = None,
    perturbation_std: float = 0.5,
    max_workers: int | None = DEFAULT_WORKERS,
) -> float:
    """Sensitivity of the solution to the starting direction.

    Runs the solver from the default steepest-descent direction perturbed by
    seeded Gaussian noise (renormalized) and reports the maximum pairwise
    2-norm distance between the computed approximants.
    """
    from .flow import descent_gradient
    from .hankel import HankelShape, build_hankel
    from .spectral import smallest_singular_triplet

    p = np.asarray(p)
    run_params = params or SolveParams()
    shape = HankelShape.from_length(len(p), m)
    trip = smallest_singular_triplet(build_hankel(p, shape))
    g = descent_gradient(trip.u, trip.v, run_params.resolve_weights(shape))
    base = -g / np.linalg.norm(g)

    def perturbed(rep):
        rng = spawn_rng(seed, 2000, rep)
        if np.iscomplexobj(p):
            noise = rng.standard_normal(len(p)) + 1j * rng.standard_normal(len(p))
        else:
            noise = rng.standard_normal(len(p))
        d0 = base + perturbation_std * noise
        d0 = d0 / np.linalg.norm(d0)
        return solve(p, m, params=run_params, delta0=d0).p_tilde

    tildes = _map(perturbed, range(n_runs), max_workers)
    worst = 0.0
    for i in range(len(tildes)):
        for j in range(i + 1, len(tildes)):
            worst = max(worst, float(np.linalg.norm(tildes[i] - tildes[j])))
    return worst
