"""End-to-end acceptance suite.

Each test prints one ``acceptance NN <label>: PASS/FAIL`` line and asserts the
stated tolerance, so the suite doubles as a human-readable report
(``pytest tests/test_acceptance.py -v -s``).
"""

import time

import numpy as np
import pytest

from oracles import det_surface_oracle

from hankelflow import bench, cli
from hankelflow.driver import SolveParams, distance, solve
from hankelflow.flow import (
    FlowParams,
    FlowState,
    descent_gradient,
    integrate_constrained,
    sigma_rate,
)
from hankelflow.hankel import (
    HankelShape,
    anti_diagonal_counts,
    build_hankel,
    project_hankel,
)
from hankelflow.lti import identify, random_stable_model, simulate_lti
from hankelflow.moments import (
    _vertex_coefficients,
    complex_moments,
    recover_vertices,
    vertex_error,
)
from hankelflow.spectral import smallest_singular_triplet

TRIANGLE = np.array([-0.4655 + 0.2201j, 0.0082 + 0.4599j, -0.3283 - 0.1809j])


def report(num: int, label: str, ok: bool, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"acceptance {num:02d} {label}: {'PASS' if ok else 'FAIL'}{suffix}")
    assert ok, f"acceptance criterion {num} ({label}) failed{suffix}"


def random_instance(rng):
    T = int(rng.integers(7, 32))
    m = int(rng.integers(2, min(8, (T + 1) // 2) + 1))
    if rng.integers(2):
        p = rng.standard_normal(T) + 1j * rng.standard_normal(T)
    else:
        p = rng.standard_normal(T)
    return p, m


@pytest.fixture(scope="module")
def monotonicity_suite():
    """200 seeded instances: constrained-phase sigma records plus full solve
    traces, shared by the two monotonicity criteria. Returns (records, elapsed)."""
    rng = np.random.default_rng(2024)
    params = SolveParams(
        flow=FlowParams(max_inner_steps=120),
        max_outer_iters=10,
        refine_rel=0.0,
    )
    records = []
    start = time.perf_counter()
    for _ in range(200):
        p, m = random_instance(rng)
        shape = HankelShape.from_length(len(p), m)
        H = build_hankel(p, shape)
        hfro = float(np.linalg.norm(H))
        w = params.resolve_weights(shape)
        trip = smallest_singular_triplet(H)
        g = descent_gradient(trip.u, trip.v, w)
        delta = -g / np.linalg.norm(g)
        state = FlowState(
            delta=delta, epsilon=0.1, sigma=trip.sigma, u=trip.u, v=trip.v,
            step=params.flow.h0, gap=trip.gap,
        )
        _, flow_trace = integrate_constrained(p, state, w, params.flow)
        inner_sigmas = [trip.sigma] + flow_trace.sigmas
        solution = solve(p, m, params=params)
        outer_sigmas = [s for _, s in solution.trace]
        records.append((hfro, inner_sigmas, outer_sigmas))
    elapsed = time.perf_counter() - start
    return records, elapsed


def test_criterion_01_inner_monotonicity(monotonicity_suite):
    records, elapsed = monotonicity_suite
    ok = all(
        b <= a + 1e-14 * hfro
        for hfro, inner, _ in records
        for a, b in zip(inner, inner[1:])
    )
    ok = ok and elapsed < 60.0
    report(1, "inner-flow monotonicity", ok, f"200 instances in {elapsed:.1f}s")


def test_criterion_02_outer_monotonicity(monotonicity_suite):
    records, _ = monotonicity_suite
    ok = all(
        b <= a + 1e-14 * hfro
        for hfro, _, outer in records
        for a, b in zip(outer, outer[1:])
    )
    report(2, "outer trace monotonicity", ok)


def test_criterion_03_projection_against_lstsq_oracle():
    rng = np.random.default_rng(3)
    worst_rel = 0.0
    worst_ortho = 0.0
    for k in range(100):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(m, 13))
        shape = HankelShape(m, n)
        B = rng.standard_normal((m, n))
        if k % 2:
            B = B + 1j * rng.standard_normal((m, n))
        # Least-squares oracle: expand B in the anti-diagonal indicator basis.
        A = np.zeros((m * n, shape.T))
        for i in range(m):
            for j in range(n):
                A[i * n + j, i + j] = 1.0
        oracle, *_ = np.linalg.lstsq(A, B.reshape(-1), rcond=None)
        proj = project_hankel(B)
        worst_rel = max(
            worst_rel, np.linalg.norm(proj - oracle) / np.linalg.norm(oracle)
        )
        residual = B - build_hankel(proj, shape)
        for _ in range(20):
            h = rng.standard_normal(shape.T)
            if np.iscomplexobj(B):
                h = h + 1j * rng.standard_normal(shape.T)
            inner = abs(np.vdot(build_hankel(h, shape), residual))
            worst_ortho = max(worst_ortho, inner / np.linalg.norm(h))
    ok = worst_rel <= 1e-12 and worst_ortho <= 1e-12 * 100
    report(
        3, "projection vs least-squares oracle", ok,
        f"rel {worst_rel:.2e}, ortho {worst_ortho:.2e}",
    )


def test_criterion_04_gradient_fidelity():
    rng = np.random.default_rng(4)
    eps, t_step = 0.05, 1e-6
    worst = 0.0
    checked = 0
    while checked < 50:
        p, m = random_instance(rng)
        shape = HankelShape.from_length(len(p), m)
        delta = rng.standard_normal(len(p))
        delta = delta / np.linalg.norm(delta)
        base = p + eps * delta
        trip = smallest_singular_triplet(build_hankel(base, shape))
        if trip.gap <= 1e-4 * np.linalg.norm(build_hankel(base, shape)):
            continue
        checked += 1
        direction = rng.standard_normal(len(p))
        predicted = sigma_rate(trip.u, trip.v, direction, eps)

        def sigma_at(t):
            H = build_hankel(p + eps * (delta + t * direction), shape)
            return np.linalg.svd(H, compute_uv=False)[-1]

        fd = (sigma_at(t_step) - sigma_at(-t_step)) / (2 * t_step)
        worst = max(worst, abs(predicted - fd) / max(abs(fd), 1e-12))
    ok = worst <= 1e-5
    report(4, "sigma rate vs finite differences", ok, f"worst rel {worst:.2e}")


def test_criterion_05_2x2_oracle_equivalence():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        p = rng.standard_normal(3)
        sol = solve(p, 2)
        oracle = det_surface_oracle(p)
        assert sol.converged
        worst = max(worst, abs(sol.distance - oracle) / oracle)
    ok = worst <= 1e-3
    report(5, "2x2 oracle equivalence", ok, f"worst rel {worst:.2e}")


def test_criterion_06_exact_sysid_recovery():
    worst_eps = 0.0
    worst_angle = 0.0
    for order in (1, 2, 3, 5):
        truth = random_stable_model(order, seed=600 + order)
        p = simulate_lti(truth, np.ones(order), 10 * order)
        model, solution = identify(p, order)
        worst_eps = max(worst_eps, solution.epsilon_star / np.linalg.norm(p))
        cosine = min(1.0, abs(float(model.R @ truth.R)))
        worst_angle = max(worst_angle, float(np.arccos(cosine)))
    ok = worst_eps <= 1e-6 and worst_angle <= 1e-5
    report(
        6, "exact-data system identification", ok,
        f"eps {worst_eps:.2e}, angle {worst_angle:.2e}",
    )


def test_criterion_07_noisy_sysid_feasibility_bound():
    start = time.perf_counter()
    rows = bench.sysid_noise_sweep(5, 50, [1e-3, 1e-2], reps=50, seed=7)
    elapsed = time.perf_counter() - start
    ratios = [mean_dist / mean_truth for _, mean_dist, mean_truth in rows]
    ok = all(r <= 1.25 for r in ratios) and elapsed < 600.0
    report(
        7, "noisy sysid feasibility bound", ok,
        f"ratios {', '.join(f'{r:.3f}' for r in ratios)} in {elapsed:.0f}s",
    )


def test_criterion_08_moment_identities():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z = z[np.argsort(np.angle(z - z.mean()))]
        tau = complex_moments(z, 1)
        scale = np.abs(_vertex_coefficients(z)).max()
        worst = max(worst, max(abs(tau[0]), abs(tau[1])) / scale)
    ok = worst <= 1e-12
    report(8, "vanishing first moments", ok, f"worst {worst:.2e}")


def test_criterion_09_polygon_exact_recovery():
    tau = complex_moments(TRIANGLE, 8)
    recovered, solution = recover_vertices(tau, 3)
    err = vertex_error(recovered, TRIANGLE)
    ok = solution.converged and err <= 1e-5
    report(9, "exact triangle recovery", ok, f"vertex error {err:.2e}")


def test_criterion_10_polygon_noise_trend():
    levels = [1e-3, 1e-2, 1e-1, 1.0]
    rows = bench.polygon_noise_sweep(TRIANGLE, 8, levels, reps=50, seed=10)
    errors = [e for _, e in rows]
    increasing = all(b > a for a, b in zip(errors, errors[1:]))
    mrows = bench.polygon_moment_sweep(TRIANGLE, [7, 12], 1e-3, reps=50, seed=10)
    more_moments_not_worse = mrows[1][1] <= mrows[0][1]
    ok = increasing and more_moments_not_worse
    report(
        10, "polygon error trends", ok,
        "noise means " + ", ".join(f"{e:.3g}" for e in errors)
        + f"; N=7 {mrows[0][1]:.3g} vs N=12 {mrows[1][1]:.3g}",
    )


def test_criterion_11_bench_determinism(tmp_path):
    args = [
        "--mode", "bench", "--order", "2", "--samples", "16", "--reps", "3",
        "--noise", "1e-3", "--noise", "1e-2",
        "--n-moments", "7", "--n-moments", "8", "--seed", "11",
    ]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    code1 = cli.main(args + ["--output", str(out1)])
    code2 = cli.main(args + ["--output", str(out2)])
    names = sorted(p.name for p in out1.iterdir())
    identical = all(
        (out1 / name).read_bytes() == (out2 / name).read_bytes() for name in names
    )
    ok = code1 == 0 and code2 == 0 and identical
    report(11, "bench byte-determinism", ok, f"{len(names)} artifacts compared")
