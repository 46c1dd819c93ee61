"""Outer continuation on the perturbation norm.

Alternates constrained and free phases: the constrained flow minimizes the
smallest singular value at fixed perturbation norm epsilon; the free flow then
grows the perturbation toward the next norm level while keeping sigma
non-increasing, so the branch sigma(epsilon) is followed continuously.  The
loop stops once sigma falls below the rank tolerance; the achieved epsilon is
the structured distance to singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import HankelFlowError, ShapeError, StagnationError
from .flow import (
    FlowParams,
    FlowState,
    descent_gradient,
    integrate_constrained,
    integrate_free,
)
from .hankel import (
    HankelShape,
    anti_diagonal_counts,
    as_vector,
    build_hankel,
    frobenius_weights,
    validate_weights,
)
from .spectral import smallest_singular_triplet

# Growth cap for the adaptive outer increment: 2**6 times the base value.
MAX_INCREMENT_DOUBLINGS = 6
# Hard cap on the terminal bisection that sharpens the achieved epsilon.
MAX_REFINE_ITERS = 60
# Sigma levels within this factor of the rank target are ambiguous (a stalled
# constrained phase cannot tell them from feasible ones) and do not tighten
# the bisection's lower bound.
EPS_LO_GUARD = 1e3


@dataclass
class SolveParams:
    """Configuration of a solve.

    ``weights`` selects the flow weighting: "frobenius" (anti-diagonal counts,
    which makes stationary points optimal for the plain Euclidean distance),
    "unit", or an explicit nonnegative vector (zero entries are frozen).
    ``distance_mode`` only affects the reported misfit.  ``refine_rel`` is the
    relative width at which the terminal bisection on epsilon stops (0
    disables the refinement).
    """

    epsilon0: float = 1e-2
    delta_increment: float = 1e-2
    flow: FlowParams = field(default_factory=FlowParams)
    max_outer_iters: int = 100
    weights: str | np.ndarray = "frobenius"
    distance_mode: str = "euclidean"
    refine_rel: float = 1e-4

    def __post_init__(self):
        if self.epsilon0 <= 0:
            raise ValueError(f"epsilon0 must be positive, got {self.epsilon0}")
        if self.delta_increment <= 0:
            raise ValueError(f"delta_increment must be positive, got {self.delta_increment}")
        if self.refine_rel < 0:
            raise ValueError(f"refine_rel must be nonnegative, got {self.refine_rel}")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if self.distance_mode not in ("euclidean", "weighted", "frobenius"):
            raise ValueError(f"unknown distance mode {self.distance_mode!r}")

    def resolve_weights(self, shape: HankelShape) -> np.ndarray:
        if isinstance(self.weights, str):
            if self.weights == "frobenius":
                return frobenius_weights(shape)
            if self.weights == "unit":
                return np.ones(shape.T)
            raise ValueError(f"unknown weight preset {self.weights!r}")
        return validate_weights(self.weights, shape.T)


@dataclass
class Solution:
    """Result of a solve: the approximant and how it was reached."""

    p_tilde: np.ndarray
    epsilon_star: float
    sigma_final: float
    distance: float
    kernel_left: np.ndarray
    kernel_right: np.ndarray
    trace: list[tuple[float, float]]
    converged: bool
    outer_iterations: int = 0
    notes: list[str] = field(default_factory=list)


def distance(p, p_tilde, mode: str = "euclidean", weights=None, m: int | None = None, exclude=None):
    """Misfit between the data and the approximant.

    ``euclidean``: plain 2-norm.  ``weighted``: sqrt(sum w_i |d_i|^2) with the
    given weights.  ``frobenius``: weighted by the anti-diagonal counts of the
    shape with ``m`` rows, equal to ||H_m(p) - H_m(p_tilde)||_F.  Entries where
    ``exclude`` is True (e.g. imputed missing values) are left out.
    """
    p = as_vector(p)
    q = as_vector(p_tilde, len(p))
    d2 = np.abs(p - q) ** 2
    if mode == "euclidean":
        w = np.ones(len(p))
    elif mode == "weighted":
        if weights is None:
            raise ValueError("weighted distance requires a weight vector")
        w = validate_weights(weights, len(p))
    elif mode == "frobenius":
        if m is None:
            raise ValueError("frobenius distance requires the row count m")
        w = anti_diagonal_counts(HankelShape.from_length(len(p), m)).astype(float)
    else:
        raise ValueError(f"unknown distance mode {mode!r}")
    if exclude is not None:
        w = np.where(np.asarray(exclude, dtype=bool), 0.0, w)
    return float(np.sqrt(np.sum(w * d2)))


def impose_missing(p_raw) -> tuple[np.ndarray, np.ndarray]:
    """Fill missing entries (NaN markers) and return (filled, weights).

    Interior runs of missing entries are filled by linear interpolation
    between the bracketing present values (a single gap thus gets the mean of
    its two neighbors); leading/trailing runs take the nearest present value.
    All weights are 1: imputed entries participate in the flow like ordinary
    ones, but callers typically exclude them from the reported distance.
    """
    arr = np.asarray(p_raw, dtype=complex if np.iscomplexobj(p_raw) else float)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {arr.shape}")
    missing = np.isnan(arr.real) | np.isnan(arr.imag) if np.iscomplexobj(arr) else np.isnan(arr)
    if missing.all():
        raise ShapeError("all entries are missing")
    present = np.flatnonzero(~missing)
    idx = np.arange(len(arr))
    if np.iscomplexobj(arr):
        filled = np.interp(idx, present, arr.real[present]) + 1j * np.interp(
            idx, present, arr.imag[present]
        )
    else:
        filled = np.interp(idx, present, arr[present])
    filled[~missing] = arr[~missing]
    return filled, np.ones(len(arr))


def missing_mask(p_raw) -> np.ndarray:
    """Boolean mask of the missing (NaN) entries of a raw vector."""
    arr = np.asarray(p_raw)
    if np.iscomplexobj(arr):
        return np.isnan(arr.real) | np.isnan(arr.imag)
    return np.isnan(arr)


def _constrained_phase(p, state, w, flow_params):
    """Constrained flow with stagnation treated as convergence of the phase."""
    try:
        return integrate_constrained(p, state, w, flow_params)
    except StagnationError as exc:
        trace = exc.trace
        trace.stagnated = True
        trace.stop_reason = trace.stop_reason or "stagnation"
        return exc.state, trace


def solve(p, m: int, params: SolveParams | None = None, delta0=None, callback=None) -> Solution:
    """Nearest (to the configured tolerance) rank-deficient Hankel vector.

    Starts from the steepest-descent direction for the smallest singular value
    of H_m(p) unless ``delta0`` is supplied, runs the constrained flow at
    ``epsilon0``, then grows the perturbation norm through alternating free
    and constrained phases until sigma is below the rank tolerance.
    """
    params = params or SolveParams()
    p = as_vector(p)
    T = len(p)
    if T < 2:
        raise ShapeError("need at least two data entries")
    shape = HankelShape.from_length(T, m)
    w = params.resolve_weights(shape)
    flow_params = params.flow
    notes: list[str] = []

    H0 = build_hankel(p, shape)
    hfro = float(np.linalg.norm(H0))
    sigma_target = flow_params.tol_rank * hfro
    trip0 = smallest_singular_triplet(H0)
    trace = [(0.0, trip0.sigma)]

    if trip0.sigma <= sigma_target:
        return Solution(
            p_tilde=p.copy(),
            epsilon_star=0.0,
            sigma_final=trip0.sigma,
            distance=0.0,
            kernel_left=trip0.u,
            kernel_right=trip0.v,
            trace=trace,
            converged=True,
            outer_iterations=0,
            notes=["input already rank deficient to tolerance"],
        )

    if delta0 is None and shape.m >= 2 and trip0.gap <= 1e-8 * hfro:
        # The smallest singular value is numerically multiple, so the steepest
        # descent direction is not unique; try several directions spanning the
        # degenerate subspace and keep the best converged solution.
        U, _, Vh = np.linalg.svd(H0)
        u1, v1 = U[:, -1], Vh[-1].conj()
        u2, v2 = U[:, -2], Vh[-2].conj()
        s2 = np.sqrt(2.0)
        candidates = [
            (u1, v1),
            (u2, v2),
            ((u1 + u2) / s2, (v1 + v2) / s2),
            ((u1 - u2) / s2, (v1 - v2) / s2),
            ((u1 + u2) / s2, (v1 - v2) / s2),
            ((u1 - u2) / s2, (v1 + v2) / s2),
        ]
        best = None
        for uu, vv in candidates:
            g0 = descent_gradient(uu, vv, w)
            gnorm = np.linalg.norm(g0)
            if gnorm == 0.0:
                continue
            cand_sol = solve(p, m, params, delta0=-g0 / gnorm, callback=callback)
            better = best is None or (
                (cand_sol.converged, -cand_sol.distance)
                > (best.converged, -best.distance)
            )
            if better:
                best = cand_sol
        if best is None:
            raise HankelFlowError("zero descent gradient at the starting point")
        best.notes.append(
            "degenerate smallest singular value at start; best of a deterministic multistart"
        )
        return best

    if delta0 is None:
        g0 = descent_gradient(trip0.u, trip0.v, w)
        gnorm = np.linalg.norm(g0)
        if gnorm == 0.0:
            raise HankelFlowError("zero descent gradient at the starting point")
        delta = -g0 / gnorm
    else:
        delta = as_vector(delta0, T).astype(complex if np.iscomplexobj(p) else float)
        delta = delta / np.linalg.norm(delta)

    def phase_state(delta, eps, prev_triplet):
        trip = smallest_singular_triplet(build_hankel(p + eps * delta, shape), align_to=prev_triplet)
        return FlowState(
            delta=delta, epsilon=eps, sigma=trip.sigma, u=trip.u, v=trip.v,
            step=flow_params.h0, gap=trip.gap,
        )

    eps = params.epsilon0
    state = phase_state(delta, eps, trip0)
    state, _ = _constrained_phase(p, state, w, flow_params)
    trace.append((eps, state.sigma))
    if callback is not None:
        callback(0, eps, state.sigma)

    # Largest norm level known to leave sigma above the rank tolerance; the
    # terminal bisection sharpens epsilon between this and the converged level.
    eps_lo = eps if state.sigma > EPS_LO_GUARD * sigma_target else 0.0

    increment = params.delta_increment
    increment_cap = params.delta_increment * 2.0**MAX_INCREMENT_DOUBLINGS
    # Tight-tolerance flow shared by the feasibility probes below (fold escape
    # and the terminal bisection).  Near the singularizing norm the flow
    # converges slowly, so the per-step decrease test needs to be much tighter
    # than usual to tell feasible levels from infeasible ones; feasible levels
    # are reached quickly from a known singularizing direction, so a modest
    # step cap keeps the infeasible probes from grinding toward stationarity.
    flow_tight = replace(
        flow_params,
        tol_stationary=1e-4 * flow_params.tol_stationary,
        max_inner_steps=min(flow_params.max_inner_steps, 300),
    )
    outer = 0
    failed = False
    while state.sigma > sigma_target and outer < params.max_outer_iters:
        outer += 1

        # Free phase; on stagnation the increment is doubled (bounded) before
        # declaring failure.
        doublings = 0
        while True:
            target = (eps + increment) / eps
            fstate, ftrace = integrate_free(p, state, w, flow_params, target)
            state = fstate
            grew = np.linalg.norm(fstate.delta) > 1.0 + 1e-12
            if fstate.sigma <= sigma_target or not ftrace.stagnated or grew:
                break
            if doublings >= MAX_INCREMENT_DOUBLINGS:
                failed = True
                notes.append("free flow stagnated; giving up after increment doublings")
                break
            doublings += 1
            increment *= 2.0
            notes.append(f"free flow stagnated; increment doubled to {increment:.3e}")
        if failed:
            break

        achieved = float(np.linalg.norm(state.delta))
        eps = eps * achieved
        delta = state.delta / achieved
        state = FlowState(
            delta=delta, epsilon=eps, sigma=state.sigma, u=state.u, v=state.v,
            step=flow_params.h0, gap=state.gap,
        )

        if state.sigma > sigma_target:
            state, _ = _constrained_phase(p, state, w, flow_params)

        sigma_prev = trace[-1][1]
        trace.append((eps, state.sigma))
        if callback is not None:
            callback(outer, eps, state.sigma)

        if state.sigma > sigma_target:
            # A stationary stop close to the target is ambiguous: the flow may
            # simply have stalled at a feasible level.  Only confidently
            # infeasible levels tighten the lower bisection bound.
            if state.sigma > EPS_LO_GUARD * sigma_target:
                eps_lo = eps
            # Slow progress along the branch: coarsen the continuation.  Any
            # resulting overshoot of the singularizing norm is walked back by
            # the terminal bisection.
            if sigma_prev - state.sigma < 0.25 * sigma_prev:
                increment = min(2.0 * increment, increment_cap)

    # Terminal bisection: continuation lands anywhere up to one increment past
    # the smallest singularizing norm on the branch; walk epsilon back down
    # between eps_lo and the converged level until the bracket is tight.
    if state.sigma <= sigma_target and params.refine_rel > 0:
        eps_hi = eps
        delta_hi = state.delta / float(np.linalg.norm(state.delta))
        trip_hi = state.triplet()
        refines = 0
        while eps_hi - eps_lo > params.refine_rel * eps_hi and refines < MAX_REFINE_ITERS:
            refines += 1
            eps_mid = 0.5 * (eps_lo + eps_hi)
            mid = phase_state(delta_hi, eps_mid, trip_hi)
            mid, _ = _constrained_phase(p, mid, w, flow_tight)
            if mid.sigma <= sigma_target:
                eps_hi = eps_mid
                delta_hi = mid.delta
                trip_hi = mid.triplet()
            else:
                eps_lo = eps_mid
        if eps_hi < eps:
            notes.append(f"epsilon refined from {eps:.6e} to {eps_hi:.6e} by bisection")
            eps = eps_hi
            state = phase_state(delta_hi, eps, trip_hi)
            trace[-1] = (eps, state.sigma)

    p_tilde = p + eps * state.delta
    final = smallest_singular_triplet(build_hankel(p_tilde, shape), align_to=state.triplet())
    converged = final.sigma <= sigma_target
    if not converged and outer >= params.max_outer_iters:
        notes.append("max_outer_iters exceeded; returning best state so far")
    dist = distance(
        p,
        p_tilde,
        mode=params.distance_mode,
        weights=w if params.distance_mode == "weighted" else None,
        m=m,
    )
    return Solution(
        p_tilde=p_tilde,
        epsilon_star=eps,
        sigma_final=final.sigma,
        distance=dist,
        kernel_left=final.u,
        kernel_right=final.v,
        trace=trace,
        converged=converged,
        outer_iterations=outer,
        notes=notes,
    )
