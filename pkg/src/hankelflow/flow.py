"""Fixed-norm inner level of the two-level iteration.

For a fixed perturbation norm ``epsilon`` the direction ``delta`` evolves
along a gradient system for the smallest singular value of
``H_m(p + epsilon * delta)``.  Two dynamics are integrated with the same
accept/reject explicit Euler scheme:

* constrained: the right-hand side is projected onto the tangent space of the
  unit sphere, so ``||delta|| = 1`` is conserved (with an explicit
  renormalization after every step);
* free: the raw negative gradient, which lets ``||delta||`` grow and is used
  to pass continuously between perturbation-norm levels.

A candidate Euler step is rejected whenever it would increase the smallest
singular value; on rejection the step size shrinks by ``gamma`` and the
cached right-hand side is reused (same base point).  After an accepted step
the step size is allowed to grow by ``1/gamma`` up to ``h_max``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import StagnationError
from .hankel import HankelShape, apply_weights, build_hankel, project_hankel
from .spectral import SingularTriplet, smallest_singular_triplet

# Step size below which the controller is considered stalled.
H_UNDERFLOW = 1e-16
# Relative threshold on ||rhs|| / ||g|| for declaring the flow stationary.
RHS_STATIONARY_RTOL = 1e-9


@dataclass
class FlowParams:
    """Tuning knobs of the inner integrators.

    ``tol_rank`` is relative to ``||H_m(p)||_F``; ``tol_stationary`` is the
    absolute per-step decrease of sigma below which the constrained flow is
    declared converged.  They control different phenomena (problem success vs
    flow convergence) and are deliberately distinct.
    """

    h0: float = 0.1
    gamma: float = 0.5
    h_max: float = 1.0
    tol_stationary: float = 1e-8
    tol_rank: float = 1e-8
    max_inner_steps: int = 5000

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.h0 <= 0 or self.h_max <= 0 or self.h0 > self.h_max:
            raise ValueError(f"need 0 < h0 <= h_max, got h0={self.h0}, h_max={self.h_max}")
        if self.tol_stationary <= 0 or self.tol_rank <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_inner_steps < 1:
            raise ValueError("max_inner_steps must be at least 1")


@dataclass
class FlowState:
    """Current point of the two-level iteration."""

    delta: np.ndarray
    epsilon: float
    sigma: float
    u: np.ndarray
    v: np.ndarray
    step: float
    gap: float = float("inf")

    def triplet(self) -> SingularTriplet:
        return SingularTriplet(sigma=self.sigma, u=self.u, v=self.v, gap=self.gap)


@dataclass(frozen=True)
class StepRecord:
    sigma: float
    h: float
    rhs_norm: float


@dataclass
class FlowTrace:
    """Per-phase record of accepted steps and controller events."""

    accepted: list[StepRecord] = field(default_factory=list)
    rejected: int = 0
    degenerate_steps: int = 0
    truncated: bool = False
    stagnated: bool = False
    stop_reason: str = ""

    @property
    def sigmas(self) -> list[float]:
        return [rec.sigma for rec in self.accepted]


def real_inner(a, b) -> float:
    """Real part of the conjugate-linear inner product <a, b>."""
    return float(np.real(np.vdot(a, b)))


def descent_gradient(u, v, w) -> np.ndarray:
    """Weighted anti-gradient core g = w .* vect(P_H(u v^H))."""
    return apply_weights(project_hankel(np.outer(u, np.conj(v))), w)


def constrained_rhs(delta, g) -> np.ndarray:
    """Sphere-tangent right-hand side -g + <delta, g> delta."""
    return -g + real_inner(delta, g) * delta


def free_rhs(g) -> np.ndarray:
    """Unconstrained right-hand side -g (norm is free to grow)."""
    return -np.asarray(g)


def sigma_rate(u, v, delta_dot, epsilon: float) -> float:
    """Derivative of the smallest singular value along a direction delta_dot:
    epsilon * Re(u^H H_m(delta_dot) v)."""
    shape = HankelShape.from_length(len(delta_dot), len(u))
    H = build_hankel(np.asarray(delta_dot), shape)
    return epsilon * float(np.real(np.conj(u) @ H @ v))


def _shape_of(p, u) -> HankelShape:
    return HankelShape.from_length(len(p), len(u))


def _integrate(p, state, w, params, *, constrained, norm_target=None):
    """Shared accept/reject Euler loop for both dynamics."""
    p = np.asarray(p)
    shape = _shape_of(p, state.u)
    hfro = float(np.linalg.norm(build_hankel(p, shape)))
    sigma_target = params.tol_rank * hfro

    delta = np.array(state.delta)
    eps = state.epsilon
    sigma = state.sigma
    h = min(state.step, params.h_max)
    triplet = state.triplet()
    trace = FlowTrace()

    for _ in range(params.max_inner_steps):
        g = descent_gradient(triplet.u, triplet.v, w)
        if constrained:
            rhs = constrained_rhs(delta, g)
        else:
            rhs = free_rhs(g)
        rhs_norm = float(np.linalg.norm(rhs))
        gnorm = float(np.linalg.norm(g))
        if rhs_norm <= RHS_STATIONARY_RTOL * max(gnorm, np.finfo(float).tiny):
            trace.stop_reason = "stationary"
            if not constrained and norm_target is not None:
                trace.stagnated = np.linalg.norm(delta) < norm_target
            break

        h_try = h
        if not constrained and norm_target is not None:
            # Clamp the step to land exactly on the norm target instead of
            # overshooting it by up to h * ||rhs||.
            a = rhs_norm**2
            b = 2.0 * real_inner(delta, rhs)
            c = float(np.linalg.norm(delta)) ** 2 - norm_target**2
            disc = b * b - 4.0 * a * c
            if a > 0 and disc >= 0:
                h_cross = (-b + np.sqrt(disc)) / (2.0 * a)
                if h_cross < H_UNDERFLOW:
                    trace.stop_reason = "norm_target"
                    break
                if h_cross < h_try:
                    h_try = h_cross

        clamped = h_try < h
        accepted = False
        while h_try >= H_UNDERFLOW:
            cand = delta + h_try * rhs
            if constrained:
                cand = cand / np.linalg.norm(cand)
            cand_triplet = smallest_singular_triplet(
                build_hankel(p + eps * cand, shape), align_to=triplet
            )
            if cand_triplet.sigma <= sigma:
                accepted = True
                break
            trace.rejected += 1
            h_try *= params.gamma
            clamped = False

        if not accepted:
            if constrained:
                raise StagnationError(
                    "step size underflowed before the stopping test",
                    state=FlowState(delta, eps, sigma, triplet.u, triplet.v, h),
                    trace=trace,
                )
            trace.stagnated = True
            trace.stop_reason = "stagnation"
            break

        delta = cand
        decrease = sigma - cand_triplet.sigma
        sigma = cand_triplet.sigma
        triplet = cand_triplet
        if cand_triplet.near_multiple(hfro):
            trace.degenerate_steps += 1
        trace.accepted.append(StepRecord(sigma=sigma, h=h_try, rhs_norm=rhs_norm))
        if not clamped:
            # A clamped step says nothing about the stable step size; only
            # full-length accepted steps feed the controller.
            h = min(h_try / params.gamma, params.h_max)

        if sigma <= sigma_target:
            trace.stop_reason = "rank"
            break
        if (
            not constrained
            and norm_target is not None
            and np.linalg.norm(delta) >= norm_target * (1.0 - 1e-12)
        ):
            trace.stop_reason = "norm_target"
            break
        if constrained and decrease < params.tol_stationary:
            trace.stop_reason = "stationary"
            break
    else:
        trace.truncated = True
        trace.stop_reason = "max_steps"

    out = FlowState(
        delta=delta, epsilon=eps, sigma=sigma, u=triplet.u, v=triplet.v, step=h, gap=triplet.gap
    )
    return out, trace


def integrate_constrained(p, state: FlowState, w, params: FlowParams):
    """Run the norm-preserving flow until stationarity, rank tolerance, or the
    step cap.  The accepted-sigma sequence is non-increasing by construction."""
    return _integrate(p, state, w, params, constrained=True)


def integrate_free(p, state: FlowState, w, params: FlowParams, norm_target: float):
    """Run the free flow at fixed epsilon until ``||delta|| >= norm_target``
    (the ratio epsilon_new / epsilon_old) or the rank tolerance.  Stagnation
    before the target sets a flag instead of raising; the caller decides."""
    if norm_target <= np.linalg.norm(state.delta):
        trace = FlowTrace(stop_reason="norm_target")
        return FlowState(
            delta=np.array(state.delta),
            epsilon=state.epsilon,
            sigma=state.sigma,
            u=state.u,
            v=state.v,
            step=state.step,
            gap=state.gap,
        ), trace
    return _integrate(p, state, w, params, constrained=False, norm_target=norm_target)
