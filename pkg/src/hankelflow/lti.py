"""Linear time-invariant system identification via Hankel rank deficiency.

A scalar trajectory p satisfies an order-m difference equation
``R_0 p(t) + R_1 p(t+1) + ... + R_m p(t+m) = 0`` exactly when the Hankel
matrix with m+1 rows built from p is rank deficient, with R its left kernel.
Identification of a noisy trajectory therefore reduces to finding the nearest
rank-deficient Hankel vector and reading R off the kernel at the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .driver import Solution, SolveParams, solve
from .exceptions import InvalidModelError, ShapeError
from .hankel import HankelShape, as_vector, build_hankel


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def normalize_coefficients(R) -> np.ndarray:
    """Scale to unit norm with the last nonzero component positive."""
    R = np.asarray(R, dtype=float)
    nrm = np.linalg.norm(R)
    if nrm == 0:
        raise InvalidModelError("coefficient vector is zero")
    R = R / nrm
    nz = np.flatnonzero(np.abs(R) > 0)
    if R[nz[-1]] < 0:
        R = -R
    return R


@dataclass
class LtiModel:
    """Difference-equation model with coefficients (R_0, ..., R_m), ||R|| = 1."""

    R: np.ndarray

    def __post_init__(self):
        self.R = normalize_coefficients(self.R)

    @property
    def order(self) -> int:
        return len(self.R) - 1


def simulate_lti(R, initial, T: int) -> np.ndarray:
    """Trajectory of length T: the first m values are ``initial``, the rest
    follow the recurrence p(t+m) = -(R_0 p(t) + ... + R_{m-1} p(t+m-1)) / R_m."""
    if isinstance(R, LtiModel):
        R = R.R
    R = np.asarray(R, dtype=float)
    m = len(R) - 1
    if m < 1:
        raise InvalidModelError("model must have order at least 1")
    if R[-1] == 0:
        raise InvalidModelError("leading coefficient R_m is zero; not in companion form")
    initial = as_vector(initial, m)
    if T <= m:
        raise ShapeError(f"trajectory length {T} must exceed the order {m}")
    p = np.empty(T)
    p[:m] = initial
    head = -R[:-1] / R[-1]
    for t in range(T - m):
        p[t + m] = head @ p[t : t + m]
    return p


def random_stable_model(order: int, seed) -> LtiModel:
    """Model whose characteristic roots lie in the annulus of radii [0.5, 0.95].

    Roots come in conjugate pairs (plus one random-sign real root for odd
    orders) so the expanded coefficients are real; deterministic per seed.
    """
    if order < 1:
        raise InvalidModelError("order must be at least 1")
    rng = _rng(seed)
    roots = []
    n_pairs, odd = divmod(order, 2)
    for _ in range(n_pairs):
        r = rng.uniform(0.5, 0.95)
        theta = rng.uniform(0.0, np.pi)
        z = r * np.exp(1j * theta)
        roots.extend([z, np.conj(z)])
    if odd:
        r = rng.uniform(0.5, 0.95)
        roots.append(r * (1.0 if rng.uniform() < 0.5 else -1.0))
    # np.poly gives monic coefficients in decreasing powers; the recurrence
    # wants (R_0, ..., R_m) with R_k the coefficient of z^k.
    coeffs = np.real(np.poly(np.asarray(roots)))
    return LtiModel(R=coeffs[::-1].copy())


def add_noise(p0, tau: float, seed) -> np.ndarray:
    """Noisy copy with exact relative noise norm: ||p - p0|| = tau * ||p0||.

    Complex data gets independent Gaussian real and imaginary parts.
    """
    p0 = as_vector(p0)
    if tau < 0:
        raise ValueError(f"noise level must be nonnegative, got {tau}")
    nrm = np.linalg.norm(p0)
    if nrm == 0:
        raise ValueError("cannot scale noise against a zero vector")
    if tau == 0:
        return p0.copy()
    rng = _rng(seed)
    if np.iscomplexobj(p0):
        r = rng.standard_normal(len(p0)) + 1j * rng.standard_normal(len(p0))
    else:
        r = rng.standard_normal(len(p0))
    return p0 + tau * r * nrm / np.linalg.norm(r)


def identify(p, order: int, params: SolveParams | None = None) -> tuple[LtiModel, Solution]:
    """Identify an order-m model from a (possibly noisy) trajectory.

    Solves the low-rank approximation problem on the Hankel matrix with
    order+1 rows and reads the coefficients off its left kernel.
    """
    p = as_vector(p)
    if len(p) < 2 * (order + 1):
        raise ShapeError(
            f"need at least {2 * (order + 1)} samples to identify order {order}, got {len(p)}"
        )
    solution = solve(p, order + 1, params=params)
    kernel = np.real(solution.kernel_left)
    model = LtiModel(R=kernel)
    return model, solution


def model_residual(model: LtiModel, p) -> float:
    """2-norm of R^T H_{m+1}(p), the per-window recurrence violation."""
    p = as_vector(p)
    shape = HankelShape.from_length(len(p), model.order + 1)
    return float(np.linalg.norm(model.R @ build_hankel(p, shape)))
