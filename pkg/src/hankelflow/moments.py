"""Polygon reconstruction from complex moments.

The moments of a nondegenerate polygon with vertices z_1..z_n are
``tau_k = sum_j a_j z_j^k`` where a_j depends on the signed triangle areas of
consecutive vertex triples.  The Hankel matrix of exact moments annihilates
the coefficient vector (p, 1) of the monic polynomial with the vertices as
roots, so reconstruction from noisy moments is a complex Hankel structured
low-rank approximation followed by a root extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .driver import Solution, SolveParams, solve
from .exceptions import DegeneratePolygonError, ShapeError

# Relative threshold on the kernel's last component before the monic
# normalization is declared degenerate.
_MONIC_TOL = 1e-10


@dataclass
class Polygon:
    """Cyclically ordered complex vertices of a simple polygon."""

    vertices: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.vertices, dtype=complex)
        if z.ndim != 1 or len(z) < 3:
            raise DegeneratePolygonError("a polygon needs at least three vertices")
        if len(np.unique(z)) != len(z):
            raise DegeneratePolygonError("polygon vertices must be pairwise distinct")
        self.vertices = z

    @property
    def n(self) -> int:
        return len(self.vertices)


def _vertex_coefficients(z: np.ndarray) -> np.ndarray:
    """a_j = 2 A_j / ((z_j - z_{j-1})(z_j - z_{j+1})) with A_j the signed area
    determinant of the triple (z_{j-1}, z_j, z_{j+1}); cyclic indexing."""
    prev = np.roll(z, 1)
    nxt = np.roll(z, -1)
    if np.any(z == prev) or np.any(z == nxt):
        raise DegeneratePolygonError("adjacent vertices coincide")
    det = (
        prev * (np.conj(z) - np.conj(nxt))
        - np.conj(prev) * (z - nxt)
        + (z * np.conj(nxt) - np.conj(z) * nxt)
    )
    area = 0.25j * det
    return 2.0 * area / ((z - prev) * (z - nxt))


def complex_moments(poly, N: int) -> np.ndarray:
    """Moments tau_0..tau_N of a polygon; tau_0 and tau_1 vanish identically."""
    if not isinstance(poly, Polygon):
        poly = Polygon(np.asarray(poly, dtype=complex))
    if N < 0:
        raise ValueError(f"N must be nonnegative, got {N}")
    a = _vertex_coefficients(poly.vertices)
    powers = poly.vertices[None, :] ** np.arange(N + 1)[:, None]
    return powers @ a


def recover_vertices(tau, n: int, params: SolveParams | None = None) -> tuple[Polygon, Solution]:
    """Vertices from (possibly noisy) moments tau_0..tau_N.

    The moment Hankel matrix has n+1 columns and N-n+1 rows; since the solver
    works with wide matrices, the transposed problem with n+1 rows is solved
    and the sought right kernel is the conjugate of the left kernel found.
    The kernel, normalized monic, yields the vertex polynomial whose roots are
    returned in cyclic (angular) order around their centroid.
    """
    tau = np.asarray(tau, dtype=complex)
    if tau.ndim != 1:
        raise ShapeError(f"expected a 1-D moment vector, got shape {tau.shape}")
    N = len(tau) - 1
    if n < 3:
        raise DegeneratePolygonError("a polygon needs at least three vertices")
    if N <= 2 * n:
        raise ShapeError(f"need more than 2n = {2 * n} moments beyond tau_0, got N = {N}")

    solution = solve(tau, n + 1, params=params)
    kernel = np.conj(solution.kernel_left)
    if abs(kernel[-1]) < _MONIC_TOL * np.linalg.norm(kernel):
        raise DegeneratePolygonError(
            "moment kernel is not monic-normalizable (last component vanishes)"
        )
    kernel = kernel / kernel[-1]
    # kernel = (p_n, ..., p_1, 1); np.roots wants decreasing powers.
    coeffs = kernel[::-1]
    roots = np.roots(coeffs)
    centroid = roots.mean()
    order = np.argsort(np.angle(roots - centroid))
    return Polygon(roots[order]), solution


def vertex_error(z, z_hat) -> float:
    """2-norm between vertex lists after sorting each by decreasing real part
    (ties broken by decreasing imaginary part)."""
    z = np.asarray(z.vertices if isinstance(z, Polygon) else z, dtype=complex)
    z_hat = np.asarray(z_hat.vertices if isinstance(z_hat, Polygon) else z_hat, dtype=complex)
    if z.shape != z_hat.shape:
        raise ShapeError(f"vertex count mismatch: {z.shape} vs {z_hat.shape}")

    def ordered(a):
        return a[np.lexsort((-a.imag, -a.real))]

    return float(np.linalg.norm(ordered(z) - ordered(z_hat)))


def vertex_error_assignment(z, z_hat) -> float:
    """Permutation-optimal variant of :func:`vertex_error` (minimum over vertex
    assignments, computed with the Hungarian method)."""
    from scipy.optimize import linear_sum_assignment

    z = np.asarray(z.vertices if isinstance(z, Polygon) else z, dtype=complex)
    z_hat = np.asarray(z_hat.vertices if isinstance(z_hat, Polygon) else z_hat, dtype=complex)
    if z.shape != z_hat.shape:
        raise ShapeError(f"vertex count mismatch: {z.shape} vs {z_hat.shape}")
    cost = np.abs(z[:, None] - z_hat[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum()))
