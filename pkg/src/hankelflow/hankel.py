"""Hankel structure bookkeeping.

Builds Hankel matrices from vectors and back, projects arbitrary matrices
orthogonally (Frobenius sense) onto the Hankel subspace, and handles the
per-entry weights used by the weighted flow.  A length-T vector populates the
T anti-diagonals of an m x n matrix with T = m + n - 1; anti-diagonal k holds
``c_k = min(k, m, n, T - k + 1)`` entries (1-based k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError, StructureError


@dataclass(frozen=True)
class HankelShape:
    """Geometry linking a length-T vector to an m x n Hankel matrix.

    The convention m <= n is enforced at construction; callers wanting a tall
    matrix transpose their problem instead.
    """

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ShapeError(f"matrix dimensions must be positive, got {self.m}x{self.n}")
        if self.m > self.n:
            raise ShapeError(
                f"row count m={self.m} exceeds column count n={self.n}; "
                "transpose the problem instead"
            )

    @property
    def T(self) -> int:
        return self.m + self.n - 1

    @classmethod
    def from_length(cls, T: int, m: int) -> "HankelShape":
        """Shape for a length-T vector mapped to a matrix with m rows."""
        if T < 1:
            raise ShapeError(f"vector length must be positive, got {T}")
        return cls(m, T - m + 1)


def as_vector(p, T: int | None = None) -> np.ndarray:
    """Validate and return a 1-D finite data vector."""
    arr = np.asarray(p)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {arr.shape}")
    if T is not None and arr.shape[0] != T:
        raise ShapeError(f"expected length {T}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("data vector contains NaN or Inf")
    return arr


def validate_weights(w, T: int) -> np.ndarray:
    """Validate a weight vector: nonnegative reals, at least one positive."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != T:
        raise ShapeError(f"weight vector must have length {T}, got shape {arr.shape}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ShapeError("weights must be finite and nonnegative")
    if not np.any(arr > 0):
        raise ShapeError("at least one weight must be positive")
    return arr


def anti_diagonal_counts(shape: HankelShape) -> np.ndarray:
    """Number of matrix entries on each of the T anti-diagonals."""
    k = np.arange(1, shape.T + 1)
    return np.minimum.reduce([k, np.full_like(k, shape.m), np.full_like(k, shape.n), shape.T - k + 1])


def build_hankel(p, shape: HankelShape) -> np.ndarray:
    """Hankel matrix H with H[i, j] = p[i + j] (0-based)."""
    arr = as_vector(p, shape.T)
    return np.lib.stride_tricks.sliding_window_view(arr, shape.n)


def vect(H) -> np.ndarray:
    """Inverse of :func:`build_hankel`; requires exact anti-diagonal constancy."""
    H = np.asarray(H)
    if H.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {H.shape}")
    m, n = H.shape
    p = np.concatenate([H[:, 0], H[-1, 1:]])
    if m <= n:
        rebuilt = build_hankel(p, HankelShape(m, n))
    else:
        rebuilt = np.lib.stride_tricks.sliding_window_view(p, n)
    if not np.array_equal(rebuilt, H):
        raise StructureError("matrix is not constant along its anti-diagonals")
    return p.copy()


def project_hankel(B) -> np.ndarray:
    """Vector q with H_m(q) the Frobenius-orthogonal projection of B onto the
    Hankel subspace: q[k] is the average of B along anti-diagonal k."""
    B = np.asarray(B)
    if B.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {B.shape}")
    m, n = B.shape
    T = m + n - 1
    idx = np.add.outer(np.arange(m), np.arange(n))
    sums = np.zeros(T, dtype=B.dtype if np.iscomplexobj(B) else float)
    np.add.at(sums, idx.ravel(), B.ravel())
    k = np.arange(1, T + 1)
    counts = np.minimum.reduce([k, np.full_like(k, m), np.full_like(k, n), T - k + 1])
    return sums / counts


def apply_weights(g, w) -> np.ndarray:
    """Entry-wise product w * g; a zero weight freezes the corresponding entry."""
    g = np.asarray(g)
    w = np.asarray(w)
    if g.shape != w.shape:
        raise ShapeError(f"length mismatch: {g.shape} vs {w.shape}")
    return w * g


def frobenius_weights(shape: HankelShape) -> np.ndarray:
    """Weights making the weighted vector norm equal the Frobenius matrix norm:
    with w = anti-diagonal counts, sum(w * |p|^2) = ||H_m(p)||_F^2."""
    return anti_diagonal_counts(shape).astype(float)
