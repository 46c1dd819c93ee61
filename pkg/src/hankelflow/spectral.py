"""Smallest singular triplet of a matrix, with a simplicity diagnostic.

The default backend is a full dense decomposition: the target matrices are
desk-scale and determinism matters more than speed here.  A truncated
iterative backend is available behind the same contract for larger problems.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, ShapeError

logger = logging.getLogger(__name__)

# |v_i| threshold for picking the component that fixes the phase convention.
_PHASE_PIVOT = 1e-8
# Relative gap below which the smallest singular value is flagged as
# numerically multiple.
GAP_WARN_RTOL = 1e-8


@dataclass
class SingularTriplet:
    """(sigma, u, v) with H v = sigma u and H^H u = sigma v, ||u|| = ||v|| = 1.

    ``gap`` is the distance from sigma to the second-smallest singular value
    (``inf`` for 1-row matrices, which have a single singular value).
    """

    sigma: float
    u: np.ndarray
    v: np.ndarray
    gap: float

    def near_multiple(self, matrix_norm: float) -> bool:
        return self.gap < GAP_WARN_RTOL * matrix_norm


def _fix_phase(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the pair so the first significant component of v is real positive."""
    idx = np.flatnonzero(np.abs(v) > _PHASE_PIVOT)
    pivot = v[idx[0]] if idx.size else v[int(np.argmax(np.abs(v)))]
    mag = abs(pivot)
    if mag == 0.0:
        return u, v
    factor = np.conj(pivot) / mag
    return u * factor, v * factor


def smallest_singular_triplet(
    H,
    method: str = "dense",
    align_to: SingularTriplet | None = None,
) -> SingularTriplet:
    """Smallest singular value of H with its left/right singular vectors.

    The sign/phase convention makes the result a deterministic function of H.
    When ``align_to`` is given (the triplet at the previous accepted step of a
    flow), the pair is additionally sign-flipped so Re<u_prev, u> >= 0, which
    keeps the singular vectors continuous along the iteration.
    """
    H = np.asarray(H)
    if H.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {H.shape}")
    m, n = H.shape
    if m > n:
        raise ShapeError(f"expected m <= n, got {m}x{n}")
    if not np.all(np.isfinite(H)):
        raise ShapeError("matrix contains NaN or Inf")

    if method == "dense":
        try:
            U, s, Vh = np.linalg.svd(H, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            fro = float(np.linalg.norm(H))
            raise NumericalError(
                f"SVD failed on a {m}x{n} matrix (||H||_F = {fro:.3e}): {exc}"
            ) from exc
        sigma = float(s[-1])
        gap = float(s[-2] - s[-1]) if m > 1 else float("inf")
        u = U[:, -1]
        v = Vh[-1].conj()
    elif method == "truncated":
        from scipy.sparse.linalg import svds

        if m < 3:
            return smallest_singular_triplet(H, method="dense", align_to=align_to)
        try:
            U, s, Vh = svds(H.astype(complex if np.iscomplexobj(H) else float), k=2, which="SM")
        except Exception as exc:  # ARPACK failures surface as various types
            fro = float(np.linalg.norm(H))
            raise NumericalError(
                f"truncated SVD failed on a {m}x{n} matrix (||H||_F = {fro:.3e}): {exc}"
            ) from exc
        order = np.argsort(s)
        sigma = float(s[order[0]])
        gap = float(s[order[1]] - s[order[0]])
        u = U[:, order[0]]
        v = Vh[order[0]].conj()
    else:
        raise ValueError(f"unknown method {method!r}; expected 'dense' or 'truncated'")

    u, v = _fix_phase(u, v)
    if align_to is not None and np.real(np.vdot(align_to.u, u)) < 0:
        u = -u
        v = -v

    triplet = SingularTriplet(sigma=sigma, u=u, v=v, gap=gap)
    fro = float(np.linalg.norm(H))
    if triplet.near_multiple(fro):
        logger.warning(
            "smallest singular value is numerically multiple "
            "(sigma=%.3e, gap=%.3e, ||H||_F=%.3e); continuing with the computed triplet",
            sigma,
            gap,
            fro,
        )
    return triplet
