"""Projection to a low-dimensional view and hull-volume diversity scores.

The diversity score of a set of centers is the volume (area in 2-d) of
the convex hull of their principal-component scores. The projection is
fit from the centers themselves: center the points, take the top-d
eigenvectors of the covariance, and fix each eigenvector's sign so its
first non-negligible coordinate is positive. When the ambient dimension
exceeds the number of points the K x K Gram matrix is decomposed
instead of the D x D covariance; both routes give the same directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._hull import hull_area_2d, hull_volume_3d
from .errors import (
    ConfigError,
    DegenerateData,
    DimensionMismatch,
    SlotOutOfRange,
    UnsupportedDimension,
)

# eigenvalues below this fraction of the largest are treated as rank loss
_RANK_RTOL = 1e-12
# coordinates below this magnitude do not decide an eigenvector's sign
_SIGN_ATOL = 1e-12


@dataclass(frozen=True)
class ProjectionBasis:
    """An affine map x -> basis @ (x - mean) onto d orthonormal rows."""

    mean: np.ndarray
    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def target_dim(self) -> int:
        return int(self.basis.shape[0])


def _as_matrix(points) -> np.ndarray:
    vectors = getattr(points, "vectors", points)
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise DimensionMismatch(f"expected a (M, D) point matrix, got shape {mat.shape}")
    return mat


def _as_vector(candidate) -> np.ndarray:
    values = getattr(candidate, "values", candidate)
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {vec.shape}")
    return vec


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    # deterministic orientation: first coordinate of meaningful magnitude
    # is made positive, so repeated fits agree bit-for-bit
    for row in basis:
        for value in row:
            if abs(value) > _SIGN_ATOL:
                if value < 0.0:
                    row *= -1.0
                break
    return basis


def _complete_rows(rows: list[np.ndarray], dim: int, want: int) -> list[np.ndarray]:
    # pad a rank-deficient basis with canonical directions, Gram-Schmidt
    # orthogonalized against what is already there
    axis = 0
    while len(rows) < want and axis < dim:
        v = np.zeros(dim)
        v[axis] = 1.0
        for r in rows:
            v -= (r @ v) * r
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            rows.append(v / norm)
        axis += 1
    if len(rows) < want:
        raise DegenerateData("cannot complete an orthonormal basis")
    return rows


def fit_projection(points, target_dim: int) -> ProjectionBasis:
    """Fit a top-``target_dim`` principal-component basis to the points.

    Args:
        points: (M, D) array-like, or anything with a ``.vectors`` array.
        target_dim: number of directions d, 1 <= d <= min(M - 1, D).

    Returns:
        ProjectionBasis with orthonormal rows, deterministically signed.

    Raises:
        ConfigError: target_dim outside [1, min(M - 1, D)].
        DegenerateData: all points identical (rank-0 covariance).
    """
    pts = _as_matrix(points)
    m, dim = pts.shape
    if target_dim < 1 or target_dim > dim or target_dim > m - 1:
        raise ConfigError(
            f"target_dim must be in [1, min(M - 1, D)] = [1, {min(m - 1, dim)}], "
            f"got {target_dim}"
        )
    mean = pts.mean(axis=0)
    centered = pts - mean
    if not centered.any():
        raise DegenerateData("all points identical")

    if dim <= m:
        cov = centered.T @ centered
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        basis = eigvecs[:, order[:target_dim]].T.copy()
    else:
        gram = centered @ centered.T
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        largest = eigvals[order[0]]
        rows: list[np.ndarray] = []
        for j in order[:target_dim]:
            if eigvals[j] > largest * _RANK_RTOL:
                direction = centered.T @ eigvecs[:, j]
                rows.append(direction / np.linalg.norm(direction))
        rows = _complete_rows(rows, dim, target_dim)
        basis = np.vstack(rows)

    return ProjectionBasis(mean=mean, basis=_fix_signs(basis))


def project(basis: ProjectionBasis, x) -> np.ndarray:
    """Map one vector into the fitted low-dimensional view.

    Raises:
        DimensionMismatch: x does not match the basis' ambient dimension.
    """
    vec = _as_vector(x)
    if vec.shape[0] != basis.ambient_dim:
        raise DimensionMismatch(
            f"vector has dimension {vec.shape[0]}, basis expects {basis.ambient_dim}"
        )
    return basis.basis @ (vec - basis.mean)


def project_rows(basis: ProjectionBasis, points) -> np.ndarray:
    """Map a (M, D) matrix of row vectors to (M, d) scores."""
    pts = _as_matrix(points)
    if pts.shape[1] != basis.ambient_dim:
        raise DimensionMismatch(
            f"points have dimension {pts.shape[1]}, basis expects {basis.ambient_dim}"
        )
    return (pts - basis.mean) @ basis.basis.T


def hull_volume(points, dim: int | None = None) -> float:
    """Exact convex hull volume of a 2-d or 3-d point set.

    Area in 2-d, volume in 3-d; affinely degenerate inputs give 0.0.

    Args:
        points: (M, d) array-like of points.
        dim: optional expected d, checked against the data when given.

    Raises:
        UnsupportedDimension: d outside {2, 3}.
        DimensionMismatch: dim given and inconsistent with the points.
    """
    pts = _as_matrix(points)
    d = pts.shape[1]
    if dim is not None and dim != d:
        raise DimensionMismatch(f"points have dimension {d}, expected {dim}")
    if d == 2:
        return float(hull_area_2d(np.ascontiguousarray(pts)))
    if d == 3:
        return float(hull_volume_3d(np.ascontiguousarray(pts)))
    raise UnsupportedDimension(f"exact hulls support d in {{2, 3}}, got d={d}")


def divscore(centers, target_dim: int) -> float:
    """Diversity of a center set: hull volume of its top-d PCA scores.

    Returns 0.0 whenever the score is undefined or degenerate: fewer
    than target_dim + 1 centers, identical centers, or a flat hull.

    Raises:
        UnsupportedDimension: target_dim outside {2, 3}.
    """
    if target_dim not in (2, 3):
        raise UnsupportedDimension(
            f"diversity scores support d in {{2, 3}}, got d={target_dim}"
        )
    pts = _as_matrix(centers)
    if pts.shape[0] < target_dim + 1:
        return 0.0
    if target_dim > pts.shape[1]:
        raise DimensionMismatch(
            f"target_dim {target_dim} exceeds point dimension {pts.shape[1]}"
        )
    try:
        basis = fit_projection(pts, target_dim)
    except DegenerateData:
        return 0.0
    return hull_volume(project_rows(basis, pts))


def divscore_swap(centers, slot: int, candidate, target_dim: int) -> float:
    """Diversity of the center set with one slot replaced by a candidate.

    The projection is refit on the swapped set, so the result equals
    ``divscore`` of that set computed from scratch.

    Raises:
        SlotOutOfRange: slot outside [0, K).
        DimensionMismatch: candidate dimension differs from the centers.
    """
    pts = _as_matrix(centers)
    k = pts.shape[0]
    if not 0 <= slot < k:
        raise SlotOutOfRange(f"slot {slot} outside [0, {k})")
    vec = _as_vector(candidate)
    if vec.shape[0] != pts.shape[1]:
        raise DimensionMismatch(
            f"candidate has dimension {vec.shape[0]}, centers have {pts.shape[1]}"
        )
    swapped = pts.copy()
    swapped[slot] = vec
    return divscore(swapped, target_dim)
