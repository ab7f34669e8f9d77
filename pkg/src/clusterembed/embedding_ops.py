"""Dense matrix primitives shared by every loss and inference routine.

All functions are pure and operate on float64 arrays. Reductions rely on
numpy's deterministic pairwise summation, so identical inputs give bit
identical outputs regardless of thread settings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRowError, InvalidInputError

# Row norms at or below this are treated as degenerate (cannot be normalized).
ZERO_NORM_TOL = 1e-12

# Allowed deviation from unit norm for a batch claiming to be normalized.
UNIT_NORM_TOL = 1e-6


@dataclass
class EmbeddingBatch:
    """m x d matrix of embedded points, one row per example.

    ``normalized`` records whether rows are unit length; constructors check
    the claim so downstream code can trust the flag.
    """

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise InvalidInputError(f"embedding batch must be 2-D, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise InvalidInputError("embedding batch contains non-finite entries")
        if self.normalized:
            norms = np.linalg.norm(self.data, axis=1)
            if not np.all(np.abs(norms - 1.0) <= UNIT_NORM_TOL):
                raise InvalidInputError("normalized flag set but some row norm is not 1")

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def pairwise_distances(batch: EmbeddingBatch) -> np.ndarray:
    """Unsquared Euclidean distance matrix D[i, j] = ||E_i - E_j||.

    Computed from explicit row differences (not the dot-product identity),
    which makes the result exactly symmetric with an exactly zero diagonal.
    """
    return np.sqrt(pairwise_squared_distances(batch))


def pairwise_squared_distances(batch: EmbeddingBatch) -> np.ndarray:
    """Squared Euclidean distance matrix; the triplet loss uses this form."""
    e = batch.data
    diff = e[:, None, :] - e[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def pairwise_similarities(batch: EmbeddingBatch) -> np.ndarray:
    """Dot-product matrix S[i, j] = E_i . E_j."""
    e = batch.data
    return e @ e.T


def l2_normalize_rows(batch: EmbeddingBatch) -> EmbeddingBatch:
    """Scale every row to unit Euclidean norm.

    Raises DegenerateRowError if any row norm is <= 1e-12 rather than
    silently emitting NaN; callers are expected to avoid zero rows.
    """
    norms = np.linalg.norm(batch.data, axis=1)
    if np.any(norms <= ZERO_NORM_TOL):
        bad = int(np.argmax(norms <= ZERO_NORM_TOL))
        raise DegenerateRowError(f"row {bad} has norm {norms[bad]:.3e}, cannot normalize")
    return EmbeddingBatch(batch.data / norms[:, None], normalized=True)


def l2_normalize_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of ``x -> x / ||x||``.

    Returns J^T u with J = (I - u u^T) / ||x||, u = x / ||x||: the radial
    component of ``upstream`` is annihilated, the tangent part is scaled by
    1 / ||x||.
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if norm <= ZERO_NORM_TOL:
        raise DegenerateRowError(f"cannot differentiate normalization at norm {norm:.3e}")
    u = x / norm
    return (upstream - u * float(u @ upstream)) / norm


def l2_normalize_rows_backward(x_rows: np.ndarray, upstream_rows: np.ndarray) -> np.ndarray:
    """Row-batched form of :func:`l2_normalize_backward` for the model backward pass."""
    norms = np.linalg.norm(x_rows, axis=1)
    if np.any(norms <= ZERO_NORM_TOL):
        bad = int(np.argmax(norms <= ZERO_NORM_TOL))
        raise DegenerateRowError(f"row {bad} has norm {norms[bad]:.3e}, cannot differentiate")
    u = x_rows / norms[:, None]
    radial = np.einsum("ij,ij->i", u, upstream_rows)
    return (upstream_rows - u * radial[:, None]) / norms[:, None]
