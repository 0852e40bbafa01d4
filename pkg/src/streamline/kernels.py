"""Similarity kernel construction between embedding collections.

Flat embeddings are 1-D float vectors; object-set embeddings are 2-D arrays
holding one normalized feature vector per detected object in an image. All
kernels produced here are nonnegative with entries in [0, 1], which the set
functions downstream rely on for monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class KernelError(ValueError):
    """Raised for malformed kernel inputs (shape/dim mismatch, zero vectors)."""


def normalize(v: np.ndarray) -> np.ndarray:
    """L2-normalize a single vector. Idempotent; zero vectors are rejected."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise KernelError(f"expected a 1-D vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise KernelError("cannot normalize an all-zero vector")
    return v / norm


def normalize_rows(X: np.ndarray) -> np.ndarray:
    """L2-normalize each row of a 2-D array. Rejects any all-zero row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise KernelError(f"expected a 2-D array, got shape {X.shape}")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise KernelError(f"cannot normalize all-zero row {bad}")
    return X / norms[:, None]


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise KernelError(
            f"embedding dims differ: {a.shape[-1]} vs {b.shape[-1]}"
        )


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity clamped to [0, 1].

    Negative cosines map to 0 so facility-location style set functions stay
    monotone on the resulting kernels.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise KernelError("cosine similarity is undefined for zero vectors")
    score = float(np.dot(a, b) / (na * nb))
    return min(max(score, 0.0), 1.0)


def rbf_similarity(a: np.ndarray, b: np.ndarray, bandwidth: float) -> float:
    """Gaussian similarity exp(-||a-b||^2 / (2*bandwidth^2)), in (0, 1]."""
    if bandwidth <= 0.0:
        raise KernelError(f"bandwidth must be positive, got {bandwidth}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    sq_dist = float(np.sum((a - b) ** 2))
    return float(np.exp(-sq_dist / (2.0 * bandwidth**2)))


def object_set_similarity(x1: np.ndarray, x2: np.ndarray) -> float:
    """Image-to-image similarity from two sets of per-object embeddings.

    Each pairwise dot product is clamped to [0, 1], then the best match for
    every object is averaged in both directions and the two coverage averages
    are averaged again. Identical sets score exactly 1. Inputs are
    row-normalized first (idempotent for already-normalized features).

    Args:
        x1: (n1, d) array, one embedding per object; n1 >= 1.
        x2: (n2, d) array.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_2d(np.asarray(x2, dtype=np.float64))
    if x1.shape[0] == 0 or x2.shape[0] == 0:
        raise KernelError("object sets must contain at least one object")
    _check_dims(x1, x2)
    dots = np.clip(normalize_rows(x1) @ normalize_rows(x2).T, 0.0, 1.0)
    cover_1 = dots.max(axis=1).mean()  # x1's objects covered by x2
    cover_2 = dots.max(axis=0).mean()  # x2's objects covered by x1
    return float(0.5 * (cover_1 + cover_2))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Rectangular nonnegative similarity kernel with stable item ids."""

    values: np.ndarray
    row_ids: tuple = field(default=())
    col_ids: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise KernelError(f"kernel must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise KernelError("kernel contains non-finite entries")
        if np.any(values < 0.0):
            raise KernelError("kernel contains negative entries")
        object.__setattr__(self, "values", values)
        row_ids = self.row_ids or tuple(range(values.shape[0]))
        col_ids = self.col_ids or tuple(range(values.shape[1]))
        if len(row_ids) != values.shape[0] or len(col_ids) != values.shape[1]:
            raise KernelError("id lists do not match kernel shape")
        object.__setattr__(self, "row_ids", tuple(row_ids))
        object.__setattr__(self, "col_ids", tuple(col_ids))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def _as_item_list(items) -> list:
    if isinstance(items, np.ndarray):
        return [items[i] for i in range(items.shape[0])]
    return list(items)


def _is_object_collection(items) -> bool:
    arrs = [np.asarray(x) for x in items]
    dims = {a.shape[-1] for a in arrs}
    if len(dims) > 1:
        raise KernelError(f"embeddings in one collection must share dim, got {sorted(dims)}")
    if all(a.ndim == 1 for a in arrs):
        return False
    if all(a.ndim == 2 for a in arrs):
        return True
    raise KernelError("collection mixes flat embeddings and object sets")


def build_kernel(
    rows,
    cols,
    metric: str | None = None,
    bandwidth: float = 1.0,
    row_ids=None,
    col_ids=None,
) -> SimilarityMatrix:
    """Build the pairwise similarity kernel between two collections.

    Args:
        rows: collection of flat embeddings (or a 2-D array), or a list of
            object-set arrays when metric == "object_set".
        cols: same kind as rows.
        metric: "cosine", "rbf", or "object_set"; None picks cosine for flat
            embeddings and object_set for object collections.
        bandwidth: RBF bandwidth (ignored otherwise).
        row_ids/col_ids: optional stable item identifiers.

    Entries are metric(rows[i], cols[j]) computed vectorized but equal to the
    scalar ops entrywise.
    """
    if metric not in ("cosine", "rbf", "object_set", None):
        raise KernelError(f"unknown metric {metric!r}")
    rows = _as_item_list(rows)
    cols = _as_item_list(cols)
    if len(rows) == 0 or len(cols) == 0:
        raise KernelError("kernel collections must be nonempty")

    rows_are_objects = _is_object_collection(rows)
    cols_are_objects = _is_object_collection(cols)
    if metric is None:
        metric = "object_set" if rows_are_objects else "cosine"
    if rows_are_objects != cols_are_objects:
        raise KernelError("rows and cols mix flat embeddings and object sets")
    if rows_are_objects and metric != "object_set":
        raise KernelError(f"object-set collections require the object_set metric, not {metric!r}")
    if not rows_are_objects and metric == "object_set":
        raise KernelError("object_set metric requires object-set collections")

    if metric == "object_set":
        values = np.empty((len(rows), len(cols)))
        for i, x1 in enumerate(rows):
            for j, x2 in enumerate(cols):
                values[i, j] = object_set_similarity(x1, x2)
    else:
        R = np.asarray(rows, dtype=np.float64)
        C = np.asarray(cols, dtype=np.float64)
        _check_dims(R, C)
        if metric == "cosine":
            values = np.clip(normalize_rows(R) @ normalize_rows(C).T, 0.0, 1.0)
        else:
            if bandwidth <= 0.0:
                raise KernelError(f"bandwidth must be positive, got {bandwidth}")
            sq = (
                np.sum(R * R, axis=1)[:, None]
                + np.sum(C * C, axis=1)[None, :]
                - 2.0 * (R @ C.T)
            )
            values = np.exp(-np.maximum(sq, 0.0) / (2.0 * bandwidth**2))

    return SimilarityMatrix(values, tuple(row_ids or ()), tuple(col_ids or ()))
