"""Fixed-budget comparison selectors.

All selectors take the episode buffer and a budget and return item ids; none
of them touch the accumulated-budget machinery, so per round they spend at
most the base budget. Uncertainty scoring accepts either one probability
vector per item (classification) or a list of per-box probability vectors
per item (detection), where the item score is the mean over boxes.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .core import SlicedLabeledPool, UnlabeledBuffer
from .kernels import build_kernel
from .maximize import MaximizerConfig, maximize, partitioned_maximize
from .setfunctions import FLQMI, FacilityLocation

UNCERTAINTY_MODES = ("entropy", "least_conf", "margin")


def random_select(buffer: UnlabeledBuffer, b: int, seed) -> list[int]:
    """Uniform sample without replacement; deterministic for a given seed."""
    b = min(int(b), len(buffer))
    if b <= 0:
        return []
    rng = np.random.default_rng(seed)
    picked = rng.choice(buffer.ids, size=b, replace=False)
    return [int(i) for i in picked]


def _check_simplex(p: np.ndarray) -> None:
    if np.any(p < 0.0):
        raise ValueError("class probabilities must be nonnegative")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > 1e-6):
        raise ValueError("class probabilities must sum to 1")


def _vector_scores(P: np.ndarray, mode: str) -> np.ndarray:
    """Per-row uncertainty of an (n, C) array of simplex rows."""
    _check_simplex(P)
    if mode == "entropy":
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0.0, P * np.log(P), 0.0)
        return -terms.sum(axis=-1)
    top = np.sort(P, axis=-1)[:, ::-1]
    if mode == "least_conf":
        return 1.0 - top[:, 0]
    if mode == "margin":
        second = top[:, 1] if P.shape[-1] > 1 else np.zeros(len(P))
        return top[:, 0] - second
    raise ValueError(f"unknown uncertainty mode {mode!r}")


def uncertainty_scores(preds, mode: str) -> np.ndarray:
    """Uncertainty score per item.

    Args:
        preds: (n, C) array for classification, or a list whose i-th entry is
            an (n_boxes_i, C) array for detection-style items.
        mode: "entropy", "least_conf", or "margin".
    """
    if mode not in UNCERTAINTY_MODES:
        raise ValueError(f"unknown uncertainty mode {mode!r}")
    if isinstance(preds, np.ndarray) and preds.ndim == 2:
        return _vector_scores(np.asarray(preds, dtype=np.float64), mode)
    scores = np.empty(len(preds))
    for i, boxes in enumerate(preds):
        boxes = np.atleast_2d(np.asarray(boxes, dtype=np.float64))
        if boxes.shape[0] == 0:
            raise ValueError(f"item {i} has no box predictions to score")
        scores[i] = _vector_scores(boxes, mode).mean()
    return scores


def uncertainty_select(buffer: UnlabeledBuffer, preds, mode: str, b: int) -> list[int]:
    """Top-b most-uncertain items.

    Entropy and least-confidence rank descending by score; margin ranks
    ascending (a small gap between the top two classes means uncertain).
    Ties keep buffer order.
    """
    b = min(int(b), len(buffer))
    if b <= 0:
        return []
    scores = uncertainty_scores(preds, mode)
    keys = scores if mode == "margin" else -scores
    order = np.argsort(keys, kind="stable")
    return [int(buffer.ids[i]) for i in order[:b]]


def submodular_fl_select(
    buffer: UnlabeledBuffer,
    b: int,
    maximizer_cfg: MaximizerConfig,
    featurizer=None,
    metric: str = "cosine",
    bandwidth: float = 1.0,
) -> list[int]:
    """Coverage-only selection: maximize facility location over the buffer."""
    b = min(int(b), len(buffer))
    if b <= 0:
        return []
    feats = buffer.X if featurizer is None else featurizer(buffer.X)
    S = build_kernel(feats, feats, metric=metric, bandwidth=bandwidth).values
    p = min(maximizer_cfg.partitions, len(buffer))
    if p > 1:
        trace = partitioned_maximize(
            lambda ids: FacilityLocation(S[np.ix_(ids, ids)]),
            len(buffer),
            replace(maximizer_cfg, budget=b, partitions=p),
        )
    else:
        trace = maximize(FacilityLocation(S), replace(maximizer_cfg, budget=b, partitions=1))
    return [int(buffer.ids[i]) for i in trace.chosen]


def similar_select(
    buffer: UnlabeledBuffer,
    pool: SlicedLabeledPool,
    t: int,
    b: int,
    maximizer_cfg: MaximizerConfig,
    featurizer=None,
    metric: str = "cosine",
    bandwidth: float = 1.0,
) -> list[int]:
    """Query-targeted selection: maximize mutual information with slice t.

    Deliberately uses the fixed budget b regardless of slice balance, which
    is the behavior the slice-aware budgeting is designed to improve on.
    """
    if len(pool.slices[t]) == 0:
        raise ValueError(f"query slice {t} is empty")
    b = min(int(b), len(buffer))
    if b <= 0:
        return []
    feats_u = buffer.X if featurizer is None else featurizer(buffer.X)
    feats_p = pool.slices[t].X if featurizer is None else featurizer(pool.slices[t].X)
    S_up = build_kernel(feats_u, feats_p, metric=metric, bandwidth=bandwidth).values
    p = min(maximizer_cfg.partitions, len(buffer))
    if p > 1:
        trace = partitioned_maximize(
            lambda ids: FLQMI(S_up[ids, :]),
            len(buffer),
            replace(maximizer_cfg, budget=b, partitions=p),
        )
    else:
        trace = maximize(FLQMI(S_up), replace(maximizer_cfg, budget=b, partitions=1))
    return [int(buffer.ids[i]) for i in trace.chosen]


def badge_gradient_embeddings(probs: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Hypothesized last-layer loss gradients, one flattened vector per item.

    The gradient of cross-entropy at the predicted label is the outer product
    of (p - onehot(argmax p)) with the penultimate features, so the block for
    the predicted class carries a nonpositive factor and all other blocks a
    nonnegative one.
    """
    probs = np.asarray(probs, dtype=np.float64)
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    _check_simplex(probs)
    if probs.shape[0] != features.shape[0]:
        raise ValueError("need one probability vector per feature row")
    coef = probs.copy()
    coef[np.arange(len(coef)), probs.argmax(axis=1)] -= 1.0
    return (coef[:, :, None] * features[:, None, :]).reshape(len(coef), -1)


def badge_select(
    buffer: UnlabeledBuffer,
    probs: np.ndarray,
    features: np.ndarray,
    b: int,
    seed,
) -> list[int]:
    """k-means++ seeding over gradient embeddings.

    First pick is uniform; each later pick is drawn with probability
    proportional to the squared distance to the nearest already-picked
    embedding. If every remaining distance is zero (duplicate embeddings),
    falls back to a uniform draw over the unpicked items.
    """
    b = min(int(b), len(buffer))
    if b <= 0:
        return []
    rng = np.random.default_rng(seed)
    emb = badge_gradient_embeddings(probs, features)
    n = len(emb)

    first = int(rng.integers(n))
    chosen = [first]
    min_d2 = np.sum((emb - emb[first]) ** 2, axis=1)
    min_d2[first] = 0.0
    while len(chosen) < b:
        total = float(min_d2.sum())
        if total <= 0.0:
            unpicked = np.setdiff1d(np.arange(n), np.array(chosen, dtype=int))
            nxt = int(rng.choice(unpicked))
        else:
            nxt = int(rng.choice(n, p=min_d2 / total))
        chosen.append(nxt)
        np.minimum(min_d2, np.sum((emb - emb[nxt]) ** 2, axis=1), out=min_d2)
        min_d2[nxt] = 0.0
    return [int(buffer.ids[i]) for i in chosen]
