"""Desk-scale streaming lab: synthetic episodic streams, a logistic learner,
and the evaluation metrics for comparing selection methods.

Slices are Gaussian class mixtures sharing class structure: every slice uses
the same base class directions plus a per-slice twist, so a model trained on
common slices transfers imperfectly to the rare slice until it gets labeled
rare-slice data. Streams are pure functions of their spec (seed included).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    badge_select,
    random_select,
    similar_select,
    submodular_fl_select,
    uncertainty_select,
)
from .core import (
    BudgetState,
    LabeledSlice,
    SlicedLabeledPool,
    StreamlineConfig,
    UnlabeledBuffer,
    infer_rare_flags,
    streamline_round,
)
from .maximize import MaximizerConfig

METHODS = (
    "streamline",
    "streamline_no_scg",
    "streamline_repl_scg",
    "streamline_no_budget",
    "random",
    "entropy",
    "margin",
    "least_conf",
    "submodular",
    "similar",
    "badge",
)


def every_k_schedule(n_rounds: int, n_slices: int, rare_slice: int | None = None, k: int = 3):
    """Rare slice every k-th round; common slices cycle through the rest."""
    if rare_slice is None:
        rare_slice = n_slices - 1
    commons = [s for s in range(n_slices) if s != rare_slice]
    schedule, c = [], 0
    for r in range(1, n_rounds + 1):
        if r % k == 0:
            schedule.append(rare_slice)
        else:
            schedule.append(commons[c % len(commons)])
            c += 1
    return tuple(schedule)


def sequential_schedule(n_rounds: int, n_slices: int):
    """Slices arrive in index order, wrapping around."""
    return tuple(r % n_slices for r in range(n_rounds))


@dataclass(frozen=True)
class StreamSpec:
    """Everything that determines a synthetic stream.

    slice_sep is the exact pairwise distance between slice offsets in units
    of noise_std; class_sep/class_twist control how far apart classes sit and
    how much their directions differ between slices.
    """

    n_slices: int = 4
    n_classes: int = 6
    dim: int = 16
    class_sep: float = 2.4
    class_twist: float = 3.2
    slice_sep: float = 8.0
    noise_std: float = 1.0
    imbalance: int = 5
    common_pool_size: int = 200
    schedule: tuple = ()
    redundancy: int = 1
    episode_size: int = 100
    eval_per_slice: int = 400
    rare_slices: tuple = ()
    rare_by_size: bool = False  # infer pool rarity from initial sizes instead
    seed: int = 0

    def __post_init__(self):
        if len(self.schedule) == 0:
            raise ValueError("schedule must be nonempty")
        if self.redundancy < 1:
            raise ValueError(f"redundancy must be >= 1, got {self.redundancy}")
        if self.imbalance < 1:
            raise ValueError(f"imbalance must be >= 1, got {self.imbalance}")
        if self.episode_size % self.redundancy != 0:
            raise ValueError(
                f"episode_size {self.episode_size} must be divisible by redundancy {self.redundancy}"
            )
        if self.dim < self.n_slices:
            raise ValueError("dim must be >= n_slices to place slice offsets")
        if any(s < 0 or s >= self.n_slices for s in self.schedule):
            raise ValueError("schedule refers to an unknown slice")
        rare = self.rare_slices or (self.n_slices - 1,)
        if any(s < 0 or s >= self.n_slices for s in rare):
            raise ValueError("rare_slices refers to an unknown slice")
        object.__setattr__(self, "rare_slices", tuple(rare))

    @property
    def n_rounds(self) -> int:
        return len(self.schedule)


@dataclass
class EvalSet:
    X: np.ndarray
    y: np.ndarray
    slice_ids: np.ndarray


class _StreamSampler:
    """Shared geometry + id counter for one generated stream."""

    def __init__(self, spec: StreamSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self.next_id = 0
        scale = spec.noise_std
        # Slice offsets on orthogonal axes: pairwise distance is exactly
        # slice_sep * noise_std.
        offsets = np.zeros((spec.n_slices, spec.dim))
        for s in range(spec.n_slices):
            offsets[s, s] = spec.slice_sep * scale / np.sqrt(2.0)
        base = rng.normal(size=(spec.n_classes, spec.dim))
        base *= (spec.class_sep * scale) / np.linalg.norm(base, axis=1, keepdims=True)
        twist = rng.normal(size=(spec.n_slices, spec.n_classes, spec.dim))
        twist *= (spec.class_twist * scale) / np.linalg.norm(twist, axis=2, keepdims=True)
        self.centroids = offsets[:, None, :] + base[None, :, :] + twist

    def draw(self, slice_id: int, count: int):
        labels = self.rng.integers(0, self.spec.n_classes, size=count)
        X = self.centroids[slice_id, labels] + self.rng.normal(
            0.0, self.spec.noise_std, size=(count, self.spec.dim)
        )
        ids = np.arange(self.next_id, self.next_id + count, dtype=np.int64)
        self.next_id += count
        return ids, labels.astype(np.int64), X


def generate_stream(spec: StreamSpec):
    """Build (initial pool, episode buffers, balanced eval set) from a spec.

    The initial pool holds common_pool_size items per common slice and
    common_pool_size // imbalance per rare slice. Episode buffers hold
    episode_size // redundancy unique draws, each copied redundancy times
    under fresh ids with identical embeddings.
    """
    rng = np.random.default_rng(spec.seed)
    sampler = _StreamSampler(spec, rng)

    rare_size = max(1, spec.common_pool_size // spec.imbalance)
    slices, rare_flags = [], []
    for s in range(spec.n_slices):
        is_rare = s in spec.rare_slices
        ids, labels, X = sampler.draw(s, rare_size if is_rare else spec.common_pool_size)
        slices.append(LabeledSlice(ids, labels, X))
        rare_flags.append(is_rare)
    if spec.rare_by_size:
        rare_flags = infer_rare_flags([len(sl) for sl in slices])
    pool = SlicedLabeledPool(slices, rare_flags)

    buffers = []
    unique = spec.episode_size // spec.redundancy
    for s in spec.schedule:
        ids, labels, X = sampler.draw(s, unique)
        if spec.redundancy > 1:
            copies = [
                np.arange(sampler.next_id + k * unique, sampler.next_id + (k + 1) * unique)
                for k in range(spec.redundancy - 1)
            ]
            sampler.next_id += (spec.redundancy - 1) * unique
            ids = np.concatenate([ids] + copies)
            labels = np.tile(labels, spec.redundancy)
            X = np.tile(X, (spec.redundancy, 1))
        buffers.append(UnlabeledBuffer(ids=ids, X=X, true_slice=s, true_labels=labels))

    eval_X, eval_y, eval_slices = [], [], []
    for s in range(spec.n_slices):
        _, labels, X = sampler.draw(s, spec.eval_per_slice)
        eval_X.append(X)
        eval_y.append(labels)
        eval_slices.append(np.full(spec.eval_per_slice, s, dtype=np.int64))
    eval_set = EvalSet(np.vstack(eval_X), np.concatenate(eval_y), np.concatenate(eval_slices))
    return pool, buffers, eval_set


@dataclass(frozen=True)
class LearnerConfig:
    step_size: float = 1.0
    epochs: int = 200
    l2: float = 1e-3
    seed: int = 0


@dataclass
class Learner:
    """Multinomial logistic model over raw embeddings."""

    W: np.ndarray
    b: np.ndarray
    loss_history: np.ndarray = field(default_factory=lambda: np.empty(0))

    def logits(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(X) @ self.W.T + self.b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = self.logits(X)
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.logits(X).argmax(axis=1)


def logistic_loss_and_grad(W, b, X, y, l2: float = 0.0):
    """Mean cross-entropy (+ L2 on W) and its analytic gradients."""
    n = len(y)
    model = Learner(W=W, b=b)
    P = model.predict_proba(X)
    eps = 1e-12
    loss = -np.log(P[np.arange(n), y] + eps).mean() + 0.5 * l2 * float((W * W).sum())
    R = P.copy()
    R[np.arange(n), y] -= 1.0
    grad_W = R.T @ X / n + l2 * W
    grad_b = R.mean(axis=0)
    return float(loss), grad_W, grad_b


def fit_logistic(X, y, cfg: LearnerConfig, n_classes: int | None = None) -> Learner:
    """Full-batch gradient descent with a scale-adaptive, backtracking step.

    The base step is divided by a curvature estimate from the feature norms,
    then halved whenever a step would increase the loss, so the recorded loss
    history is nonincreasing.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    C = int(n_classes if n_classes is not None else y.max() + 1)
    W = np.zeros((C, X.shape[1]))
    bias = np.zeros(C)
    curvature = 0.5 * float((X * X).sum(axis=1).mean()) + cfg.l2 + 1.0
    step = cfg.step_size / curvature
    loss, gW, gb = logistic_loss_and_grad(W, bias, X, y, cfg.l2)
    losses = [loss]
    for _ in range(cfg.epochs):
        stepped = False
        while step >= 1e-12:
            W_try = W - step * gW
            b_try = bias - step * gb
            loss_try, gW_try, gb_try = logistic_loss_and_grad(W_try, b_try, X, y, cfg.l2)
            if loss_try <= loss + 1e-12:
                W, bias, loss, gW, gb = W_try, b_try, loss_try, gW_try, gb_try
                stepped = True
                break
            step *= 0.5
        if not stepped:
            break
        losses.append(loss)
    return Learner(W=W, b=bias, loss_history=np.asarray(losses))


def train_learner(pool: SlicedLabeledPool, cfg: LearnerConfig, n_classes: int | None = None) -> Learner:
    """Fit the logistic learner on everything labeled so far."""
    if pool.total_size == 0:
        raise ValueError("cannot train on an empty pool")
    X, y = pool.stacked()
    return fit_logistic(X, y, cfg, n_classes)


def evaluate(learner: Learner, eval_set: EvalSet):
    """(overall accuracy, per-slice accuracy array) on the balanced eval set."""
    pred = learner.predict(eval_set.X)
    correct = pred == eval_set.y
    n_slices = int(eval_set.slice_ids.max()) + 1
    per_slice = np.array(
        [correct[eval_set.slice_ids == s].mean() for s in range(n_slices)]
    )
    return float(correct.mean()), per_slice


def _labels_to_reach(curve, target: float) -> float | None:
    points = sorted((float(l), float(m)) for l, m in curve)
    for k, (labels, metric) in enumerate(points):
        if metric >= target:
            if k == 0:
                return labels
            l0, m0 = points[k - 1]
            return l0 + (target - m0) * (labels - l0) / (metric - m0)
    return None


def labeling_efficiency(curve_method, curve_random, target: float) -> float | None:
    """How many fewer labels the method needs than random for a target metric.

    Both curves are (labels, metric) sequences; the label count to first
    reach the target is linearly interpolated. Returns None (undefined) when
    either curve never attains the target.
    """
    labels_m = _labels_to_reach(curve_method, target)
    labels_r = _labels_to_reach(curve_random, target)
    if labels_m is None or labels_r is None or labels_m <= 0.0:
        return None
    return labels_r / labels_m


@dataclass
class RoundRecord:
    round: int
    labels_total: int
    granted: int
    gamma: float
    identified_slice: int
    true_slice: int
    full_accuracy: float
    rare_accuracy: float
    slice_sizes: tuple
    selected_ids: tuple


@dataclass
class MetricsLog:
    method: str
    seed: int
    records: list

    @property
    def labels_spent(self) -> int:
        return sum(r.granted for r in self.records)

    def curve(self, metric: str = "rare"):
        attr = "rare_accuracy" if metric == "rare" else "full_accuracy"
        return [(r.labels_total, getattr(r, attr)) for r in self.records]

    def final(self, metric: str = "rare") -> float:
        attr = "rare_accuracy" if metric == "rare" else "full_accuracy"
        return getattr(self.records[-1], attr)


@dataclass(frozen=True)
class RunConfig:
    """Selection-side settings shared by every method in a run."""

    budget: int = 50
    rho: float = 0.5
    maximizer: MaximizerConfig = field(default_factory=lambda: MaximizerConfig(budget=0))
    learner: LearnerConfig = field(default_factory=LearnerConfig)


def run_experiment(spec: StreamSpec, method: str, cfg: RunConfig) -> MetricsLog:
    """Play the full stream with one selection method and log every round.

    The slice-aware variants append selections to the slice they identified;
    fixed-budget baselines append to the episode's true slice. The learner is
    retrained from scratch on the grown pool after every round.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")
    pool, buffers, eval_set = generate_stream(spec)
    rng = np.random.default_rng([METHODS.index(method), spec.seed])
    state = BudgetState(B=cfg.budget, rho=cfg.rho)
    learner = train_learner(pool, cfg.learner, spec.n_classes)
    rare = list(spec.rare_slices)
    records = []
    labels_total = 0

    for r, buf in enumerate(buffers):
        oracle_map = {int(i): int(l) for i, l in zip(buf.ids, buf.true_labels)}
        label_oracle = lambda ids: np.array([oracle_map[int(i)] for i in ids], dtype=np.int64)

        if method.startswith("streamline"):
            sl_cfg = StreamlineConfig(
                maximizer=cfg.maximizer,
                fixed_budget=(method == "streamline_no_budget"),
            )
            if method == "streamline_no_scg":
                sl_cfg.selector_fn = lambda pool_, buf_, t_, b_: random_select(buf_, b_, rng)
            elif method == "streamline_repl_scg":
                sl_cfg.selector_fn = lambda pool_, buf_, t_, b_: badge_select(
                    buf_, learner.predict_proba(buf_.X), buf_.X, b_, rng
                )
            report, pool, state = streamline_round(pool, buf, state, sl_cfg, label_oracle)
            identified, granted, gamma = report.identified_slice, report.granted, state.gamma
            selected = report.selected_ids
        else:
            b = min(cfg.budget, len(buf))
            if method == "random":
                selected = random_select(buf, b, rng)
            elif method in ("entropy", "margin", "least_conf"):
                selected = uncertainty_select(buf, learner.predict_proba(buf.X), method, b)
            elif method == "submodular":
                selected = submodular_fl_select(buf, b, cfg.maximizer)
            elif method == "similar":
                selected = similar_select(buf, pool, rare[0], b, cfg.maximizer)
            else:  # badge
                selected = badge_select(buf, learner.predict_proba(buf.X), buf.X, b, rng)
            if selected:
                sel = np.asarray(selected, dtype=np.int64)
                pos = {int(i): k for k, i in enumerate(buf.ids)}
                row_idx = np.array([pos[int(i)] for i in sel], dtype=np.intp)
                pool.add(buf.true_slice, sel, label_oracle(sel), buf.X[row_idx])
            identified, granted, gamma = buf.true_slice, len(selected), 0.0

        labels_total += granted
        learner = train_learner(pool, cfg.learner, spec.n_classes)
        full_acc, per_slice = evaluate(learner, eval_set)
        records.append(
            RoundRecord(
                round=r,
                labels_total=labels_total,
                granted=granted,
                gamma=float(gamma),
                identified_slice=int(identified),
                true_slice=int(buf.true_slice),
                full_accuracy=full_acc,
                rare_accuracy=float(per_slice[rare].mean()),
                slice_sizes=tuple(int(s) for s in pool.sizes),
                selected_ids=tuple(int(i) for i in selected),
            )
        )
    return MetricsLog(method=method, seed=spec.seed, records=records)
