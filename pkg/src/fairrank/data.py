"""Dataset representation, CSV ingestion, standardization, folds, and the
synthetic benchmark generator.

A dataset holds k tasks with a uniform number of observations h per task.
Instances are flat-indexed task-major (instance i of task j sits at j*h + i),
and every rank computation downstream relies on that ordering.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

PARTITION_A = "A"
PARTITION_B = "B"

# feature column 0 is always the 0/1 indicator of partition A
PROTECTED_COL = 0


class DatasetError(ValueError):
    """A dataset file or in-memory dataset violates the expected shape."""


@dataclass(frozen=True)
class TaskDataset:
    """k tasks of h observations each, n features (indicator column included).

    ``features`` has shape (k, h, n) with the partition indicator in column
    ``PROTECTED_COL``; ``targets`` has shape (k, h).  ``protected`` holds the
    flat per-instance partition label ("A"/"B"), and ``label_names`` maps the
    partitions back to the original column values.
    """

    features: np.ndarray
    targets: np.ndarray
    protected: np.ndarray
    label_names: dict[str, str]
    task_ids: tuple[str, ...]

    def __post_init__(self):
        k, h, n = self.features.shape
        if self.targets.shape != (k, h):
            raise DatasetError(
                f"targets shape {self.targets.shape} does not match tasks {(k, h)}"
            )
        if self.protected.shape != (k * h,):
            raise DatasetError("protected labels must be flat with one entry per instance")
        if not np.isfinite(self.features).all() or not np.isfinite(self.targets).all():
            raise DatasetError("non-finite value in features or targets")

    @property
    def k(self) -> int:
        return self.features.shape[0]

    @property
    def h(self) -> int:
        return self.features.shape[1]

    @property
    def n(self) -> int:
        return self.features.shape[2]

    @property
    def n_instances(self) -> int:
        return self.k * self.h

    def flat_index(self, task: int, row: int) -> int:
        return task * self.h + row

    def flat_features(self) -> np.ndarray:
        return self.features.reshape(self.n_instances, self.n)

    def flat_targets(self) -> np.ndarray:
        return self.targets.reshape(self.n_instances)

    def partition_sizes(self) -> tuple[int, int]:
        n_a = int((self.protected == PARTITION_A).sum())
        return n_a, self.n_instances - n_a

    def subset(self, flat_indices: np.ndarray) -> "TaskDataset":
        """Dataset restricted to the given flat indices, per task.

        Every task must keep the same number of rows so the result is again
        rectangular; fold splitting guarantees this.
        """
        flat_indices = np.sort(np.asarray(flat_indices))
        tasks = flat_indices // self.h
        counts = np.bincount(tasks, minlength=self.k)
        if not (counts == counts[0]).all():
            raise DatasetError("subset must keep an equal number of rows per task")
        per_task = int(counts[0])
        feats = self.flat_features()[flat_indices].reshape(self.k, per_task, self.n)
        targs = self.flat_targets()[flat_indices].reshape(self.k, per_task)
        prot = self.protected[flat_indices]
        return TaskDataset(
            features=feats,
            targets=targs,
            protected=prot,
            label_names=dict(self.label_names),
            task_ids=self.task_ids,
        )


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column centering/scaling parameters with constant-column flags.

    Constant columns are mapped to zero instead of dividing by zero; the
    indicator column is excluded (identity transform).  Scaling uses the
    population standard deviation (divide by N).
    """

    feature_mean: np.ndarray
    feature_sd: np.ndarray
    feature_constant: np.ndarray
    target_mean: float
    target_sd: float
    target_constant: bool

    def transform_targets(self, y: np.ndarray) -> np.ndarray:
        if self.target_constant:
            return np.zeros_like(np.asarray(y, dtype=float))
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_sd

    def inverse_targets(self, y: np.ndarray) -> np.ndarray:
        if self.target_constant:
            return np.full_like(np.asarray(y, dtype=float), self.target_mean)
        return np.asarray(y, dtype=float) * self.target_sd + self.target_mean

    def transform_features(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = (x - self.feature_mean) / self.feature_sd
        if self.feature_constant.any():
            out[..., self.feature_constant] = 0.0
        return out

    def inverse_features(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = x * self.feature_sd + self.feature_mean
        if self.feature_constant.any():
            out[..., self.feature_constant] = self.feature_mean[self.feature_constant]
        return out


@dataclass
class SyntheticSpec:
    """Parameters of the two-Gaussian synthetic benchmark.

    Targets of partition A are shifted by ``mean_gap`` relative to partition
    B, calibrated so the expected rank AUC of targets vs. partition equals
    ``alpha``: for two normals with common sd, AUC = Phi(gap / (sd * sqrt 2)),
    hence gap = sqrt(2) * sd * Phi^-1(alpha).
    """

    alpha: float
    k: int = 40
    h: int = 25
    n: int = 5
    sigma: float = 1.0
    seed: int = 0
    mean_gap: float = field(init=False)

    def __post_init__(self):
        if not 0.5 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0.5, 1), got {self.alpha}")
        if self.k < 1 or self.h < 1 or self.n < 2:
            raise ValueError("need k >= 1, h >= 1 and n >= 2 (indicator plus features)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        self.mean_gap = float(np.sqrt(2.0) * self.sigma * NormalDist().inv_cdf(self.alpha))


def generate_synthetic(spec: SyntheticSpec) -> TaskDataset:
    """Draw a biased two-partition dataset according to ``spec``.

    Labels are uniform A/B; targets come from N(gap, sigma) for A and
    N(0, sigma) for B.  Explanatory features are noisy copies of the target
    (unit noise) so the regression problem is informative; the indicator
    column is 1 for partition A.
    """
    rng = np.random.default_rng(spec.seed)
    n_total = spec.k * spec.h
    is_a = rng.integers(0, 2, size=n_total).astype(bool)
    means = np.where(is_a, spec.mean_gap, 0.0)
    targets = rng.normal(means, spec.sigma)
    n_explanatory = spec.n - 1
    noise = rng.normal(0.0, 1.0, size=(n_total, n_explanatory))
    features = np.empty((n_total, spec.n))
    features[:, PROTECTED_COL] = is_a.astype(float)
    features[:, 1:] = targets[:, None] + noise
    protected = np.where(is_a, PARTITION_A, PARTITION_B)
    return TaskDataset(
        features=features.reshape(spec.k, spec.h, spec.n),
        targets=targets.reshape(spec.k, spec.h),
        protected=protected,
        label_names={PARTITION_A: "A", PARTITION_B: "B"},
        task_ids=tuple(str(j) for j in range(spec.k)),
    )


def load_csv(
    path,
    task_col: str = "task_id",
    protected_col: str = "protected",
    target_col: str = "target",
    partition_a: str | None = None,
) -> TaskDataset:
    """Read a dataset CSV (header row required).

    Columns: task id, protected label (exactly two distinct values), target,
    and every remaining column is a numeric feature.  The lexicographically
    smaller protected value maps to partition A unless ``partition_a`` names
    the value explicitly.  Tasks must all have the same number of rows.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DatasetError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc

    for col in (task_col, protected_col, target_col):
        if col not in header:
            raise DatasetError(f"{path}: missing required column {col!r}")
    t_idx = header.index(task_col)
    p_idx = header.index(protected_col)
    y_idx = header.index(target_col)
    feat_cols = [
        (i, name)
        for i, name in enumerate(header)
        if i not in (t_idx, p_idx, y_idx)
    ]
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    def parse(row_no: int, col_name: str, raw: str) -> float:
        try:
            return float(raw)
        except ValueError:
            raise DatasetError(
                f"{path}: row {row_no}, column {col_name!r}: "
                f"could not parse {raw!r} as a number"
            ) from None

    labels = sorted({row[p_idx] for row in rows})
    if len(labels) != 2:
        raise DatasetError(
            f"{path}: protected column not binary: found {len(labels)} distinct values"
        )
    if partition_a is None:
        a_value, b_value = labels
    else:
        if partition_a not in labels:
            raise DatasetError(
                f"{path}: partition override {partition_a!r} not among protected values {labels}"
            )
        a_value = partition_a
        b_value = labels[0] if labels[1] == partition_a else labels[1]

    by_task: dict[str, list[tuple[float, float, bool]]] = {}
    task_order: list[str] = []
    for row_no, row in enumerate(rows, start=2):  # header is line 1
        if len(row) != len(header):
            raise DatasetError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
        tid = row[t_idx]
        if tid not in by_task:
            by_task[tid] = []
            task_order.append(tid)
        y = parse(row_no, target_col, row[y_idx])
        feats = [parse(row_no, name, row[i]) for i, name in feat_cols]
        by_task[tid].append((y, feats, row[p_idx] == a_value))

    sizes = {tid: len(entries) for tid, entries in by_task.items()}
    h = sizes[task_order[0]]
    for tid, size in sizes.items():
        if size != h:
            raise DatasetError(f"{path}: task {tid!r} has {size} rows; expected {h}")

    k = len(task_order)
    n = 1 + len(feat_cols)
    features = np.empty((k, h, n))
    targets = np.empty((k, h))
    protected = np.empty(k * h, dtype="<U1")
    for j, tid in enumerate(task_order):
        for i, (y, feats, in_a) in enumerate(by_task[tid]):
            features[j, i, PROTECTED_COL] = 1.0 if in_a else 0.0
            features[j, i, 1:] = feats
            targets[j, i] = y
            protected[j * h + i] = PARTITION_A if in_a else PARTITION_B
    return TaskDataset(
        features=features,
        targets=targets,
        protected=protected,
        label_names={PARTITION_A: a_value, PARTITION_B: b_value},
        task_ids=tuple(task_order),
    )


def write_csv(data: TaskDataset, path) -> None:
    """Write a dataset in the ingestion format (feature names f1..f{n-1})."""
    n_explanatory = data.n - 1
    header = ["task_id", "protected", "target"] + [f"f{i+1}" for i in range(n_explanatory)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(data.k):
            for i in range(data.h):
                flat = data.flat_index(j, i)
                label = data.label_names[str(data.protected[flat])]
                row = [data.task_ids[j], label, repr(float(data.targets[j, i]))]
                row += [repr(float(v)) for v in data.features[j, i, 1:]]
                writer.writerow(row)


def standardize(data: TaskDataset) -> tuple[TaskDataset, StandardizationParams]:
    """Center and scale features and targets to zero mean, unit variance.

    Statistics are pooled over all tasks; the indicator column is left
    untouched; constant columns map to zero and are flagged.
    """
    flat = data.flat_features()
    mean = flat.mean(axis=0)
    sd = flat.std(axis=0)  # population convention
    constant = sd <= 1e-12 * (np.abs(mean) + 1.0)
    # indicator column: identity transform, not flagged
    mean[PROTECTED_COL] = 0.0
    sd[PROTECTED_COL] = 1.0
    constant[PROTECTED_COL] = False
    sd_safe = np.where(constant, 1.0, sd)

    y_flat = data.flat_targets()
    y_mean = float(y_flat.mean())
    y_sd = float(y_flat.std())
    y_constant = bool(y_sd <= 1e-12 * (abs(y_mean) + 1.0))

    params = StandardizationParams(
        feature_mean=mean,
        feature_sd=sd_safe,
        feature_constant=constant,
        target_mean=y_mean,
        target_sd=y_sd if not y_constant else 1.0,
        target_constant=y_constant,
    )
    feats = (data.features - mean) / sd_safe
    if constant.any():
        feats[..., constant] = 0.0
    targs = params.transform_targets(data.targets)
    out = TaskDataset(
        features=feats,
        targets=targs,
        protected=data.protected,
        label_names=dict(data.label_names),
        task_ids=data.task_ids,
    )
    return out, params


def split_folds(
    data: TaskDataset, folds: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-task cross-validation splits as (train, validation) flat indices.

    Each task's rows are shuffled and dealt into ``folds`` chunks whose sizes
    differ by at most one; validation sets partition every task exactly once.
    A fold whose training side lacks one of the partitions is an error.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if folds > data.h:
        raise ValueError(f"folds={folds} exceeds observations per task h={data.h}")
    rng = np.random.default_rng(seed)
    val_chunks: list[list[np.ndarray]] = [[] for _ in range(folds)]
    for j in range(data.k):
        perm = rng.permutation(data.h) + j * data.h
        for f, chunk in enumerate(np.array_split(perm, folds)):
            val_chunks[f].append(chunk)

    all_idx = np.arange(data.n_instances)
    out = []
    for f in range(folds):
        val = np.sort(np.concatenate(val_chunks[f]))
        mask = np.ones(data.n_instances, dtype=bool)
        mask[val] = False
        train = all_idx[mask]
        train_labels = set(data.protected[train])
        for label in (PARTITION_A, PARTITION_B):
            if label not in train_labels:
                raise DatasetError(
                    f"fold {f}: training split lacks partition {label!r}"
                )
        out.append((train, val))
    return out
