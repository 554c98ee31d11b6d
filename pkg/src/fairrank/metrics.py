"""Bias and accuracy metrics over a binary partition.

The rank metrics (AUC, impact rank ratio) accept an optional demoted index
set so they can audit projected predictions under the same convention the
projection uses: demoted instances count below every kept instance, ordered
among themselves by flat index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import PARTITION_A, PARTITION_B
from .projection import demotion_rank

_PAIR_BLOCK = 4_000_000


@dataclass(frozen=True)
class MetricsReport:
    auc: float
    md: float
    br: float
    irr: float
    rmse: float
    n_a: int
    n_b: int
    label_a: str = "A"
    label_b: str = "B"

    def as_dict(self) -> dict:
        return {
            "auc": self.auc,
            "md": self.md,
            "br": self.br,
            "irr": self.irr,
            "rmse": self.rmse,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "label_a": self.label_a,
            "label_b": self.label_b,
        }


def _split(values: np.ndarray, protected: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    protected = np.asarray(protected)
    if values.shape[0] != protected.shape[0]:
        raise ValueError(
            f"length mismatch: {values.shape[0]} values vs {protected.shape[0]} labels"
        )
    a = values[protected == PARTITION_A]
    b = values[protected == PARTITION_B]
    if a.size == 0 or b.size == 0:
        raise ValueError("both partitions must be nonempty")
    return a, b


def auc(
    values: np.ndarray,
    protected: np.ndarray,
    demoted: np.ndarray | None = None,
) -> float:
    """Probability that a partition-A value outranks a partition-B value.

    Computed as the normalized pairwise win count, ties counting one half.
    With ``demoted`` given, demoted instances lose to every kept instance
    and compare among themselves by flat index (no ties).
    """
    values = np.asarray(values, dtype=float)
    protected = np.asarray(protected)
    if demoted is None:
        a, b = _split(values, protected)
        return _pairwise_auc(a, b)

    if values.shape[0] != protected.shape[0]:
        raise ValueError("length mismatch between values and labels")
    n = values.shape[0]
    demoted_mask = np.zeros(n, dtype=bool)
    demoted_mask[np.asarray(demoted, dtype=int)] = True
    is_a = protected == PARTITION_A
    is_b = protected == PARTITION_B
    n_a = int(is_a.sum())
    n_b = int(is_b.sum())
    if n_a == 0 or n_b == 0:
        raise ValueError("both partitions must be nonempty")

    wins = _pairwise_wins(values[is_a & ~demoted_mask], values[is_b & ~demoted_mask])
    # kept A beats every demoted B
    wins += float(int((is_a & ~demoted_mask).sum()) * int((is_b & demoted_mask).sum()))
    # demoted vs demoted: lower flat index ranks lower
    dem_a = np.flatnonzero(is_a & demoted_mask)
    dem_b = np.flatnonzero(is_b & demoted_mask)
    if dem_a.size and dem_b.size:
        wins += float((dem_a[:, None] > dem_b[None, :]).sum())
    return wins / (n_a * n_b)


def _pairwise_wins(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0 or b.size == 0:
        return 0.0
    total = 0.0
    block = max(1, _PAIR_BLOCK // max(1, b.size))
    for start in range(0, a.size, block):
        chunk = a[start : start + block, None]
        total += float((chunk > b).sum()) + 0.5 * float((chunk == b).sum())
    return total


def _pairwise_auc(a: np.ndarray, b: np.ndarray) -> float:
    return _pairwise_wins(a, b) / (a.size * b.size)


def mean_difference(values: np.ndarray, protected: np.ndarray) -> float:
    """Difference of partition means, A minus B; zero means no gap."""
    a, b = _split(values, protected)
    return float(a.mean() - b.mean())


def balanced_residuals(
    y: np.ndarray, y_hat: np.ndarray, protected: np.ndarray
) -> float:
    """Difference of mean residuals (y - y_hat), A minus B.

    Positive values indicate underprediction concentrated on partition A.
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.shape} targets vs {y_hat.shape} predictions")
    return mean_difference(y - y_hat, protected)


def impact_rank_ratio(
    values: np.ndarray,
    protected: np.ndarray,
    demoted: np.ndarray | None = None,
) -> float:
    """Ratio of mean partition-A rank to mean partition-B rank.

    1.0 means the partitions hold equal mean ranks; values below 0.8 are
    conventionally flagged as discriminatory.
    """
    values = np.asarray(values, dtype=float)
    protected = np.asarray(protected)
    _split(values, protected)  # validates shapes and nonemptiness
    dem = np.zeros(0, dtype=int) if demoted is None else np.asarray(demoted, dtype=int)
    rv, r_a = demotion_rank(values, dem, protected)
    is_a = protected == PARTITION_A
    n_a = int(is_a.sum())
    n_b = values.shape[0] - n_a
    r_b = float(rv.ranks.sum()) - r_a
    return (r_a / n_a) / (r_b / n_b)


def rmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.shape} targets vs {y_hat.shape} predictions")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def irr_flagged(ratio: float, threshold: float = 0.8) -> bool:
    """Disparate-impact flag: mean-rank ratio below the 80% threshold."""
    return ratio < threshold


def compute_report(
    y: np.ndarray,
    y_hat: np.ndarray,
    protected: np.ndarray,
    demoted: np.ndarray | None = None,
    label_names: dict[str, str] | None = None,
) -> MetricsReport:
    """All metrics of a prediction vector against the true targets.

    MD, BR and RMSE read the numeric values as given (callers pass raw-unit
    predictions); AUC and IRR are rank metrics and honor ``demoted``.
    """
    protected = np.asarray(protected)
    n_a = int((protected == PARTITION_A).sum())
    n_b = int((protected == PARTITION_B).sum())
    names = label_names or {}
    return MetricsReport(
        auc=auc(y_hat, protected, demoted=demoted),
        md=mean_difference(y_hat, protected),
        br=balanced_residuals(y, y_hat, protected),
        irr=impact_rank_ratio(y_hat, protected, demoted=demoted),
        rmse=rmse(y, y_hat),
        n_a=n_a,
        n_b=n_b,
        label_a=names.get(PARTITION_A, "A"),
        label_b=names.get(PARTITION_B, "B"),
    )
