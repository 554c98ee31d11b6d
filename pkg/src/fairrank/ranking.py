"""Rank assignment, partition sum-ranks, the U statistic, and sum-rank bounds.

All ranks are ascending (smallest value gets rank 1) and ties receive the
average of the ranks they span, so the sum of ranks is always N(N+1)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RankVector:
    """Tie-averaged ascending ranks for a value vector.

    ``tie_groups`` lists the index groups (size >= 2) that share a value and
    therefore share an averaged rank.
    """

    ranks: np.ndarray
    tie_groups: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ranks)

    def sum(self) -> float:
        return float(self.ranks.sum())


@dataclass(frozen=True)
class ConstraintSpec:
    """Feasibility band [C, C + kappa] for the partition-A sum rank.

    ``r_a_most`` is the largest sum rank partition A can attain (every A
    instance ranked above every B instance); the band is unreachable when
    ``r_a_most < c``.
    """

    n_a: int
    n_b: int
    epsilon: float
    c: float
    kappa: float
    r_a_most: float

    @property
    def upper(self) -> float:
        return self.c + self.kappa

    def contains(self, r_a: float, atol: float = 1e-9) -> bool:
        return self.c - atol <= r_a <= self.c + self.kappa + atol


def assign_ranks(values: np.ndarray) -> RankVector:
    """Ascending tie-averaged ranks (1-based) of ``values``.

    Raises ValueError naming the offending index if any value is non-finite.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"expected 1-d value vector, got shape {values.shape}")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ValueError(f"non-finite value at index {bad[0]}")

    n = values.size
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    # run boundaries of equal values in sorted order
    new_run = np.ones(n, dtype=bool)
    new_run[1:] = sorted_vals[1:] != sorted_vals[:-1]
    run_ids = np.cumsum(new_run) - 1
    counts = np.bincount(run_ids)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    # average of ranks start+1 .. start+count
    avg_rank = starts + (counts + 1) / 2.0
    ranks = np.empty(n, dtype=float)
    ranks[order] = avg_rank[run_ids]

    tie_groups = [
        np.sort(order[s : s + c]) for s, c in zip(starts, counts) if c > 1
    ]
    return RankVector(ranks=ranks, tie_groups=tie_groups)


def sum_rank_partition(
    ranks: RankVector | np.ndarray,
    protected: np.ndarray,
    which,
) -> float:
    """Sum of ranks over the instances labelled ``which``."""
    rank_arr = ranks.ranks if isinstance(ranks, RankVector) else np.asarray(ranks, dtype=float)
    protected = np.asarray(protected)
    if rank_arr.shape[0] != protected.shape[0]:
        raise ValueError(
            f"length mismatch: {rank_arr.shape[0]} ranks vs {protected.shape[0]} labels"
        )
    mask = protected == which
    if not mask.any():
        raise ValueError(f"no instances labelled {which!r}")
    return float(rank_arr[mask].sum())


def mann_whitney_u(r_a: float, n_a: int) -> float:
    """U statistic from the partition-A sum rank: U = r_A - n_A(n_A+1)/2."""
    return float(r_a) - n_a * (n_a + 1) / 2.0


def auc_from_u(u: float, n_a: int, n_b: int) -> float:
    """AUC equivalent of the U statistic, U / (n_A * n_B)."""
    if n_a < 1 or n_b < 1:
        raise ValueError("both partitions must be nonempty")
    return float(u) / (n_a * n_b)


def constraint_bounds(
    n_a: int,
    n_b: int,
    epsilon: float,
    printed_kappa: bool = False,
) -> ConstraintSpec:
    """Sum-rank band for an AUC within [0.5, 0.5 + epsilon].

    The band width is kappa = epsilon * n_A * n_B, which follows from
    bounding U / (n_A n_B) - 0.5 by epsilon.  ``printed_kappa`` switches to
    the alternative kappa = epsilon * n_A^2 for comparison runs; it is not
    consistent with the AUC bound and is off by default.
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("both partitions must be nonempty")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    c = n_a * (n_a + 1) / 2.0 + n_a * n_b / 2.0
    kappa = epsilon * n_a * n_a if printed_kappa else epsilon * n_a * n_b
    r_a_most = n_a * n_b + n_a * (n_a + 1) / 2.0
    return ConstraintSpec(
        n_a=n_a, n_b=n_b, epsilon=epsilon, c=c, kappa=kappa, r_a_most=r_a_most
    )
