"""Projection of a prediction vector onto the sum-rank band.

The band constrains the partition-A sum rank of the predictions to
[C, C + kappa].  Projection works by *demoting* a set of instances: a demoted
instance is forced below every kept instance in the ranking (demoted entries
are ordered among themselves by flat index), and its entry in the projected
vector is written as 0.  Demotion rather than literal re-valuation keeps the
operation well defined for standardized (possibly negative) predictions.

Two heuristics adjust the sum rank: one demotes partition-A instances to
shrink it, one demotes partition-B instances to grow it.  An exhaustive
oracle over all demotion sets is provided for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .data import PARTITION_A, PARTITION_B
from .ranking import ConstraintSpec, RankVector, assign_ranks

# hard cap on exhaustive window enumeration; beyond this the search anchors
# on a greedy bit decomposition and scans a trimmed window around it
_EXHAUSTIVE_LIMIT = 8192
_WINDOW_HALF_WIDTH = 512
_ORACLE_LIMIT = 16


class InfeasibleProjection(RuntimeError):
    """The sum-rank band is unreachable for these partition sizes."""

    def __init__(self, spec: ConstraintSpec):
        super().__init__(
            "no feasible projection: maximum attainable partition-A sum rank "
            f"{spec.r_a_most} is below the band floor {spec.c}"
        )
        self.spec = spec


class InstanceTooLarge(ValueError):
    """Exhaustive projection was requested for an instance beyond 2^16 subsets."""


@dataclass(frozen=True)
class ProjectionOutcome:
    """Result of projecting a prediction vector onto the sum-rank band."""

    m_s: np.ndarray
    demoted: np.ndarray
    kept: np.ndarray
    achieved_r_a: float
    feasible: bool
    objective: float

    @property
    def n_demoted(self) -> int:
        return int(self.demoted.size)


def demotion_rank(
    m_p: np.ndarray, demoted: np.ndarray, protected: np.ndarray
) -> tuple[RankVector, float]:
    """Ranks under the demotion convention and the partition-A sum rank.

    Demoted instances occupy the bottom ranks 1..|S'| in flat-index order;
    kept instances are tie-average-ranked above them by value.
    """
    m_p = np.asarray(m_p, dtype=float)
    protected = np.asarray(protected)
    n = m_p.size
    demoted = np.asarray(demoted, dtype=int)
    if demoted.size == 0:
        rv = assign_ranks(m_p)
        return rv, float(rv.ranks[protected == PARTITION_A].sum())

    mask = np.zeros(n, dtype=bool)
    mask[demoted] = True
    kept_idx = np.flatnonzero(~mask)
    demoted_idx = np.flatnonzero(mask)  # ascending flat index

    ranks = np.empty(n, dtype=float)
    ranks[demoted_idx] = np.arange(1, demoted_idx.size + 1, dtype=float)
    kept_rv = assign_ranks(m_p[kept_idx])
    ranks[kept_idx] = kept_rv.ranks + demoted_idx.size
    tie_groups = [kept_idx[g] for g in kept_rv.tie_groups]
    rv = RankVector(ranks=ranks, tie_groups=tie_groups)
    return rv, float(ranks[protected == PARTITION_A].sum())


def _outcome(
    m_p: np.ndarray,
    demoted: np.ndarray,
    protected: np.ndarray,
    spec: ConstraintSpec,
) -> ProjectionOutcome:
    """Assemble an outcome, evaluating feasibility exactly."""
    demoted = np.sort(np.asarray(demoted, dtype=int))
    _, r_a = demotion_rank(m_p, demoted, protected)
    n = m_p.size
    mask = np.zeros(n, dtype=bool)
    mask[demoted] = True
    m_s = np.where(mask, 0.0, m_p)
    kept = np.flatnonzero(~mask)
    return ProjectionOutcome(
        m_s=m_s,
        demoted=demoted,
        kept=kept,
        achieved_r_a=r_a,
        feasible=spec.contains(r_a),
        objective=float((m_p[kept] ** 2).sum()),
    )


class _ShrinkWorkspace:
    """Fast exact sum-rank evaluation for demotion subsets of partition A.

    Precomputes the global value ordering once; per-candidate evaluation is
    then O(N).  Only valid while the input vector is tie-free, which the
    caller checks (ties fall back to ``demotion_rank``).
    """

    def __init__(self, m_p: np.ndarray, protected: np.ndarray):
        self.m_p = m_p
        self.protected = protected
        self.order = np.argsort(m_p, kind="stable")
        self.is_a = protected == PARTITION_A
        self.a_in_order = self.is_a[self.order]
        base = assign_ranks(m_p)
        self.tie_free = not base.tie_groups
        self.plain_ranks = base.ranks
        # A indices sorted by ascending rank: bit i of a subset code refers
        # to a_sorted[i], so the most significant bit is the highest ranked
        self.a_sorted = self.order[self.a_in_order]

    def r_a_for_subset(self, demote_bits: np.ndarray) -> float:
        """Partition-A sum rank after demoting ``a_sorted[demote_bits]``."""
        demoted = self.a_sorted[demote_bits]
        if not self.tie_free:
            _, r_a = demotion_rank(self.m_p, demoted, self.protected)
            return r_a
        m = demoted.size
        n = self.m_p.size
        demote_mask = np.zeros(n, dtype=bool)
        demote_mask[demoted] = True
        kept_in_order = ~demote_mask[self.order]
        kept_ranks = np.cumsum(kept_in_order)  # rank among kept, in value order
        kept_a = self.a_in_order & kept_in_order
        r_kept = float((kept_ranks[kept_a] + m).sum())
        # demoted entries take bottom ranks 1..m; all demoted are in A here
        return r_kept + m * (m + 1) / 2.0


def _bits_from_code(code: int, width: int) -> np.ndarray:
    """Boolean array b with b[i] = bit i of ``code`` (i = 0 least significant)."""
    if width == 0:
        return np.zeros(0, dtype=bool)
    raw = code.to_bytes((width + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:width].astype(bool)


def _code_from_bits(bits: np.ndarray) -> int:
    code = 0
    for i in np.flatnonzero(bits):
        code |= 1 << int(i)
    return code


def shrink_sum_rank(
    m_p: np.ndarray,
    spec: ConstraintSpec,
    protected: np.ndarray,
    tau: int,
) -> ProjectionOutcome:
    """Demote partition-A instances until the sum rank drops into the band.

    Candidate demotion subsets are encoded as integers whose bit i selects
    the A instance with the (i+1)-th smallest rank.  The search anchors at
    code 2^q * d / delta (d = required decrement, delta = decrement when all
    of A is demoted) and scans a window of nearby codes, scoring each by its
    exact decrement.  If the chosen subset overshoots below the band floor,
    the grow pass tops the sum rank back up.
    """
    m_p = np.asarray(m_p, dtype=float)
    protected = np.asarray(protected)
    ws = _ShrinkWorkspace(m_p, protected)
    r_a0 = float(ws.plain_ranks[ws.is_a].sum())
    q = ws.a_sorted.size
    d = abs(spec.c - r_a0)
    delta_all = r_a0 - ws.r_a_for_subset(np.ones(q, dtype=bool))

    if d >= delta_all:
        # even demoting every A instance cannot remove enough rank mass;
        # saturate and let the grow pass correct any overshoot
        outcome = _outcome(m_p, ws.a_sorted, protected, spec)
        if not outcome.feasible and outcome.achieved_r_a < spec.c:
            outcome = grow_sum_rank(
                m_p, spec, protected, initial_demoted=outcome.demoted
            )
        return outcome

    codes = _candidate_codes(d, delta_all, q, tau, ws)
    best_code = None
    best_gap = np.inf
    best_in_band = None
    best_in_band_gap = np.inf
    for code in codes:
        bits = _bits_from_code(code, q)
        achieved = ws.r_a_for_subset(bits)
        gap = abs((r_a0 - achieved) - d)
        if gap < best_gap - 1e-12 or (
            abs(gap - best_gap) <= 1e-12 and (best_code is None or code < best_code)
        ):
            best_gap = gap
            best_code = code
        if spec.contains(achieved) and gap < best_in_band_gap - 1e-12:
            best_in_band_gap = gap
            best_in_band = code
    assert best_code is not None

    demoted = ws.a_sorted[_bits_from_code(best_code, q)]
    outcome = _outcome(m_p, demoted, protected, spec)
    if not outcome.feasible and outcome.achieved_r_a < spec.c:
        rescued = grow_sum_rank(m_p, spec, protected, initial_demoted=outcome.demoted)
        if rescued.feasible or abs_band_distance(rescued.achieved_r_a, spec) < abs_band_distance(
            outcome.achieved_r_a, spec
        ):
            outcome = rescued
    if not outcome.feasible and best_in_band is not None and best_in_band != best_code:
        # the closest-decrement pick missed the band but another candidate in
        # the window landed inside it
        outcome = _outcome(
            m_p, ws.a_sorted[_bits_from_code(best_in_band, q)], protected, spec
        )
    return outcome


def _candidate_codes(
    d: float, delta_all: float, q: int, tau: int, ws: _ShrinkWorkspace
) -> list[int]:
    """Subset codes to score, capped at ``tau`` candidates."""
    space = 1 << q
    frac = Fraction(d).limit_denominator(10**12) / Fraction(delta_all).limit_denominator(10**12)
    anchor = (space * frac.numerator) // frac.denominator

    if space <= min(2 * tau + 2, _EXHAUSTIVE_LIMIT):
        return list(range(space))

    half = min(tau, _WINDOW_HALF_WIDTH)
    lo = max(0, anchor - half)
    hi = min(space - 1, anchor + 1 + half)
    window = list(range(lo, hi + 1))

    # greedy most-significant-bit anchor: include high-ranked A instances
    # while the exact decrement stays at most d
    r_a0 = float(ws.plain_ranks[ws.is_a].sum())
    bits = np.zeros(q, dtype=bool)
    for i in range(q - 1, -1, -1):
        bits[i] = True
        if r_a0 - ws.r_a_for_subset(bits) > d:
            bits[i] = False
    greedy = _code_from_bits(bits)
    g_lo = max(0, greedy - half)
    g_hi = min(space - 1, greedy + half)
    seen = set(window)
    for code in range(g_lo, g_hi + 1):
        if code not in seen:
            window.append(code)
    return window[: max(1, 2 * tau + 2)]


def abs_band_distance(r_a: float, spec: ConstraintSpec) -> float:
    if r_a < spec.c:
        return spec.c - r_a
    if r_a > spec.upper:
        return r_a - spec.upper
    return 0.0


def grow_sum_rank(
    m_p: np.ndarray,
    spec: ConstraintSpec,
    protected: np.ndarray,
    initial_demoted: np.ndarray | None = None,
) -> ProjectionOutcome:
    """Demote partition-B instances in ascending rank order to raise the
    partition-A sum rank into the band.

    Each demotion of a B instance lifts every A instance below it by one
    rank, contributing m_i = #{A below i}.  The greedy accumulates these
    increments until the total lands in [d, C + kappa - r_A]; if it skips
    over the band, the closest prefix is returned with ``feasible`` False.
    """
    m_p = np.asarray(m_p, dtype=float)
    protected = np.asarray(protected)
    initial = (
        np.asarray(initial_demoted, dtype=int)
        if initial_demoted is not None
        else np.zeros(0, dtype=int)
    )
    rv, r_a0 = demotion_rank(m_p, initial, protected)
    d = spec.c - r_a0
    upper = spec.c + spec.kappa - r_a0
    if d <= 0:
        return _outcome(m_p, initial, protected, spec)

    mask = np.zeros(m_p.size, dtype=bool)
    mask[initial] = True
    kept_b = np.flatnonzero((protected == PARTITION_B) & ~mask)
    a_ranks = np.sort(rv.ranks[protected == PARTITION_A])
    # increments for each kept B instance: number of A ranks strictly below
    incr = np.searchsorted(a_ranks, rv.ranks[kept_b], side="left")
    # ascending rank order, ties broken by ascending flat index
    order = np.lexsort((kept_b, rv.ranks[kept_b]))
    kept_b = kept_b[order]
    incr = incr[order]

    totals = np.cumsum(incr)
    landed = np.flatnonzero((totals >= d) & (totals <= upper))
    if landed.size:
        take = landed[0] + 1
    else:
        # overshoot: pick the prefix whose total is closest to the band
        candidates = np.concatenate(([0.0], totals))
        dist = np.where(
            candidates < d, d - candidates, np.where(candidates > upper, candidates - upper, 0.0)
        )
        take = int(np.argmin(dist))
    demoted = np.concatenate((initial, kept_b[:take]))
    return _outcome(m_p, demoted, protected, spec)


def project_onto_q(
    m: np.ndarray,
    v: np.ndarray,
    spec: ConstraintSpec,
    protected: np.ndarray,
    tau: int,
) -> ProjectionOutcome:
    """Project m + v onto the sum-rank band.

    Dispatch: raise if the band is unreachable outright; identity when the
    sum rank is already in band; otherwise shrink (too high) or grow (too
    low) via the demotion heuristics.
    """
    m_p = np.asarray(m, dtype=float) + np.asarray(v, dtype=float)
    if spec.r_a_most < spec.c:
        raise InfeasibleProjection(spec)
    _, r_a = demotion_rank(m_p, np.zeros(0, dtype=int), np.asarray(protected))
    if spec.contains(r_a):
        return _outcome(m_p, np.zeros(0, dtype=int), protected, spec)
    if r_a > spec.upper:
        return shrink_sum_rank(m_p, spec, protected, tau)
    return grow_sum_rank(m_p, spec, protected)


def brute_force_project(
    m_p: np.ndarray,
    spec: ConstraintSpec,
    protected: np.ndarray,
) -> ProjectionOutcome:
    """Exhaustive projection over all demotion sets (N <= 16).

    Among feasible demotion sets, maximizes the kept squared mass; ties are
    broken by the lexicographically smallest demoted index set.  Returns the
    empty demotion with ``feasible`` False when no subset lands in the band.
    """
    m_p = np.asarray(m_p, dtype=float)
    protected = np.asarray(protected)
    n = m_p.size
    if n > _ORACLE_LIMIT:
        raise InstanceTooLarge(f"exhaustive projection supports N <= {_ORACLE_LIMIT}, got {n}")

    best: tuple[float, tuple[int, ...]] | None = None
    idx = np.arange(n)
    for code in range(1 << n):
        bits = _bits_from_code(code, n)
        demoted = idx[bits]
        _, r_a = demotion_rank(m_p, demoted, protected)
        if not spec.contains(r_a):
            continue
        objective = float((m_p[~bits] ** 2).sum())
        key = tuple(demoted.tolist())
        if best is None or objective > best[0] or (objective == best[0] and key < best[1]):
            best = (objective, key)
    if best is None:
        out = _outcome(m_p, np.zeros(0, dtype=int), protected, spec)
        return ProjectionOutcome(
            m_s=out.m_s,
            demoted=out.demoted,
            kept=out.kept,
            achieved_r_a=out.achieved_r_a,
            feasible=False,
            objective=out.objective,
        )
    return _outcome(m_p, np.array(best[1], dtype=int), protected, spec)
