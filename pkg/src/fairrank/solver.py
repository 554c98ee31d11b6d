"""Outer loop: alternate the convex proximal solve, the sum-rank projection,
and the scaled dual update for a fixed number of iterations.

The projection step is a heuristic onto a non-convex set, so there is no
convergence or optimality guarantee; the loop always runs exactly
``outer_iters`` steps and records a trace for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import PARTITION_A, TaskDataset
from .projection import ProjectionOutcome, project_onto_q
from .proximal import ProximalState, predict, solve_inner
from .ranking import auc_from_u, constraint_bounds, mann_whitney_u


@dataclass
class SolverConfig:
    """Hyperparameters of the full solver.

    rho and theta are the two step sizes, tau the projection search breadth,
    epsilon the fairness slack, beta the group-sparsity weight and gamma the
    inner penalty.  ``printed_kappa`` switches the band width to the
    alternative epsilon * n_A^2 form.
    """

    rho: float = 0.001
    beta: float = 0.1
    gamma: float = 1.0
    theta: float = 0.01
    epsilon: float = 0.01
    tau: int = 10**7
    outer_iters: int = 30
    inner_iters: int = 50
    seed: int = 0
    fairness_enabled: bool = True
    printed_kappa: bool = False

    def __post_init__(self):
        if self.rho <= 0 or self.gamma <= 0 or self.theta <= 0:
            raise ValueError("rho, gamma and theta must be positive")
        if self.beta < 0 or self.epsilon < 0:
            raise ValueError("beta and epsilon must be nonnegative")
        if self.tau < 1 or self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("tau, outer_iters and inner_iters must be positive")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    primal_residual: float
    feasible: bool | None
    achieved_r_a: float
    auc: float
    n_demoted: int


@dataclass
class SolverTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class SolverState:
    """All iterates owned by one solver run."""

    inner: ProximalState
    m_s: np.ndarray
    v: np.ndarray
    trace: SolverTrace = field(default_factory=SolverTrace)
    last_outcome: ProjectionOutcome | None = None


@dataclass
class RunResult:
    w: np.ndarray
    m_s: np.ndarray
    trace: SolverTrace
    outcome: ProjectionOutcome | None
    raw_predictions: np.ndarray


def init_state(data: TaskDataset, config: SolverConfig) -> SolverState:
    """Seeded initialization: M, M_S, V uniform over [0, 1), weights zero.

    With fairness disabled the projection is the identity, so M_S starts at
    M and the dual stays at zero for an exact reduction to the plain
    group-sparse regression.
    """
    rng = np.random.default_rng(config.seed)
    inner = ProximalState.from_dataset(
        data, gamma=config.gamma, theta=config.theta, beta=config.beta, rho=config.rho
    )
    n = data.n_instances
    inner.m = rng.uniform(size=n)
    if config.fairness_enabled:
        m_s = rng.uniform(size=n)
        v = rng.uniform(size=n)
    else:
        m_s = inner.m.copy()
        v = np.zeros(n)
    return SolverState(inner=inner, m_s=m_s, v=v)


def step(state: SolverState, data: TaskDataset, config: SolverConfig) -> SolverState:
    """One outer iteration: inner solve, projection, dual update."""
    _, m = solve_inner(state.inner, data, state.m_s, state.v, config.inner_iters)
    objective = state.inner.objective_history[-1]

    if config.fairness_enabled:
        n_a, n_b = data.partition_sizes()
        spec = constraint_bounds(n_a, n_b, config.epsilon, printed_kappa=config.printed_kappa)
        outcome = project_onto_q(m, state.v, spec, data.protected, config.tau)
        state.m_s = outcome.m_s
        state.v = state.v + m - state.m_s
        state.last_outcome = outcome
        u = mann_whitney_u(outcome.achieved_r_a, n_a)
        record = TraceRecord(
            iteration=len(state.trace),
            objective=objective,
            primal_residual=float(np.linalg.norm(m - state.m_s)),
            feasible=outcome.feasible,
            achieved_r_a=outcome.achieved_r_a,
            auc=auc_from_u(u, n_a, n_b),
            n_demoted=outcome.n_demoted,
        )
    else:
        state.m_s = m.copy()
        state.last_outcome = None
        record = TraceRecord(
            iteration=len(state.trace),
            objective=objective,
            primal_residual=0.0,
            feasible=None,
            achieved_r_a=float("nan"),
            auc=float("nan"),
            n_demoted=0,
        )
    state.trace.records.append(record)
    return state


def run(data: TaskDataset, config: SolverConfig) -> RunResult:
    """Execute exactly ``config.outer_iters`` outer steps on standardized data.

    Deterministic for a fixed config; raises InfeasibleProjection if the
    band is unreachable for the dataset's partition sizes.
    """
    if config.fairness_enabled:
        n_a, n_b = data.partition_sizes()
        if n_a < 1 or n_b < 1:
            raise ValueError("fairness-constrained runs need both partitions present")
    state = init_state(data, config)
    for _ in range(config.outer_iters):
        step(state, data, config)
    return RunResult(
        w=state.inner.w,
        m_s=state.m_s,
        trace=state.trace,
        outcome=state.last_outcome,
        raw_predictions=predict(data, state.inner.w),
    )


def validate_trace(trace: SolverTrace, spec) -> None:
    """Assert that every feasible record sits inside the band."""
    for rec in trace.records:
        if rec.feasible and not spec.contains(rec.achieved_r_a):
            raise AssertionError(
                f"iteration {rec.iteration}: feasible record with sum rank "
                f"{rec.achieved_r_a} outside [{spec.c}, {spec.upper}]"
            )


def is_a_mask(data: TaskDataset) -> np.ndarray:
    return data.protected == PARTITION_A
