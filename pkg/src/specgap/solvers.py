"""Iterative top-k eigensolvers over a symmetric matvec oracle.

Two step rules are provided: Oja's rule (gradient step + thin QR by modified
Gram-Schmidt) and a mu-EigenGame-style rule (per-column Riemannian ascent
with deflation penalties read from the previous iterate, so all columns
update in parallel).  Both consume an oracle ``V -> M V`` and, applied to a
reversed transformed Laplacian, their top-k estimates are the bottom-k
eigenvectors of the original Laplacian.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .metrics import GroundTruth, graph_ground_truth, subspace_error, eigenvector_streak
from .transforms import (
    SpectralTransform,
    TransformedOperator,
    make_reversed_operator,
    polynomial_coefficients,
)
from .walks import SamplerConfig, estimate_polynomial_matvec

__all__ = [
    "EigenState",
    "SolverConfig",
    "MetricRow",
    "SolverRun",
    "init_state",
    "oja_step",
    "mu_eg_step",
    "make_stochastic_oracle",
    "run_solver",
    "run_to_csv",
]

_NORM_TOL = 1e-12


@dataclass
class EigenState:
    """Candidate eigenvector block (unit-norm columns) plus a step counter."""

    V: np.ndarray
    step: int = 0

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def k(self) -> int:
        return self.V.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    solver: str = "oja"
    k: int = 2
    eta: float = 0.1
    steps: int = 1000
    batch_size: int = 0  # 0 = deterministic full operator
    seed: int = 0
    eval_every: int = 100
    eta_schedule: str = "constant"  # or "invsqrt"
    streak_epsilon: float = 0.01

    def __post_init__(self):
        if self.solver not in ("oja", "mu-eg"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.eta <= 0:
            raise ValueError("step size must be positive")
        if self.steps < 0 or self.eval_every < 1 or self.k < 1:
            raise ValueError("invalid solver configuration")
        if self.eta_schedule not in ("constant", "invsqrt"):
            raise ValueError(f"unknown eta schedule {self.eta_schedule!r}")


def _orthonormalize(V: np.ndarray, rng: np.random.Generator | None) -> np.ndarray:
    """Thin QR by modified Gram-Schmidt; collapsed columns are re-randomized."""
    V = V.copy()
    n, k = V.shape
    for j in range(k):
        for i in range(j):
            V[:, j] -= (V[:, i] @ V[:, j]) * V[:, i]
        norm = np.linalg.norm(V[:, j])
        if norm < _NORM_TOL:
            warnings.warn(f"rank collapse in column {j}; re-randomizing",
                          RuntimeWarning)
            if rng is None:
                rng = np.random.default_rng(0)
            V[:, j] = rng.standard_normal(n)
            for i in range(j):
                V[:, j] -= (V[:, i] @ V[:, j]) * V[:, i]
            norm = np.linalg.norm(V[:, j])
        V[:, j] /= norm
    return V


def init_state(n: int, k: int, seed: int) -> EigenState:
    """Seeded Gaussian block, column-orthonormalized."""
    if k > n:
        raise ValueError("cannot ask for more eigenvectors than dimensions")
    rng = np.random.default_rng(seed)
    V = _orthonormalize(rng.standard_normal((n, k)), rng)
    return EigenState(V, 0)


def oja_step(state: EigenState, oracle, eta: float,
             rng: np.random.Generator | None = None) -> EigenState:
    """One Oja update: ``V <- orthonormalize(V + eta M V)``."""
    W = state.V + eta * oracle(state.V)
    return EigenState(_orthonormalize(W, rng), state.step + 1)


def mu_eg_step(state: EigenState, oracle, eta: float,
               rng: np.random.Generator | None = None) -> EigenState:
    """One parallel EigenGame-style update.

    Column i ascends ``M v_i`` deflated by the previous iterate's parents
    ``sum_{j<i} (v_j^T M v_i) v_j``, projected onto the tangent space at
    ``v_i``, then renormalized.
    """
    V = state.V
    MV = oracle(V)
    C = V.T @ MV
    G = MV - V @ np.triu(C, 1)
    d = np.einsum("nk,nk->k", V, G)
    W = V + eta * (G - V * d)
    norms = np.linalg.norm(W, axis=0)
    bad = norms < _NORM_TOL
    if np.any(bad):
        warnings.warn("rank collapse in mu-eg update; re-randomizing",
                      RuntimeWarning)
        if rng is None:
            rng = np.random.default_rng(0)
        W[:, bad] = rng.standard_normal((W.shape[0], int(bad.sum())))
        norms = np.linalg.norm(W, axis=0)
    return EigenState(W / norms, state.step + 1)


_STEP_RULES = {"oja": oja_step, "mu-eg": mu_eg_step}


def make_stochastic_oracle(op: TransformedOperator, batch_size: int, seed: int,
                           sampler: SamplerConfig | None = None):
    """Unbiased stochastic estimate of the reversed transformed matvec.

    The identity transform samples ``batch_size`` edges uniformly with
    replacement and rescales by ``m / batch_size``.  Polynomial transforms
    delegate the f(L)v part to the walk sampler, one call per column, with
    ``batch_size`` walks per estimate.  Batch size 0 falls back to the
    deterministic operator.
    """
    if batch_size == 0:
        return op.apply
    if batch_size < 0:
        raise ValueError("batch size must be nonnegative")
    t = op.transform
    g = op.laplacian.graph
    if t.kind == "identity":
        rng = np.random.default_rng(seed)

        def identity_oracle(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=np.float64)
            batch = rng.integers(0, g.m, size=batch_size)
            diff = (x[g.u[batch]] - x[g.v[batch]]) * \
                (g.w[batch] if x.ndim == 1 else g.w[batch][:, None])
            est = np.zeros_like(x)
            np.add.at(est, g.u[batch], diff)
            np.subtract.at(est, g.v[batch], diff)
            est *= g.m / batch_size
            return op.lambda_star * x - est

        return identity_oracle
    if not t.is_polynomial:
        raise ValueError("stochastic sampling needs a polynomial transform")
    coeffs = polynomial_coefficients(t)
    counter = [0]
    walkers = sampler.n_walkers if sampler is not None else 1
    walks = sampler.walks_per_estimate if sampler is not None else batch_size

    def walk_oracle(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        cols = x[:, None] if x.ndim == 1 else x
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            call_seed = int(np.random.SeedSequence(
                (seed, counter[0])).generate_state(1)[0])
            counter[0] += 1
            cfg = SamplerConfig(len(coeffs) - 1, walks, walkers,
                                "importance", call_seed)
            fx = estimate_polynomial_matvec(g, coeffs, cols[:, j], cfg)
            out[:, j] = op.lambda_star * cols[:, j] - fx
        return out[:, 0] if x.ndim == 1 else out

    return walk_oracle


@dataclass
class MetricRow:
    step: int
    subspace_error: float
    streak: int
    elapsed_ns: int


@dataclass
class SolverRun:
    records: list[MetricRow]
    state: EigenState
    config: SolverConfig
    ground_truth: GroundTruth | None
    steps_to_streak: int | None = None
    steps_to_subspace: int | None = None

    @property
    def V(self) -> np.ndarray:
        return self.state.V


def run_solver(g: Graph, transform: SpectralTransform, config: SolverConfig,
               mode: str = "unnormalized",
               ground_truth: GroundTruth | None = None,
               operator: TransformedOperator | None = None,
               streak_target: int | None = None,
               subspace_target: float | None = None,
               stop_on_targets: bool = False,
               record_timing: bool = True) -> SolverRun:
    """Run a solver on the reversed transformed Laplacian of a graph.

    Metrics are always evaluated against the *original* Laplacian's bottom-k
    ground truth, so transforms change the trajectory but never the target.
    Emits one metric row at step 0, every ``eval_every`` steps, and at the
    final step; optionally stops once the requested targets are reached.
    """
    if config.k > g.n:
        raise ValueError("k exceeds the node count")
    op = operator if operator is not None else make_reversed_operator(g, transform, mode)
    ss = np.random.SeedSequence(config.seed)
    init_seed, aux_seed, oracle_seed = (int(x) for x in ss.generate_state(3))
    rng = np.random.default_rng(aux_seed)
    oracle = make_stochastic_oracle(op, config.batch_size, oracle_seed) \
        if config.batch_size > 0 else op.apply
    if ground_truth is None and g.n <= 5000:
        ground_truth = graph_ground_truth(g, mode)
    state = init_state(g.n, config.k, init_seed)
    step_fn = _STEP_RULES[config.solver]
    target_streak = config.k if streak_target is None else streak_target

    records: list[MetricRow] = []
    run = SolverRun(records, state, config, ground_truth)
    t0 = time.perf_counter_ns()

    def evaluate(st: EigenState) -> None:
        elapsed = time.perf_counter_ns() - t0 if record_timing else 0
        if ground_truth is None:
            row = MetricRow(st.step, float("nan"), 0, elapsed)
        else:
            err = subspace_error(st.V, ground_truth, config.k)
            stk = eigenvector_streak(st.V, ground_truth, config.streak_epsilon)
            row = MetricRow(st.step, err, stk, elapsed)
            if run.steps_to_streak is None and stk >= target_streak:
                run.steps_to_streak = st.step
            if subspace_target is not None and run.steps_to_subspace is None \
                    and err <= subspace_target:
                run.steps_to_subspace = st.step
        records.append(row)

    def targets_met() -> bool:
        if run.steps_to_streak is None:
            return False
        if subspace_target is not None and run.steps_to_subspace is None:
            return False
        return True

    evaluate(state)
    for t in range(1, config.steps + 1):
        eta = config.eta if config.eta_schedule == "constant" \
            else config.eta / np.sqrt(t)
        state = step_fn(state, oracle, eta, rng)
        if t % config.eval_every == 0 or t == config.steps:
            evaluate(state)
            if stop_on_targets and targets_met():
                break
    run.state = state
    return run


def run_to_csv(run: SolverRun) -> str:
    """Metric trajectory as CSV text: ``step,subspace_error,streak,elapsed_ns``."""
    lines = ["step,subspace_error,streak,elapsed_ns"]
    for row in run.records:
        lines.append(f"{row.step},{row.subspace_error!r},{row.streak},{row.elapsed_ns}")
    return "\n".join(lines) + "\n"
