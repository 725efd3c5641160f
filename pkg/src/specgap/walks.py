"""Unbiased random-walk estimators of Laplacian powers.

Any power of ``L = sum_e w_e x_e x_e^T`` expands into a sum over edge tuples
whose scalar weight is the product of consecutive incidence inner products
(the chain weight).  That weight vanishes unless consecutive edges share an
endpoint, so the sum ranges exactly over walks on the *edge incidence graph*.
Sampling those walks forward (uniform start edge, uniform incident successor,
self-loops included) gives a Horvitz-Thompson estimator of ``L^ell v``:
divide each walk's contribution by its sampling probability and average.

The rejection mode thins walks down to a uniform distribution (every walk
kept with identical probability ``p_min``), which also yields an unbiased
estimate of the total chain count from the acceptance rate.

Probabilities are accumulated in log space so long walks never underflow, and
sampling is chunked: chunk ``i`` draws from its own counter-based stream
keyed by ``(seed, i)`` and chunks are reduced in index order, so results are
bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import Graph, EdgeIncidenceGraph, degree_bounds, edge_incidence_graph

__all__ = [
    "Walk",
    "SamplerConfig",
    "alpha",
    "sample_walk",
    "p_min",
    "log_p_min",
    "rejection_filter",
    "estimate_power_matvec",
    "estimate_polynomial_matvec",
    "enumerate_chains",
]

_CHUNK = 8192
_ENUM_BUDGET = 10_000_000


@dataclass(frozen=True)
class Walk:
    """A length-ell edge sequence with its sampling probability and weight.

    ``alpha_chain`` is the product of consecutive incidence inner products
    times the product of the visited edges' weights.
    """

    edges: tuple[int, ...]
    p_walk: float
    alpha_chain: float
    log_p_walk: float


@dataclass(frozen=True)
class SamplerConfig:
    ell: int
    walks_per_estimate: int
    n_walkers: int = 1
    mode: str = "importance"
    seed: int = 0

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("walk length must be at least 1")
        if self.walks_per_estimate < 1:
            raise ValueError("need at least one walk per estimate")
        if self.mode not in ("importance", "rejection"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.n_walkers < 1:
            raise ValueError("n_walkers must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def alpha(g: Graph, e1: int, e2: int) -> int:
    """Incidence inner product of two edges' +-1 vectors.

    0 for disjoint edges, -1 for a serial pair, +1 for converging or
    diverging pairs, 2 for a repeated edge (orientation is fixed by node
    numbering, never by walk direction).
    """
    u1, v1 = int(g.u[e1]), int(g.v[e1])
    u2, v2 = int(g.u[e2]), int(g.v[e2])
    return (u1 == u2) + (v1 == v2) - (u1 == v2) - (v1 == u2)


def _alpha_pairs(g: Graph, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    u1, v1 = g.u[e1], g.v[e1]
    u2, v2 = g.u[e2], g.v[e2]
    return ((u1 == u2).astype(np.int64) + (v1 == v2)
            - (u1 == v2) - (v1 == u2))


def sample_walk(inc: EdgeIncidenceGraph, ell: int, rng: np.random.Generator) -> Walk:
    """Draw one forward walk on the edge incidence graph.

    The first edge is uniform over all edges; each successor is uniform over
    the current edge's incident list (which includes itself).
    """
    if ell < 1:
        raise ValueError("walk length must be at least 1")
    g = inc.graph
    edges = [int(rng.integers(inc.m))]
    log_p = -math.log(inc.m)
    alpha_chain = float(g.w[edges[0]])
    for _ in range(ell - 1):
        cur = edges[-1]
        nbrs = inc.incident(cur)
        nxt = int(nbrs[int(rng.random() * len(nbrs))])
        log_p -= math.log(len(nbrs))
        alpha_chain *= alpha(g, cur, nxt) * float(g.w[nxt])
        edges.append(nxt)
    return Walk(tuple(edges), math.exp(log_p), alpha_chain, log_p)


def log_p_min(m: int, deg_star_inc: int, ell: int) -> float:
    if m < 1 or deg_star_inc < 1 or ell < 1:
        raise ValueError("p_min requires positive m, deg_star_inc, ell")
    return -ell * math.log(deg_star_inc) - math.log(m)


def p_min(m: int, deg_star_inc: int, ell: int) -> float:
    """Uniform lower bound ``(deg*_inc)^{-ell} / m`` on any walk probability."""
    return math.exp(log_p_min(m, deg_star_inc, ell))


def rejection_filter(walk: Walk, p_min_value: float,
                     rng: np.random.Generator) -> bool:
    """Keep the walk with probability ``p_min / p_walk``.

    Conditioned on acceptance every realizable walk has identical probability
    ``p_min``, i.e. the accepted stream is uniform over incidence walks.
    """
    if p_min_value > walk.p_walk * (1 + 1e-12):
        raise AssertionError("p_min exceeds the walk probability; "
                             "the degree bound is violated")
    return bool(rng.random() < p_min_value / walk.p_walk)


# ---------------------------------------------------------------------------
# batched estimators


def _sample_chunk(inc: EdgeIncidenceGraph, ell: int, count: int,
                  rng: np.random.Generator):
    """Vectorized forward sampling of ``count`` walks of length ``ell``.

    Returns the edge index matrix (count, ell) and the per-walk log sampling
    probability.
    """
    m = inc.m
    E = np.empty((count, ell), dtype=np.int64)
    E[:, 0] = (rng.random(count) * m).astype(np.int64)
    log_p = np.full(count, -math.log(m))
    for j in range(ell - 1):
        cur = E[:, j]
        deg = inc.deg_inc[cur]
        pick = (rng.random(count) * deg).astype(np.int64)
        E[:, j + 1] = inc.indices[inc.indptr[cur] + pick]
        log_p -= np.log(deg)
    return E, log_p


def _chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence((seed, chunk_index))
    return np.random.Generator(np.random.Philox(ss))


def _prefix_tables(g: Graph, E: np.ndarray):
    """Cumulative sign/log tables for all prefixes of a batch of walks.

    For prefix length i (1-based) the chain weight is
    ``sign[:, i-1] * exp(logmag[:, i-1])`` and the sampling probability has
    log ``logp[:, i-1]``.
    """
    count, ell = E.shape
    logw = np.log(g.w[E])
    logmag = np.cumsum(logw, axis=1)
    sign = np.ones((count, ell))
    if ell > 1:
        a = _alpha_pairs(g, E[:, :-1].ravel(), E[:, 1:].ravel()).reshape(count, ell - 1)
        sign[:, 1:] = np.cumprod(np.sign(a), axis=1)
        logmag[:, 1:] += np.cumsum(np.log(np.abs(a)), axis=1)
    return sign, logmag


def _accumulate(g: Graph, E: np.ndarray, coefs: np.ndarray, v: np.ndarray,
                which: int, out: np.ndarray) -> None:
    """Add ``coef * x_{e_1} (x_{e_i}^T v)`` for prefix length ``which``."""
    e_last = E[:, which - 1]
    dot = v[g.u[e_last]] - v[g.v[e_last]]
    contrib = coefs * dot
    out += np.bincount(g.u[E[:, 0]], weights=contrib, minlength=g.n)
    out -= np.bincount(g.v[E[:, 0]], weights=contrib, minlength=g.n)


def _estimate_chunks(g: Graph, inc: EdgeIncidenceGraph, coeffs: np.ndarray,
                     v: np.ndarray, cfg: SamplerConfig):
    """Sum walk contributions over all chunks, reduced in chunk order.

    Returns (sum vector, total walks, accepted walks) where the acceptance
    count is only meaningful in rejection mode.
    """
    ell = len(coeffs) - 1
    n_chunks = -(-cfg.walks_per_estimate // _CHUNK)
    sizes = [min(_CHUNK, cfg.walks_per_estimate - i * _CHUNK)
             for i in range(n_chunks)]
    lpmin = log_p_min(g.m, degree_bounds(g).deg_star_inc, ell) \
        if cfg.mode == "rejection" else 0.0

    def one_chunk(idx: int):
        rng = _chunk_generator(cfg.seed, idx)
        E, log_p_full = _sample_chunk(inc, ell, sizes[idx], rng)
        sign, logmag = _prefix_tables(g, E)
        acc = np.zeros(g.n)
        accepted = 0
        if cfg.mode == "importance":
            # log_p for prefix i: -log m - sum of the first i-1 degree logs
            deg_logs = np.zeros((sizes[idx], ell))
            if ell > 1:
                deg_logs[:, 1:] = np.cumsum(np.log(inc.deg_inc[E[:, :-1]]), axis=1)
            for i in range(1, ell + 1):
                if coeffs[i] == 0.0:
                    continue
                log_p = -math.log(g.m) - deg_logs[:, i - 1]
                coefs = coeffs[i] * sign[:, i - 1] * np.exp(logmag[:, i - 1] - log_p)
                _accumulate(g, E, coefs, v, i, acc)
        else:
            keep = rng.random(sizes[idx]) < np.exp(lpmin - log_p_full)
            accepted = int(keep.sum())
            if accepted:
                Ek = E[keep]
                coefs = coeffs[ell] * sign[keep, ell - 1] * np.exp(logmag[keep, ell - 1])
                _accumulate(g, Ek, coefs, v, ell, acc)
        return acc, sizes[idx], accepted

    if cfg.n_walkers == 1:
        parts = [one_chunk(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.n_walkers) as pool:
            parts = list(pool.map(one_chunk, range(n_chunks)))
    total = np.zeros(g.n)
    n_total = 0
    n_accepted = 0
    for acc, size, accepted in parts:
        total += acc
        n_total += size
        n_accepted += accepted
    return total, n_total, n_accepted


def estimate_power_matvec(g: Graph, ell: int, v: np.ndarray,
                          cfg: SamplerConfig) -> np.ndarray:
    """Monte Carlo estimate of ``L^ell v`` from incidence-graph walks.

    In importance mode each walk contributes its chain weight divided by its
    sampling probability (unbiased for any sample size).  In rejection mode
    only uniformly thinned walks contribute and the sum is rescaled by
    ``1 / (N p_min)``, which is the acceptance-rate estimate of the chain
    count folded into the average.
    """
    if ell < 1:
        raise ValueError("power must be at least 1")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.n,):
        raise ValueError("vector length must match the node count")
    if cfg.ell != ell:
        cfg = SamplerConfig(ell, cfg.walks_per_estimate, cfg.n_walkers,
                            cfg.mode, cfg.seed)
    coeffs = np.zeros(ell + 1)
    coeffs[ell] = 1.0
    inc = edge_incidence_graph(g)
    total, n_total, n_accepted = _estimate_chunks(g, inc, coeffs, v, cfg)
    if cfg.mode == "importance":
        return total / n_total
    if n_accepted == 0:
        raise RuntimeError("no walk survived rejection; increase "
                           "walks_per_estimate or use importance mode")
    pm = p_min(g.m, degree_bounds(g).deg_star_inc, ell)
    return total / (n_total * pm)


def estimate_polynomial_matvec(g: Graph, coeffs, v: np.ndarray,
                               cfg: SamplerConfig) -> np.ndarray:
    """Estimate ``sum_i coeffs[i] L^i v`` reusing one walk for every power.

    Each length-ell walk yields estimates of all shorter powers through its
    prefixes; by linearity of expectation the correlated prefix estimates
    still average to an unbiased value for the polynomial.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise ValueError("coeffs must be a nonempty 1-D sequence")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.n,):
        raise ValueError("vector length must match the node count")
    if cfg.mode == "rejection":
        raise ValueError("rejection mode estimates single powers only; "
                         "polynomials use importance weighting")
    ell = coeffs.size - 1
    out = coeffs[0] * v
    if ell == 0 or not np.any(coeffs[1:]):
        return out
    if cfg.ell != ell:
        cfg = SamplerConfig(ell, cfg.walks_per_estimate, cfg.n_walkers,
                            cfg.mode, cfg.seed)
    inc = edge_incidence_graph(g)
    total, n_total, _ = _estimate_chunks(g, inc, coeffs, v, cfg)
    return out + total / n_total


def enumerate_chains(g: Graph, ell: int, budget: int = _ENUM_BUDGET) -> np.ndarray:
    """Exact sum over every incidence walk: must equal dense ``L^ell``.

    Exhaustive oracle for the walk expansion; refused when the loose bound
    ``m * deg_star_inc^(ell-1)`` exceeds the enumeration budget.
    """
    if ell < 1:
        raise ValueError("power must be at least 1")
    if g.m == 0:
        return np.zeros((g.n, g.n))
    db = degree_bounds(g)
    est = g.m * (db.deg_star_inc ** (ell - 1))
    if est > budget:
        raise ValueError(f"enumeration would visit ~{est} chains, "
                         f"over the budget of {budget}")
    inc = edge_incidence_graph(g)
    first = np.arange(g.m, dtype=np.int64)
    cur = first.copy()
    coef = g.w.astype(np.float64).copy()
    for _ in range(ell - 1):
        counts = inc.deg_inc[cur]
        total = int(counts.sum())
        rep = np.repeat(np.arange(cur.size), counts)
        starts = np.cumsum(counts) - counts
        flat = np.arange(total) - np.repeat(starts, counts) \
            + np.repeat(inc.indptr[cur], counts)
        nxt = inc.indices[flat]
        cur_rep = cur[rep]
        coef = coef[rep] * _alpha_pairs(g, cur_rep, nxt) * g.w[nxt]
        first = first[rep]
        cur = nxt
    out = np.zeros((g.n, g.n))
    np.add.at(out, (g.u[first], g.u[cur]), coef)
    np.add.at(out, (g.v[first], g.v[cur]), coef)
    np.subtract.at(out, (g.u[first], g.v[cur]), coef)
    np.subtract.at(out, (g.v[first], g.u[cur]), coef)
    return out
