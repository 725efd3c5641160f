"""Deterministic experiment graph families.

All generators use NumPy's PCG64 generator seeded from the spec, so a spec
(including its seed) maps to a byte-identical edge list on every platform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "CliqueSpec",
    "MdpSpec",
    "LinkPredSpec",
    "gen_clique_clusters",
    "gen_three_room_mdp",
    "common_neighbors_score",
    "degrade_and_complete",
]


@dataclass(frozen=True)
class CliqueSpec:
    """k near-equal cliques on n nodes, joined by random short-circuit edges."""

    n: int
    k: int
    max_shortcircuit: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.k < 2 or self.n < self.k:
            raise ValueError("need n >= k >= 2")
        if self.n // self.k < 2:
            raise ValueError("clique size below 2; no internal edges possible")
        if self.max_shortcircuit < 0:
            raise ValueError("max_shortcircuit must be nonnegative")


@dataclass(frozen=True)
class MdpSpec:
    """Three-room grid world: (10s+1) x (30s+1) cells, doors 1/h of the height."""

    s: int
    h: int

    def __post_init__(self):
        if self.s < 1 or self.h < 1:
            raise ValueError("scale and doorway denominator must be positive")

    @property
    def rows(self) -> int:
        return 10 * self.s + 1

    @property
    def cols(self) -> int:
        return 30 * self.s + 1

    @property
    def door_height(self) -> int:
        # round half away from zero, then clamp so the rooms stay connected
        return max(1, int(math.floor(self.rows / self.h + 0.5)))


@dataclass(frozen=True)
class LinkPredSpec:
    base: CliqueSpec
    p_remove: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.p_remove < 1):
            raise ValueError("removal probability must lie in [0, 1)")


def gen_clique_clusters(spec: CliqueSpec) -> tuple[Graph, np.ndarray]:
    """Build the clique-cluster graph and its ground-truth labels.

    Nodes are split into k contiguous blocks whose sizes differ by at most
    one; each block is a complete graph.  Every unordered block pair gets an
    independent Uniform{0..max_shortcircuit} number of distinct cross edges.
    """
    base, rem = divmod(spec.n, spec.k)
    sizes = [base + 1] * rem + [base] * (spec.k - rem)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    labels = np.concatenate([np.full(sz, c, dtype=np.int64)
                             for c, sz in enumerate(sizes)])
    us, vs = [], []
    for c, sz in enumerate(sizes):
        iu, iv = np.triu_indices(sz, k=1)
        us.append(iu + starts[c])
        vs.append(iv + starts[c])
    rng = np.random.default_rng(spec.seed)
    for a in range(spec.k):
        for b in range(a + 1, spec.k):
            count = int(rng.integers(0, spec.max_shortcircuit + 1))
            count = min(count, sizes[a] * sizes[b])  # distinct pairs only
            if count == 0:
                continue
            flat = rng.choice(sizes[a] * sizes[b], size=count, replace=False)
            us.append(starts[a] + flat // sizes[b])
            vs.append(starts[b] + flat % sizes[b])
    u = np.concatenate(us)
    v = np.concatenate(vs)
    return Graph(spec.n, u, v, np.ones(u.size)), labels


def gen_three_room_mdp(spec: MdpSpec) -> Graph:
    """Transition graph of the three-room grid world.

    Two full-height walls at one- and two-thirds of the width split the grid
    into three rooms; each wall is pierced by a vertically centered doorway.
    Nodes are the free cells, edges connect 4-neighborhood adjacent cells.
    """
    rows, cols = spec.rows, spec.cols
    door = spec.door_height
    free = np.ones((rows, cols), dtype=bool)
    top = (rows - door) // 2
    for wall_col in (cols // 3, (2 * cols) // 3):
        free[:, wall_col] = False
        free[top:top + door, wall_col] = True
    ids = np.full((rows, cols), -1, dtype=np.int64)
    ids[free] = np.arange(int(free.sum()))
    us, vs = [], []
    right = free[:, :-1] & free[:, 1:]
    us.append(ids[:, :-1][right])
    vs.append(ids[:, 1:][right])
    down = free[:-1, :] & free[1:, :]
    us.append(ids[:-1, :][down])
    vs.append(ids[1:, :][down])
    u = np.concatenate(us)
    v = np.concatenate(vs)
    return Graph(int(free.sum()), u, v, np.ones(u.size))


def common_neighbors_score(g: Graph, i: int, j: int) -> int:
    """Number of shared neighbors of a non-adjacent node pair."""
    if i == j:
        raise ValueError("node pair must be distinct")
    if g.has_edge(i, j):
        raise ValueError(f"({i}, {j}) is already an edge")
    return int(np.intersect1d(g.neighbors(i), g.neighbors(j),
                              assume_unique=True).size)


def degrade_and_complete(spec: LinkPredSpec) -> tuple[Graph, list[tuple[int, int]]]:
    """Remove edges at random, then re-add them with link-prediction weights.

    Each base edge is dropped independently with probability ``p_remove``
    (re-drawn with a fresh sub-seed, up to 100 attempts, if the survivor
    graph is disconnected).  Every removed edge gets a common-neighbors score
    on the degraded graph; scores are max-normalized into (0, 1] weights and
    zero-score predictions are dropped.  Surviving edges keep their weight.
    """
    base, _ = gen_clique_clusters(spec.base)
    if spec.p_remove == 0:
        return base, []
    for attempt in range(100):
        rng = np.random.default_rng(np.random.SeedSequence((spec.seed, attempt)))
        keep = rng.random(base.m) >= spec.p_remove
        degraded = Graph(base.n, base.u[keep], base.v[keep], base.w[keep])
        if degraded.is_connected():
            break
    else:
        raise RuntimeError(f"graph stayed disconnected after 100 removal "
                           f"attempts for {spec}")
    removed = [(int(a), int(b)) for a, b in
               zip(base.u[~keep], base.v[~keep])]
    scores = np.array([common_neighbors_score(degraded, a, b)
                       for a, b in removed], dtype=np.float64)
    us = [degraded.u]
    vs = [degraded.v]
    ws = [degraded.w]
    if removed:
        max_score = scores.max()
        if max_score == 0:
            warnings.warn("all predicted edges scored zero; completion is empty")
        else:
            pred = scores > 0
            ru = np.array([a for (a, _), p in zip(removed, pred) if p])
            rv = np.array([b for (_, b), p in zip(removed, pred) if p])
            us.append(ru)
            vs.append(rv)
            ws.append(scores[pred] / max_score)
    completed = Graph(base.n, np.concatenate(us), np.concatenate(vs),
                      np.concatenate(ws))
    return completed, removed
