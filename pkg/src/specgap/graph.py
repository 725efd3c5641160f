"""Undirected weighted graphs, Laplacian operators, and cut quantities.

The Laplacian is kept implicit: it is a sum of weighted edge outer-products
``L = sum_e w_e x_e x_e^T`` where ``x_e`` carries +1 at the smaller endpoint
index and -1 at the larger one.  Operators expose matvecs backed by a sparse
kernel; a dense matrix is only ever materialized by the test oracles in
:func:`dense_laplacian`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "IncidenceRow",
    "LaplacianOperator",
    "EdgeIncidenceGraph",
    "DegreeBounds",
    "build_laplacian",
    "laplacian_matvec",
    "dense_laplacian",
    "cut_value",
    "conductance",
    "brute_force_rho",
    "edge_incidence_graph",
    "degree_bounds",
    "read_edgelist",
    "write_edgelist",
]

_BRUTE_FORCE_MAX_NODES = 20
_DENSE_MAX_NODES = 5000


class IncidenceRow(NamedTuple):
    """One row of the incidence matrix: +1 at ``i_pos``, -1 at ``i_neg``."""

    i_pos: int
    i_neg: int
    w: float


@dataclass
class Graph:
    """Undirected weighted graph stored as a canonical edge list.

    Edges are canonicalized to ``u < v``, sorted lexicographically, and
    validated on construction: no self-loops, no duplicate pairs, strictly
    positive weights (zero-weight edges are silently dropped).  Instances are
    treated as immutable; adjacency and degree caches are built on demand.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    _adj: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.float64)
        if not (u.shape == v.shape == w.shape):
            raise ValueError("edge arrays must have identical length")
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        keep = w > 0
        u, v, w = u[keep], v[keep], w[keep]
        if u.size:
            if np.any(u == v):
                raise ValueError("self-loops are not allowed")
            if np.any((u < 0) | (u >= self.n) | (v < 0) | (v >= self.n)):
                raise ValueError("edge endpoint out of range")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        pair_ids = lo * self.n + hi
        if pair_ids.size and np.any(np.diff(pair_ids) == 0):
            raise ValueError("duplicate edge for an unordered node pair")
        self.u, self.v, self.w = lo, hi, w

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence]) -> "Graph":
        """Build a graph from an iterable of ``(u, v)`` or ``(u, v, w)``."""
        us, vs, ws = [], [], []
        for e in edges:
            if len(e) == 2:
                a, b = e
                c = 1.0
            else:
                a, b, c = e
            us.append(a)
            vs.append(b)
            ws.append(c)
        return cls(n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                   np.array(ws, dtype=np.float64))

    @property
    def m(self) -> int:
        return int(self.u.size)

    @property
    def num_edges(self) -> int:
        return self.m

    def incidence_rows(self) -> list[IncidenceRow]:
        return [IncidenceRow(int(a), int(b), float(c))
                for a, b, c in zip(self.u, self.v, self.w)]

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node, ``d_i = sum_j w_ij``."""
        d = np.bincount(self.u, weights=self.w, minlength=self.n)
        d += np.bincount(self.v, weights=self.w, minlength=self.n)
        return d

    def degree_counts(self) -> np.ndarray:
        """Unweighted degree (incident edge count) of every node."""
        d = np.bincount(self.u, minlength=self.n)
        d += np.bincount(self.v, minlength=self.n)
        return d

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted array of neighbors of node ``i``."""
        indptr, nbr, _ = self._adjacency()
        return nbr[indptr[i]:indptr[i + 1]]

    def incident_edges(self, i: int) -> np.ndarray:
        """Edge indices incident to node ``i``."""
        indptr, _, eid = self._adjacency()
        return eid[indptr[i]:indptr[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbors(i)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        if self.m == 0:
            return False
        adj = sp.coo_matrix((np.ones(self.m), (self.u, self.v)),
                            shape=(self.n, self.n))
        ncomp = sp.csgraph.connected_components(adj, directed=False,
                                                return_labels=False)
        return int(ncomp) == 1

    def _adjacency(self):
        if self._adj is None:
            ends = np.concatenate([self.u, self.v])
            other = np.concatenate([self.v, self.u])
            eids = np.concatenate([np.arange(self.m), np.arange(self.m)])
            order = np.lexsort((other, ends))
            ends, other, eids = ends[order], other[order], eids[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, ends + 1, 1)
            np.cumsum(indptr, out=indptr)
            object.__setattr__(self, "_adj", (indptr, other, eids))
        return self._adj


@dataclass
class LaplacianOperator:
    """Matvec oracle for the (un)normalized graph Laplacian.

    ``mode='unnormalized'`` applies ``L = D - A``;  ``mode='normalized'``
    applies ``D^{-1/2} L D^{-1/2}``.  The kernel is a CSR sparse matrix with
    O(n + m) storage; no dense matrix is ever formed here.
    """

    graph: Graph
    mode: str = "unnormalized"
    degrees: np.ndarray = field(init=False)
    _csr: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode not in ("unnormalized", "normalized"):
            raise ValueError(f"unknown Laplacian mode: {self.mode!r}")
        g = self.graph
        self.degrees = g.degrees()
        if self.mode == "normalized" and g.n and np.any(self.degrees == 0):
            raise ValueError("normalized Laplacian requires all degrees > 0")
        rows = np.concatenate([g.u, g.v, g.u, g.v])
        cols = np.concatenate([g.v, g.u, g.u, g.v])
        vals = np.concatenate([-g.w, -g.w, g.w, g.w])
        lap = sp.coo_matrix((vals, (rows, cols)), shape=(g.n, g.n)).tocsr()
        if self.mode == "normalized":
            with np.errstate(divide="ignore"):
                dinv = 1.0 / np.sqrt(self.degrees)
            dinv[~np.isfinite(dinv)] = 0.0
            scale = sp.diags(dinv)
            lap = scale @ lap @ scale
        self._csr = lap

    @property
    def n(self) -> int:
        return self.graph.n

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the Laplacian to a vector of length n or an (n, k) block."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: operator is {self.n}, "
                             f"input has leading dimension {x.shape[0]}")
        return self._csr @ x

    __call__ = matvec


def build_laplacian(g: Graph, mode: str = "unnormalized") -> LaplacianOperator:
    return LaplacianOperator(g, mode)


def laplacian_matvec(op: LaplacianOperator, x: np.ndarray) -> np.ndarray:
    return op.matvec(x)


def dense_laplacian(g: Graph, mode: str = "unnormalized") -> np.ndarray:
    """Dense Laplacian matrix.  Test/oracle use only; refused above desk scale."""
    if g.n > _DENSE_MAX_NODES:
        raise ValueError(f"dense Laplacian refused for n={g.n} "
                         f"(limit {_DENSE_MAX_NODES})")
    return build_laplacian(g, mode)._csr.toarray()


def cut_value(g: Graph, signs: np.ndarray) -> float:
    """Quadratic form ``sum_e w_e (s_u - s_v)^2`` for a +-1 assignment.

    Equals four times the total weight crossing the induced cut.
    """
    signs = np.asarray(signs)
    if signs.shape != (g.n,):
        raise ValueError("indicator vector has wrong length")
    if not np.all(np.abs(signs) == 1):
        raise ValueError("indicator entries must be +1 or -1")
    diff = signs[g.u] - signs[g.v]
    return float(np.sum(g.w * diff * diff))


def _cut_weight(g: Graph, mask: np.ndarray) -> float:
    crossing = mask[g.u] != mask[g.v]
    return float(np.sum(g.w[crossing]))


def conductance(g: Graph, subset: Iterable[int]) -> float:
    """Cut weight leaving ``subset`` divided by its volume (sum of degrees)."""
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.int64)
    if idx.size == 0 or idx.size == g.n:
        raise ValueError("subset must be nonempty and proper")
    if np.any((idx < 0) | (idx >= g.n)):
        raise ValueError("subset contains an out-of-range node")
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    vol = float(np.sum(g.degrees()[mask]))
    if vol == 0:
        raise ValueError("subset has zero volume")
    return _cut_weight(g, mask) / vol


def brute_force_rho(g: Graph) -> tuple[float, list[int]]:
    """Exact best balanced conductance by enumerating all cuts.

    Minimizes ``max(phi(S), phi(S_complement))`` over every nonempty proper
    subset.  Only subsets containing node 0 are enumerated (complement
    symmetry).  Desk-scale oracle: refused for n > 20.
    """
    if g.n > _BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute-force enumeration refused for n={g.n} "
                         f"(limit {_BRUTE_FORCE_MAX_NODES})")
    if g.n < 2:
        raise ValueError("need at least two nodes to cut")
    d = g.degrees()
    total_vol = float(d.sum())
    if total_vol == 0:
        return 0.0, [0]
    n_free = g.n - 1
    codes = np.arange(2 ** n_free, dtype=np.uint64)
    # membership[s, i] is True when node i belongs to subset s; node 0 always in.
    bits = np.zeros((codes.size, g.n), dtype=bool)
    bits[:, 0] = True
    for i in range(1, g.n):
        bits[:, i] = (codes >> np.uint64(i - 1)) & np.uint64(1) > 0
    bits = bits[:-1] if codes.size > 1 else bits  # drop the full set
    cut = np.zeros(bits.shape[0])
    for a, b, wt in zip(g.u, g.v, g.w):
        cut += wt * (bits[:, a] != bits[:, b])
    vol = bits @ d
    vol_other = total_vol - vol
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.maximum(cut / vol, cut / vol_other)
    score[~np.isfinite(score)] = np.inf
    best = int(np.argmin(score))
    subset = [int(i) for i in np.nonzero(bits[best])[0]]
    return float(score[best]), subset


@dataclass
class EdgeIncidenceGraph:
    """Graph whose nodes are the edges of an original graph.

    Two edges are adjacent iff they share an endpoint; every edge is also
    adjacent to itself (self-loop).  Stored in CSR form: the incident list of
    edge ``e`` is ``indices[indptr[e]:indptr[e+1]]`` and always contains
    ``e``.
    """

    graph: Graph
    indptr: np.ndarray
    indices: np.ndarray
    deg_inc: np.ndarray

    @property
    def m(self) -> int:
        return self.graph.m

    def incident(self, e: int) -> np.ndarray:
        return self.indices[self.indptr[e]:self.indptr[e + 1]]


def edge_incidence_graph(g: Graph) -> EdgeIncidenceGraph:
    if g.m == 0:
        raise ValueError("edge incidence graph undefined for an edgeless graph")
    indptr = [0]
    indices: list[int] = []
    for e in range(g.m):
        at_u = g.incident_edges(int(g.u[e]))
        at_v = g.incident_edges(int(g.v[e]))
        # An edge sharing both endpoints with e would be a duplicate pair, so
        # the only overlap between the two lists is e itself.
        inc = np.unique(np.concatenate([at_u, at_v]))
        indices.extend(inc.tolist())
        indptr.append(len(indices))
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    deg_inc = np.diff(indptr)
    return EdgeIncidenceGraph(g, indptr, indices, deg_inc)


class DegreeBounds(NamedTuple):
    deg_star: int
    deg_star_inc: int
    lambda_upper: float


def degree_bounds(g: Graph) -> DegreeBounds:
    """Degree-based spectral bounds.

    ``deg_star`` is the maximum unweighted degree (used for the incidence
    graph bound ``2 deg* - 1``); ``lambda_upper = 2 max_i d_i`` with weighted
    degrees bounds the largest Laplacian eigenvalue (Gershgorin).
    """
    if g.n == 0 or g.m == 0:
        return DegreeBounds(0, 0, 0.0)
    deg_star = int(g.degree_counts().max())
    lambda_upper = 2.0 * float(g.degrees().max())
    return DegreeBounds(deg_star, 2 * deg_star - 1, lambda_upper)


def write_edgelist(g: Graph, path) -> None:
    """Write the plain-text edge list: ``n m`` header then ``u v w`` lines."""
    lines = [f"{g.n} {g.m}"]
    for a, b, wt in zip(g.u, g.v, g.w):
        lines.append(f"{a} {b} {float(wt)!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    """Read the edge-list format; a missing weight column defaults to 1."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    header = tokens[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: first line must be 'n m'")
    n, m = int(header[0]), int(header[1])
    edges = []
    for line in tokens[1:]:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 2:
            edges.append((int(parts[0]), int(parts[1]), 1.0))
        elif len(parts) == 3:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        else:
            raise ValueError(f"{path}: malformed edge line {line!r}")
    if len(edges) != m:
        raise ValueError(f"{path}: header promises {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)
