"""Weighted oriented graphs, graph signals and total-variation seminorms.

Every edge ``e`` carries a fixed orientation: a head ``e+`` and a tail
``e-``.  The difference operator maps a node signal ``x`` to the edge vector
``x[e+] - x[e-]``; weights never enter that operator and only appear in the
weighted l1 norms (the TV seminorm) and in capacity/clipping bounds.

Nodes are stored under compact indices ``0..N-1``.  The original ids read
from files are kept in :attr:`WeightedGraph.node_ids` so results can be
written back with the caller's labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEdge,
    InvalidEdgeSet,
    InvalidWeight,
    SelfLoop,
)

__all__ = [
    "WeightedGraph",
    "build_graph",
    "tv",
    "tv_restricted",
    "incidence_apply",
    "incidence_adjoint",
    "operator_norm_bound",
    "edge_mask",
    "as_signal",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected weighted graph with a fixed edge orientation.

    Attributes
    ----------
    heads, tails : int arrays of length ``|E|``
        Compact node indices of ``e+`` and ``e-``.
    weights : float array of length ``|E|``
        Strictly positive edge weights.
    node_ids : tuple
        Original node id for each compact index.
    """

    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    node_ids: tuple
    index: dict = field(repr=False)
    # signed adjacency in CSR form: for node i, edges adj_edges[adj_ptr[i]:adj_ptr[i+1]]
    # with sign +1 where i is the head and -1 where i is the tail
    adj_ptr: np.ndarray = field(repr=False)
    adj_edges: np.ndarray = field(repr=False)
    adj_signs: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def incident(self, i: int) -> list[tuple[int, int]]:
        """Return ``(edge, sign)`` pairs for all edges incident to node ``i``."""
        lo, hi = self.adj_ptr[i], self.adj_ptr[i + 1]
        return list(zip(self.adj_edges[lo:hi].tolist(), self.adj_signs[lo:hi].tolist()))

    def neighbors(self, i: int) -> np.ndarray:
        lo, hi = self.adj_ptr[i], self.adj_ptr[i + 1]
        e = self.adj_edges[lo:hi]
        return np.where(self.adj_signs[lo:hi] > 0, self.tails[e], self.heads[e])

    def edge_triples(self) -> list[tuple]:
        """Edges as ``(head_id, tail_id, weight)`` in original ids."""
        ids = self.node_ids
        return [
            (ids[h], ids[t], float(w))
            for h, t, w in zip(self.heads.tolist(), self.tails.tolist(), self.weights.tolist())
        ]

    def find_edge(self, u: int, v: int) -> int:
        """Index of the edge joining compact nodes ``u`` and ``v``, or -1."""
        lo, hi = self.adj_ptr[u], self.adj_ptr[u + 1]
        for e, s in zip(self.adj_edges[lo:hi], self.adj_signs[lo:hi]):
            other = self.tails[e] if s > 0 else self.heads[e]
            if other == v:
                return int(e)
        return -1

    def with_weights(self, weights: Sequence[float]) -> "WeightedGraph":
        """Same topology and orientation with a new weight vector."""
        w = np.asarray(weights, dtype=float)
        if w.shape != self.weights.shape:
            raise DimensionMismatch(f"expected {self.n_edges} weights, got {w.shape}")
        _check_weights(w)
        return _assemble(self.heads, self.tails, w, self.node_ids, self.index)

    def to_ids(self, nodes: Iterable[int]) -> list:
        return [self.node_ids[int(i)] for i in nodes]

    def from_ids(self, ids: Iterable) -> np.ndarray:
        out = []
        for v in ids:
            try:
                out.append(self.index[v])
            except KeyError:
                raise KeyError(f"node id {v!r} not in graph") from None
        return np.asarray(out, dtype=np.int64)


def _check_weights(w: np.ndarray) -> None:
    bad = ~np.isfinite(w) | (w <= 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise InvalidWeight(f"edge {k} has weight {w[k]!r}; weights must be positive and finite")


def _assemble(heads, tails, weights, node_ids, index) -> WeightedGraph:
    n = len(node_ids)
    m = len(weights)
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    ends = np.concatenate([heads, tails])
    edges = np.concatenate([np.arange(m), np.arange(m)])
    signs = np.concatenate([np.ones(m, dtype=np.int64), -np.ones(m, dtype=np.int64)])
    order = np.lexsort((edges, ends))
    counts = np.bincount(ends, minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return WeightedGraph(
        heads=_frozen(heads.copy()),
        tails=_frozen(tails.copy()),
        weights=_frozen(np.asarray(weights, dtype=float).copy()),
        node_ids=tuple(node_ids),
        index=dict(index),
        adj_ptr=_frozen(ptr),
        adj_edges=_frozen(edges[order]),
        adj_signs=_frozen(signs[order]),
    )


def build_graph(edge_triples: Iterable[Sequence], nodes: Iterable | None = None):
    """Build a graph from ``(i, j, weight)`` triples.

    Node ids are compacted to ``0..N-1`` in order of first appearance and the
    first-listed endpoint of each triple becomes the edge head.  ``nodes``
    optionally lists ids (e.g. isolated nodes) to register before the edges.

    Returns
    -------
    graph : WeightedGraph
    remap : dict
        Original id -> compact index.
    """
    index: dict = {}
    node_ids: list = []

    def _idx(v):
        if v not in index:
            index[v] = len(node_ids)
            node_ids.append(v)
        return index[v]

    for v in nodes or ():
        _idx(v)

    heads, tails, weights = [], [], []
    seen: set = set()
    for k, triple in enumerate(edge_triples):
        i, j, w = triple
        if i == j:
            raise SelfLoop(f"edge {k}: self-loop at node {i!r}")
        w = float(w)
        if not math.isfinite(w) or w <= 0:
            raise InvalidWeight(f"edge {k} ({i!r}, {j!r}) has weight {w!r}")
        h, t = _idx(i), _idx(j)
        key = (h, t) if h < t else (t, h)
        if key in seen:
            raise DuplicateEdge(f"edge {k}: pair {{{i!r}, {j!r}}} listed twice")
        seen.add(key)
        heads.append(h)
        tails.append(t)
        weights.append(w)

    graph = _assemble(heads, tails, np.asarray(weights, dtype=float), node_ids, index)
    return graph, dict(index)


def as_signal(graph: WeightedGraph, x) -> np.ndarray:
    """Validate ``x`` as a finite signal on ``graph`` and return it as floats."""
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.n_nodes,):
        raise DimensionMismatch(f"signal has shape {x.shape}, graph has {graph.n_nodes} nodes")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatch("signal contains non-finite values")
    return x


def edge_mask(graph: WeightedGraph, S) -> np.ndarray:
    """Boolean mask over edges for an edge set given as indices or a mask."""
    if isinstance(S, np.ndarray) and S.dtype == bool:
        if S.shape != (graph.n_edges,):
            raise InvalidEdgeSet(f"mask has shape {S.shape}, graph has {graph.n_edges} edges")
        return S
    idx = np.fromiter((int(e) for e in S), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= graph.n_edges):
        raise InvalidEdgeSet(f"edge index out of range 0..{graph.n_edges - 1}")
    mask = np.zeros(graph.n_edges, dtype=bool)
    mask[idx] = True
    return mask


def incidence_apply(graph: WeightedGraph, x) -> np.ndarray:
    """Unweighted edge differences ``x[e+] - x[e-]``."""
    x = as_signal(graph, x)
    return x[graph.heads] - x[graph.tails]


def incidence_adjoint(graph: WeightedGraph, d) -> np.ndarray:
    """Adjoint of :func:`incidence_apply`: signed accumulation of edge values."""
    d = np.asarray(d, dtype=float)
    if d.shape != (graph.n_edges,):
        raise DimensionMismatch(f"edge vector has shape {d.shape}, graph has {graph.n_edges} edges")
    n = graph.n_nodes
    return np.bincount(graph.heads, weights=d, minlength=n) - np.bincount(
        graph.tails, weights=d, minlength=n
    )


def tv(graph: WeightedGraph, x) -> float:
    """Total variation ``sum_e W_e |x[e+] - x[e-]|``."""
    return float(np.dot(graph.weights, np.abs(incidence_apply(graph, x))))


def tv_restricted(graph: WeightedGraph, x, S) -> float:
    """Total variation accumulated over the edge set ``S`` only."""
    mask = edge_mask(graph, S)
    d = incidence_apply(graph, x)
    return float(np.dot(graph.weights[mask], np.abs(d[mask])))


def operator_norm_bound(graph: WeightedGraph, steps: int = 50, safety: float = 1.01) -> float:
    """Upper bound on the spectral norm of the difference operator.

    Runs ``steps`` power iterations on ``D^T D`` and inflates the resulting
    estimate by ``safety``.  The all-ones vector spans the kernel of
    ``D^T D``, so the start vector is a fixed pseudo-random draw instead.  If
    the iteration has not settled, the Anderson-Morley bound
    ``max_{uv} (deg u + deg v)`` (always valid) is used.  A graph without
    edges returns 1.
    """
    if graph.n_edges == 0:
        return 1.0
    h, t, n = graph.heads, graph.tails, graph.n_nodes
    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    rho = prev = 0.0
    settled = False
    for _ in range(steps):
        d = v[h] - v[t]
        w = np.bincount(h, weights=d, minlength=n) - np.bincount(t, weights=d, minlength=n)
        rho = float(np.dot(v, w))
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        v = w / norm
        if abs(rho - prev) <= 1e-6 * rho:
            settled = True
            break
        prev = rho
    deg = np.bincount(np.concatenate([h, t]), minlength=n)
    am = math.sqrt(float(np.max(deg[h] + deg[t])))
    if not settled:
        return am
    return min(safety * math.sqrt(rho), am)
