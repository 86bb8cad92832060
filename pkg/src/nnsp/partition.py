"""Partitions into clusters, piecewise-constant signals and benchmark graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    DuplicateCenter,
    IndivisibleClusterSize,
    InvalidSize,
    PartitionMismatch,
)
from .graph import WeightedGraph, as_signal, build_graph, incidence_apply

__all__ = [
    "Partition",
    "boundary",
    "clustered_signal",
    "geodesic_partition",
    "best_clustered_tv",
    "chain_graph_experiment",
    "two_cluster_chain",
    "hop_distances",
]


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every node (compact index) to a cluster ``0..K-1``."""

    cluster_of: np.ndarray
    n_clusters: int

    def __post_init__(self):
        labels = np.asarray(self.cluster_of, dtype=np.int64)
        if labels.ndim != 1:
            raise PartitionMismatch("cluster labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_clusters):
            raise PartitionMismatch(f"cluster ids must lie in 0..{self.n_clusters - 1}")
        if np.unique(labels).size != self.n_clusters:
            raise PartitionMismatch("every cluster id must be used by at least one node")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "cluster_of", labels)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """Compact arbitrary cluster labels; cluster ids follow sorted label order."""
        uniq, inv = np.unique(np.asarray(labels), return_inverse=True)
        return cls(inv.astype(np.int64), len(uniq))

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of == k)

    def clusters(self) -> list[np.ndarray]:
        return [self.members(k) for k in range(self.n_clusters)]

    def check(self, graph: WeightedGraph) -> None:
        if self.cluster_of.shape != (graph.n_nodes,):
            raise PartitionMismatch(
                f"partition covers {self.cluster_of.size} nodes, graph has {graph.n_nodes}"
            )


def boundary(graph: WeightedGraph, part: Partition) -> np.ndarray:
    """Indices (ascending) of the edges joining different clusters."""
    part.check(graph)
    c = part.cluster_of
    return np.flatnonzero(c[graph.heads] != c[graph.tails])


def clustered_signal(graph: WeightedGraph, part: Partition, coeffs: Sequence[float]) -> np.ndarray:
    """Piecewise-constant signal taking value ``coeffs[k]`` on cluster ``k``."""
    part.check(graph)
    a = np.asarray(coeffs, dtype=float)
    if a.shape != (part.n_clusters,):
        raise DimensionMismatch(f"{a.size} coefficients for {part.n_clusters} clusters")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("coefficients must be finite")
    return a[part.cluster_of]


def hop_distances(graph: WeightedGraph, source: int) -> np.ndarray:
    """Unweighted BFS distances from ``source``; unreachable nodes get -1."""
    dist = np.full(graph.n_nodes, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    ptr, edges, signs = graph.adj_ptr, graph.adj_edges, graph.adj_signs
    heads, tails = graph.heads, graph.tails
    while queue:
        u = queue.popleft()
        for k in range(ptr[u], ptr[u + 1]):
            e = edges[k]
            v = tails[e] if signs[k] > 0 else heads[e]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def geodesic_partition(graph: WeightedGraph, centers: Sequence[int]) -> Partition:
    """Assign each node to the hop-nearest center; ties go to the earlier center.

    ``centers`` are compact node indices; center ``k`` defines cluster ``k``.
    """
    centers = [int(c) for c in centers]
    if not centers:
        raise InvalidSize("at least one cluster center is required")
    if len(set(centers)) != len(centers):
        raise DuplicateCenter(f"cluster centers must be distinct: {centers}")
    for c in centers:
        if not 0 <= c < graph.n_nodes:
            raise InvalidSize(f"center {c} out of range")
    best = np.full(graph.n_nodes, np.iinfo(np.int64).max, dtype=np.int64)
    label = np.full(graph.n_nodes, -1, dtype=np.int64)
    for k, c in enumerate(centers):
        d = hop_distances(graph, c)
        closer = (d >= 0) & (d < best)
        best[closer] = d[closer]
        label[closer] = k
    if (label < 0).any():
        raise DisconnectedGraph(f"{int((label < 0).sum())} nodes are unreachable from every center")
    return Partition(label, len(centers))


def _weighted_median(targets: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(targets, kind="stable")
    t, w = targets[order], weights[order]
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(t[min(k, len(t) - 1)])


def _boundary_objective(d, w, cu, cv, a) -> float:
    return float(np.dot(w, np.abs(d - (a[cu] - a[cv]))))


def best_clustered_tv(
    graph: WeightedGraph,
    part: Partition,
    x,
    tol: float = 1e-9,
    exact: bool = True,
) -> tuple[np.ndarray, float]:
    """Best piecewise-constant TV approximation of ``x``.

    Minimizes ``|| x - sum_C a_C 1_C ||_TV`` over the cluster coefficients
    ``a``.  Interior edges contribute a constant; each boundary edge
    contributes ``W_e |d_e - (a_{C(e+)} - a_{C(e-)})|``.  Cyclic coordinate
    descent sets one coefficient at a time to the weighted median of its
    targets; coefficient 0 is pinned to the mean of ``x`` over cluster 0.

    Coordinate descent on a coupled l1 objective can stall away from the
    minimum when the cluster adjacency has cycles, so with ``exact=True`` the
    descent result is polished by the equivalent linear program and the
    better of the two is returned.

    Returns
    -------
    a : coefficient array of length ``K``
    value : the minimal TV
    """
    part.check(graph)
    x = as_signal(graph, x)
    K = part.n_clusters
    c = part.cluster_of
    d_all = incidence_apply(graph, x)
    interior = c[graph.heads] == c[graph.tails]
    base = float(np.dot(graph.weights[interior], np.abs(d_all[interior])))

    bnd = ~interior
    d = d_all[bnd]
    w = graph.weights[bnd]
    cu = c[graph.heads][bnd]
    cv = c[graph.tails][bnd]

    a = np.zeros(K)
    a[0] = float(x[c == 0].mean())
    if d.size == 0:
        return a, base

    # per cluster: boundary edges where it is the head cluster / tail cluster
    as_head = [np.flatnonzero(cu == k) for k in range(K)]
    as_tail = [np.flatnonzero(cv == k) for k in range(K)]

    value = _boundary_objective(d, w, cu, cv, a)
    for _ in range(10 * K):
        before = value
        for k in range(1, K):
            hi, ti = as_head[k], as_tail[k]
            if hi.size + ti.size == 0:
                continue
            # head side: |a_k - (d_e + a_tail)|, tail side: |a_k - (a_head - d_e)|
            targets = np.concatenate([d[hi] + a[cv[hi]], a[cu[ti]] - d[ti]])
            weights = np.concatenate([w[hi], w[ti]])
            a[k] = _weighted_median(targets, weights)
        value = _boundary_objective(d, w, cu, cv, a)
        if before - value < tol:
            break

    if exact and K > 2:
        a_lp = _boundary_lp(d, w, cu, cv, K, a[0])
        if a_lp is not None:
            v_lp = _boundary_objective(d, w, cu, cv, a_lp)
            if v_lp < value:
                a, value = a_lp, v_lp
    return a, base + value


def _boundary_lp(d, w, cu, cv, K, a0):
    """Solve min sum w|d - (a_u - a_v)| with a_0 fixed, as an LP."""
    from scipy.optimize import linprog

    m = d.size
    # variables: a_1..a_{K-1}, t_1..t_m ; minimize w.t with t >= |d - (a_u - a_v)|
    nvar = (K - 1) + m
    cost = np.concatenate([np.zeros(K - 1), w])
    rows = np.zeros((2 * m, nvar))
    rhs = np.zeros(2 * m)
    for e in range(m):
        r = np.zeros(nvar)
        shift = d[e]
        if cu[e] > 0:
            r[cu[e] - 1] += 1.0
        else:
            shift -= a0
        if cv[e] > 0:
            r[cv[e] - 1] -= 1.0
        else:
            shift += a0
        # residual = shift - r.a ; need  t >= residual and t >= -residual
        rows[2 * e] = -r
        rows[2 * e, K - 1 + e] = -1.0
        rhs[2 * e] = -shift
        rows[2 * e + 1] = r
        rows[2 * e + 1, K - 1 + e] = -1.0
        rhs[2 * e + 1] = shift
    bounds = [(None, None)] * (K - 1) + [(0, None)] * m
    res = linprog(cost, A_ub=rows, b_ub=rhs, bounds=bounds, method="highs")
    if not res.success:
        return None
    return np.concatenate([[a0], res.x[: K - 1]])


def chain_graph_experiment(
    n: int = 100,
    clusters: int = 10,
    w_in: float = 4.0,
    w_out: float = 2.0,
    coeffs: Sequence[float] | None = None,
) -> tuple[WeightedGraph, Partition, np.ndarray]:
    """Chain ``1 - 2 - ... - n`` split into ``clusters`` consecutive blocks.

    Node ids are ``1..n`` with edges ``(i, i+1)``.  Default coefficients
    alternate 1, 5, 1, 5, ...
    """
    if n < 1 or clusters < 1 or n % clusters:
        raise IndivisibleClusterSize(f"{n} nodes cannot be split into {clusters} equal clusters")
    size = n // clusters
    block = [(i - 1) // size for i in range(1, n + 1)]
    triples = [
        (i, i + 1, w_in if block[i - 1] == block[i] else w_out) for i in range(1, n)
    ]
    graph, _ = build_graph(triples, nodes=range(1, n + 1))
    part = Partition(np.asarray(block, dtype=np.int64), clusters)
    if coeffs is None:
        coeffs = [1.0 if k % 2 == 0 else 5.0 for k in range(clusters)]
    return graph, part, clustered_signal(graph, part, coeffs)


def two_cluster_chain(n: int, delta: float) -> tuple[WeightedGraph, Partition, np.ndarray]:
    """Two-cluster chain: unit weights inside, weight ``1/delta`` on the middle edge.

    The signal is 1 on nodes ``1..n/2`` and 2 on ``n/2+1..n``.
    """
    if n < 4 or n % 2:
        raise InvalidSize(f"n must be an even integer >= 4, got {n}")
    if not delta > 0:
        raise InvalidSize(f"delta must be positive, got {delta}")
    half = n // 2
    triples = [(i, i + 1, 1.0 / delta if i == half else 1.0) for i in range(1, n)]
    graph, _ = build_graph(triples, nodes=range(1, n + 1))
    part = Partition(np.asarray([0] * half + [1] * half, dtype=np.int64), 2)
    return graph, part, clustered_signal(graph, part, [1.0, 2.0])
