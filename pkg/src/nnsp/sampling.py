"""Sampling-set construction strategies."""

from __future__ import annotations

import logging

import numpy as np

from .errors import InvalidBudget, InvalidSize
from .graph import WeightedGraph
from .partition import Partition, boundary

__all__ = ["per_cluster", "boundary_adjacent", "uniform_random", "GENERATOR"]

log = logging.getLogger(__name__)

# recorded in experiment metadata so random draws can be reproduced
GENERATOR = "numpy.random.Generator(PCG64)"


def per_cluster(part: Partition, rule: str = "middle", graph: WeightedGraph | None = None) -> np.ndarray:
    """One node per cluster.

    ``middle`` takes the lower median and ``lowest-id`` the minimum of the
    cluster's node ids.  Ids are the original ids when ``graph`` is given,
    compact indices otherwise.  Returns sorted compact indices.
    """
    if rule not in ("middle", "lowest-id"):
        raise InvalidSize(f"unknown rule {rule!r}")
    picks = []
    for members in part.clusters():
        if graph is not None:
            keys = [graph.node_ids[i] for i in members]
            order = sorted(range(len(members)), key=lambda k: keys[k])
            members = members[order]
        if rule == "middle":
            picks.append(int(members[(len(members) - 1) // 2]))
        else:
            picks.append(int(members[0]))
    return np.asarray(sorted(picks), dtype=np.int64)


def boundary_adjacent(graph: WeightedGraph, part: Partition) -> np.ndarray:
    """All endpoints of boundary edges (empty, with a warning, for one cluster)."""
    bnd = boundary(graph, part)
    if bnd.size == 0:
        log.warning("partition has no boundary edges; boundary-adjacent sampling set is empty")
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate([graph.heads[bnd], graph.tails[bnd]]))


def uniform_random(n_nodes: int, m: int, seed: int) -> np.ndarray:
    """``m`` distinct node indices drawn uniformly without replacement."""
    if not 1 <= m <= n_nodes:
        raise InvalidBudget(f"budget {m} outside 1..{n_nodes}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_nodes, size=m, replace=False)).astype(np.int64)
