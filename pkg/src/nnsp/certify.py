"""Flow certificates for the network nullspace property.

Flows are signed edge values.  A positive ``f[e]`` moves flow from the tail
``e-`` to the head ``e+``, so the net inflow at node ``i`` is
``sum_{i = e+} f[e] - sum_{i = e-} f[e]``, which is exactly
``incidence_adjoint(graph, f)[i]``.  That net inflow is the node demand.

A sampling set passes for a partition and strength ``kappa`` when, for every
sign pattern on the boundary edges, some flow carries ``kappa * sign * W_e``
over each boundary edge, stays within ``|f[e]| <= W_e`` on every other edge
and has zero demand outside the sampling set.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import BoundaryTooLarge, EmptySamplingSet, InvalidEdge, InvalidSize
from .graph import WeightedGraph, edge_mask, incidence_adjoint, tv_restricted
from .maxflow import FlowNetwork
from .partition import Partition, boundary

__all__ = [
    "FlowAssignment",
    "Certificate",
    "NSPReport",
    "flow_feasible",
    "verify_flow",
    "certify_nnsp",
    "max_kappa",
    "empirical_nsp_check",
    "signatures",
    "sampling_array",
]

log = logging.getLogger(__name__)

SATURATION_TOL = 1e-9
CONSERVATION_TOL = 1e-7
CAPACITY_TOL = 1e-9
SIGNATURE_CAP = 30
KAPPA_TOL = 1e-3
KAPPA_CAP = 2.0**20


@dataclass(frozen=True, eq=False)
class FlowAssignment:
    """Signed flow per edge and the induced node demands (net inflow)."""

    flow: np.ndarray
    demand: np.ndarray

    def negated(self) -> "FlowAssignment":
        return FlowAssignment(-self.flow, -self.demand)


@dataclass(eq=False)
class Certificate:
    """Outcome of checking every boundary signature at one ``kappa``.

    ``witnesses`` holds ``(signature, flow)`` pairs when certified (one per
    signature up to global sign, unless witnesses were not kept);
    ``failing_signature`` holds the first refuted signature otherwise.
    """

    certified: bool
    kappa: float
    boundary: np.ndarray
    witnesses: list = field(default_factory=list)
    witness_count: int = 0
    failing_signature: np.ndarray | None = None

    @property
    def below_threshold(self) -> bool:
        # the nullspace property itself asks for kappa > 1
        return not self.kappa > 1.0

    def to_dict(self) -> dict:
        out = {
            "certified": bool(self.certified),
            "kappa": float(self.kappa),
            "boundary_size": int(self.boundary.size),
            "below_threshold": self.below_threshold,
        }
        if self.certified:
            out["witness_count"] = int(self.witness_count)
        else:
            out["failing_signature"] = [int(s) for s in self.failing_signature]
        return out


@dataclass(eq=False)
class NSPReport:
    violations: list
    checked: int


def sampling_array(graph: WeightedGraph, nodes) -> np.ndarray:
    """Sorted unique compact node indices; raises on empty or invalid input."""
    arr = np.unique(np.fromiter((int(i) for i in nodes), dtype=np.int64))
    if arr.size == 0:
        raise EmptySamplingSet("sampling set is empty")
    if arr[0] < 0 or arr[-1] >= graph.n_nodes:
        raise InvalidSize(f"sampled node out of range 0..{graph.n_nodes - 1}")
    return arr


def flow_feasible(
    graph: WeightedGraph,
    fixed: Mapping[int, float],
    free_nodes,
    tol: float = SATURATION_TOL,
) -> FlowAssignment | None:
    """Find a flow with prescribed values on ``fixed`` edges, or return None.

    Edges not in ``fixed`` obey ``|f[e]| <= W_e``; fixed edges take their
    given value regardless of weight.  Demand must vanish at every node
    outside ``free_nodes``.  All free nodes hang off an extra node with
    unbounded links, which absorbs their demands; the resulting
    circulation-with-demands problem is decided by one max-flow from a
    super-source (feeding nodes with surplus) to a super-sink (draining
    nodes with deficit).
    """
    free = sampling_array(graph, free_nodes)
    n, m = graph.n_nodes, graph.n_edges
    f = np.zeros(m)
    is_fixed = np.zeros(m, dtype=bool)
    for e, val in fixed.items():
        e = int(e)
        if not 0 <= e < m:
            raise InvalidEdge(f"fixed edge {e} out of range 0..{m - 1}")
        val = float(val)
        if not math.isfinite(val):
            raise InvalidEdge(f"fixed edge {e} has non-finite value {val!r}")
        f[e] = val
        is_fixed[e] = True

    # inflow delivered by the fixed edges; interior flow must cancel it at
    # constrained nodes, i.e. route the excess out of positive nodes
    excess = incidence_adjoint(graph, f)
    is_free = np.zeros(n, dtype=bool)
    is_free[free] = True

    net = FlowNetwork(n + 3)
    hub, src, snk = n, n + 1, n + 2
    big = float(np.abs(f).sum() + graph.weights.sum() + 1.0)
    free_list = free.tolist()
    for i in free_list:
        net.add_arc(hub, i, big)
        net.add_arc(i, hub, big)

    interior = np.flatnonzero(~is_fixed)
    arcs = []
    heads, tails, w = graph.heads, graph.tails, graph.weights
    for e in interior.tolist():
        h, t = int(heads[e]), int(tails[e])
        # arc toward the head carries positive flow
        fwd = net.add_arc(t, h, w[e])
        bwd = net.add_arc(h, t, w[e])
        arcs.append((e, fwd, bwd))

    required = 0.0
    hub_excess = float(excess[is_free].sum())
    for i in np.flatnonzero(~is_free).tolist():
        b = float(excess[i])
        if b > 0:
            net.add_arc(src, i, b)
            required += b
        elif b < 0:
            net.add_arc(i, snk, -b)
    if hub_excess > 0:
        net.add_arc(src, hub, hub_excess)
        required += hub_excess
    elif hub_excess < 0:
        net.add_arc(hub, snk, -hub_excess)

    pushed = net.max_flow(src, snk)
    if pushed < required - tol * max(1.0, required):
        return None
    for e, fwd, bwd in arcs:
        f[e] = net.flow(fwd) - net.flow(bwd)
    return FlowAssignment(f, incidence_adjoint(graph, f))


def verify_flow(
    graph: WeightedGraph,
    flow: FlowAssignment,
    fixed: Mapping[int, float],
    free_nodes,
    cons_tol: float = CONSERVATION_TOL,
    cap_tol: float = CAPACITY_TOL,
) -> bool:
    """Independent check of conservation, capacities and fixed values."""
    f = np.asarray(flow.flow, dtype=float)
    demand = incidence_adjoint(graph, f)
    constrained = np.ones(graph.n_nodes, dtype=bool)
    constrained[np.asarray(list(free_nodes), dtype=np.int64)] = False
    if np.any(np.abs(demand[constrained]) > cons_tol):
        return False
    is_fixed = np.zeros(graph.n_edges, dtype=bool)
    for e, val in fixed.items():
        is_fixed[int(e)] = True
        if f[int(e)] != float(val):
            return False
    inner = ~is_fixed
    return bool(np.all(np.abs(f[inner]) <= graph.weights[inner] + cap_tol))


def signatures(k: int):
    """Boundary sign patterns up to a global flip.

    The last sign is pinned to +1; pattern ``mask`` sets sign ``j`` to -1 when
    bit ``j`` of ``mask`` is set.  Yields ``2**(k-1)`` arrays (one empty
    array when ``k == 0``).
    """
    if k == 0:
        yield np.zeros(0, dtype=np.int64)
        return
    bits = np.arange(k - 1)
    for mask in range(2 ** (k - 1)):
        sig = np.ones(k, dtype=np.int64)
        sig[: k - 1] = np.where((mask >> bits) & 1, -1, 1)
        yield sig


def _boundary_checked(graph, part, cap):
    bnd = boundary(graph, part)
    if bnd.size > cap:
        raise BoundaryTooLarge(f"boundary has {bnd.size} edges, signature cap is {cap}")
    return bnd


def certify_nnsp(
    graph: WeightedGraph,
    part: Partition,
    samples,
    kappa: float,
    signature_cap: int = SIGNATURE_CAP,
    keep_witnesses: bool = True,
) -> Certificate:
    """Check every boundary signature at strength ``kappa``.

    Each signature ``s`` fixes ``f[e] = kappa * s_e * W_e`` on the boundary
    and asks :func:`flow_feasible` for a completion.  Negating a witness
    gives a witness for the flipped signature, so only half of the patterns
    are tried.  Stops at the first failure (lowest in enumeration order).
    """
    if not kappa > 0:
        raise InvalidSize(f"kappa must be positive, got {kappa}")
    M = sampling_array(graph, samples)
    bnd = _boundary_checked(graph, part, signature_cap)
    wb = graph.weights[bnd]
    witnesses = []
    count = 0
    for sig in signatures(bnd.size):
        vals = kappa * sig * wb
        fixed = dict(zip(bnd.tolist(), vals.tolist()))
        flow = flow_feasible(graph, fixed, M)
        if flow is None:
            log.debug("kappa=%g refuted at signature %s", kappa, sig.tolist())
            return Certificate(False, kappa, bnd, failing_signature=sig)
        count += 1
        if keep_witnesses:
            witnesses.append((sig, flow))
    return Certificate(True, kappa, bnd, witnesses=witnesses, witness_count=count)


def max_kappa(
    graph: WeightedGraph,
    part: Partition,
    samples,
    tol: float = KAPPA_TOL,
    signature_cap: int = SIGNATURE_CAP,
) -> float:
    """Largest certified ``kappa`` to within ``tol`` (0 if none, capped at 2**20).

    Doubles from 1 until a refutation brackets the threshold, then bisects.
    """
    _boundary_checked(graph, part, signature_cap)

    def ok(k: float) -> bool:
        return certify_nnsp(graph, part, samples, k, signature_cap, keep_witnesses=False).certified

    lo, hi = 0.0, 1.0
    while ok(hi):
        lo = hi
        if hi >= KAPPA_CAP:
            return KAPPA_CAP
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _components(graph: WeightedGraph, keep: np.ndarray) -> list[np.ndarray]:
    """Connected components of the subgraph induced by the ``keep`` mask."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return []
    pos = -np.ones(graph.n_nodes, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    e = keep[graph.heads] & keep[graph.tails]
    a = coo_matrix(
        (np.ones(int(e.sum())), (pos[graph.heads[e]], pos[graph.tails[e]])),
        shape=(idx.size, idx.size),
    )
    _, labels = connected_components(a, directed=False)
    return [idx[labels == k] for k in range(labels.max() + 1)]


def empirical_nsp_check(
    graph: WeightedGraph,
    S,
    samples,
    kappa: float,
    trials: int = 1000,
    seed: int = 0,
    part: Partition | None = None,
    tol: float = 1e-9,
) -> NSPReport:
    """Search the sampling-set kernel for signals with ``||u||_{E\\S} < kappa ||u||_S``.

    Tries ``trials`` Gaussian signals (zero on the sampled nodes) and, as
    adversarial candidates, the indicator of each cluster of ``part`` (if
    given) and of each connected component of the unsampled nodes, all
    zeroed on the samples.  An empty violation list is evidence, not proof.
    """
    if trials < 1:
        raise InvalidSize("trials must be at least 1")
    M = sampling_array(graph, samples)
    inside = edge_mask(graph, S)
    outside = ~inside
    unsampled = np.ones(graph.n_nodes, dtype=bool)
    unsampled[M] = False

    candidates = []
    if part is not None:
        for members in part.clusters():
            u = np.zeros(graph.n_nodes)
            u[members] = 1.0
            candidates.append(u * unsampled)
    for comp in _components(graph, unsampled):
        u = np.zeros(graph.n_nodes)
        u[comp] = 1.0
        candidates.append(u)

    rng = np.random.default_rng(seed)
    violations = []
    checked = 0
    for u in candidates:
        checked += 1
        if tv_restricted(graph, u, outside) < kappa * tv_restricted(graph, u, inside) - tol:
            violations.append(u)
    for _ in range(trials):
        u = rng.standard_normal(graph.n_nodes) * unsampled
        checked += 1
        if tv_restricted(graph, u, outside) < kappa * tv_restricted(graph, u, inside) - tol:
            violations.append(u)
    return NSPReport(violations, checked)
