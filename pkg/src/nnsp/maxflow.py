"""Dinic max-flow on real-valued capacities."""

from __future__ import annotations

from collections import deque

__all__ = ["FlowNetwork"]


class FlowNetwork:
    """Directed network with float capacities solved by Dinic's algorithm.

    Arcs are stored in insertion order with their reverse arc at ``index ^ 1``,
    so repeated runs on identically built networks give identical flows.
    Residual capacities at or below ``eps`` count as saturated.
    """

    def __init__(self, n: int, eps: float = 1e-12):
        self.n = n
        self.eps = eps
        self.head: list[int] = []
        self.cap: list[float] = []
        self.orig: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add_node(self) -> int:
        self.adj.append([])
        self.n += 1
        return self.n - 1

    def add_arc(self, u: int, v: int, cap: float) -> int:
        """Add arc ``u -> v``; returns its index (use with :meth:`flow`)."""
        k = len(self.head)
        self.head += [v, u]
        self.cap += [float(cap), 0.0]
        self.orig += [float(cap), 0.0]
        self.adj[u].append(k)
        self.adj[v].append(k + 1)
        return k

    def flow(self, arc: int) -> float:
        return self.orig[arc] - self.cap[arc]

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        head, cap, eps = self.head, self.cap, self.eps
        while queue:
            u = queue.popleft()
            for k in self.adj[u]:
                v = head[k]
                if level[v] < 0 and cap[k] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _blocking_flow(self, s: int, t: int, level: list[int]) -> float:
        head, cap, adj, eps = self.head, self.cap, self.adj, self.eps
        it = [0] * self.n
        total = 0.0
        while True:
            # iterative DFS for one augmenting path in the level graph
            path: list[int] = []
            u = s
            while u != t:
                arcs = adj[u]
                while it[u] < len(arcs):
                    k = arcs[it[u]]
                    v = head[k]
                    if cap[k] > eps and level[v] == level[u] + 1:
                        break
                    it[u] += 1
                if it[u] == len(arcs):
                    if u == s:
                        return total
                    level[u] = -1  # dead end
                    k = path.pop()
                    u = head[k ^ 1]
                    it[u] += 1
                    continue
                k = arcs[it[u]]
                path.append(k)
                u = head[k]
            push = min(cap[k] for k in path)
            for k in path:
                cap[k] -= push
                cap[k ^ 1] += push
            total += push

    def max_flow(self, s: int, t: int) -> float:
        total = 0.0
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            total += self._blocking_flow(s, t, level)
