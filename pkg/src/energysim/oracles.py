"""Reference answers: plain-Python BFS, minimum-cut-phase contraction, augmenting paths.

Nothing here is imported by the pipelines it is used to check.
"""
from __future__ import annotations

import heapq
from collections import deque

import numpy as np

INF = -1


def _adj(graph):
    return [list(graph.neighbors(v)) for v in range(graph.n)]


def bfs_oracle(graph, s: int) -> list:
    dist = [INF] * graph.n
    dist[s] = 0
    q = deque([s])
    while q:
        x = q.popleft()
        for y in graph.neighbors(x):
            if dist[y] == INF:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def all_pairs_oracle(graph) -> np.ndarray:
    return np.array([bfs_oracle(graph, s) for s in range(graph.n)], dtype=np.int64).reshape(graph.n, graph.n)


def diameter_oracle(graph) -> int:
    if graph.n <= 1:
        return 0
    d = all_pairs_oracle(graph)
    if (d < 0).any():
        raise ValueError("graph is disconnected")
    return int(d.max())


def weighted_global_cut(n: int, weights: dict) -> int:
    """Minimum-cut-phase contraction on a weighted graph {(u, v): w}."""
    if n < 2:
        raise ValueError("need at least two vertices")
    adj = [dict() for _ in range(n)]
    for (u, v), c in weights.items():
        if u == v or c == 0:
            continue
        adj[u][v] = adj[u].get(v, 0) + c
        adj[v][u] = adj[v].get(u, 0) + c
    alive = set(range(n))
    best = None
    while len(alive) > 1:
        start = min(alive)
        conn = {start: 0}
        heap = [(0, start)]
        done = set()
        order = []
        last_key = 0
        while heap:
            negk, x = heapq.heappop(heap)
            if x in done or -negk != conn[x]:
                continue
            done.add(x)
            order.append(x)
            last_key = conn[x]
            for y, c in adj[x].items():
                if y not in done:
                    conn[y] = conn.get(y, 0) + c
                    heapq.heappush(heap, (-conn[y], y))
        if len(order) < len(alive):
            return 0  # disconnected
        s, t = order[-2], order[-1]
        best = last_key if best is None else min(best, last_key)
        for y, c in adj[t].items():
            if y == s:
                continue
            adj[s][y] = adj[s].get(y, 0) + c
            adj[y][s] = adj[s][y]
            del adj[y][t]
        adj[s].pop(t, None)
        adj[t] = {}
        alive.remove(t)
    return int(best)


def global_cut_oracle(graph) -> int:
    return weighted_global_cut(graph.n, {e: 1 for e in graph.edges})


def enumerate_cuts(graph):
    """Yield (side_set, value) over all 2-partitions with vertex 0 on the first side."""
    n = graph.n
    for mask in range((1 << (n - 1)) - 1):
        side = {0} | {i + 1 for i in range(n - 1) if mask >> i & 1}
        if len(side) == n:
            continue
        val = sum(1 for u, v in graph.edges if (u in side) != (v in side))
        yield frozenset(side), val


def global_cut_enumeration(graph) -> int:
    if graph.n > 16:
        raise ValueError("enumeration oracle is for n <= 16")
    return min(v for _, v in enumerate_cuts(graph))


def st_cut_oracle(graph, s: int, t: int) -> int:
    """Unit-capacity augmenting paths (BFS), each undirected edge two arcs of capacity 1."""
    if s == t:
        raise ValueError("s and t must differ")
    if bfs_oracle(graph, s)[t] == INF:
        raise ValueError("s and t are disconnected")
    cap = {}
    for u, v in graph.edges:
        cap[(u, v)] = 1
        cap[(v, u)] = 1
    adj = _adj(graph)
    flow = 0
    while True:
        prev = {s: None}
        q = deque([s])
        while q and t not in prev:
            x = q.popleft()
            for y in adj[x]:
                if y not in prev and cap[(x, y)] > 0:
                    prev[y] = x
                    q.append(y)
        if t not in prev:
            return flow
        y = t
        while prev[y] is not None:
            x = prev[y]
            cap[(x, y)] -= 1
            cap[(y, x)] += 1
            y = x
        flow += 1


def arboricity_peeling(graph) -> int:
    """Number of spanning forests peeled off until no edge remains (upper bound on arboricity)."""
    remaining = set(graph.edges)
    forests = 0
    while remaining:
        parent = list(range(graph.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        taken = []
        for u, v in sorted(remaining):
            a, b = find(u), find(v)
            if a != b:
                parent[a] = b
                taken.append((u, v))
        remaining.difference_update(taken)
        forests += 1
    return forests


def brute_force_components(graph, threshold: int):
    """Components of the low-degree vertices, by repeated BFS over a fresh adjacency."""
    low = [v for v in range(graph.n) if graph.degree(v) < threshold]
    lowset = set(low)
    seen, comps = set(), []
    for v in low:
        if v in seen:
            continue
        comp, q = [], [v]
        seen.add(v)
        while q:
            x = q.pop()
            comp.append(x)
            for y in graph.neighbors(x):
                if y in lowset and y not in seen:
                    seen.add(y)
                    q.append(y)
        comps.append(sorted(comp))
    return comps

