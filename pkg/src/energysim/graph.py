"""Immutable undirected simple graph with CSR adjacency."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple  # sorted tuple of (u, v) with u < v
    adjacency: tuple = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, *, require_connected: bool = False) -> "Graph":
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
        es = tuple(sorted(seen))
        adj = [[] for _ in range(n)]
        for u, v in es:
            adj[u].append(v)
            adj[v].append(u)
        g = cls(n, es, tuple(tuple(sorted(a)) for a in adj))
        if require_connected and not g.is_connected():
            raise GraphError("graph is not connected")
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)

    @cached_property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def indptr(self) -> np.ndarray:
        out = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=out[1:])
        return out

    @cached_property
    def indices(self) -> np.ndarray:
        if self.m == 0:
            return np.zeros(0, dtype=np.int64)
        return np.fromiter((w for a in self.adjacency for w in a), dtype=np.int64, count=2 * self.m)

    @cached_property
    def edge_rows(self) -> np.ndarray:
        """Owner vertex of each entry of `indices`."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    def neighbor_count(self, flags: np.ndarray) -> np.ndarray:
        """Per vertex, number of neighbors w with flags[w] set."""
        if self.m == 0:
            return np.zeros(self.n, dtype=np.int64)
        w = np.asarray(flags, dtype=np.int64)[self.indices]
        return np.bincount(self.edge_rows, weights=w, minlength=self.n).astype(np.int64)

    @cached_property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_set

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = bytearray(self.n)
        seen[0] = 1
        q = deque([0])
        count = 1
        while q:
            x = q.popleft()
            for y in self.adjacency[x]:
                if not seen[y]:
                    seen[y] = 1
                    count += 1
                    q.append(y)
        return count == self.n

    def induced(self, vertices: Iterable) -> "Graph":
        """Subgraph induced on `vertices`, relabeled 0..k-1 in sorted ID order."""
        vs = sorted(set(int(x) for x in vertices))
        idx = {v: i for i, v in enumerate(vs)}
        es = [(idx[u], idx[v]) for u, v in self.edges if u in idx and v in idx]
        return Graph.from_edges(len(vs), es)

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}
