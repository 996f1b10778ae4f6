"""BFS from a source with sublinear energy: randomly delayed local waves from sampled landmarks,
then a broadcast of landmark distance rows and a shortest-path solve on the landmark overlay."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from . import infra
from . import primitives as P
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .graph import Graph
from .radio import ModelConfig, RadioNetwork

UNKNOWN = -1
_MIX = 0x9E3779B97F4A7C15


def sqrt_ceil(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 1 else 1


def wave_radius(n: int, C: float) -> int:
    return max(1, math.ceil(C * math.sqrt(n)))


def start_range(n: int) -> int:
    return 2 * sqrt_ceil(n) * P.clog2(n)


def wave_capacity(n: int, cM: float) -> int:
    lg = P.clog2(n)
    return max(1, math.ceil(cM * lg / max(1.0, math.log2(lg))))


@dataclass
class LandmarkSet:
    members: tuple  # sorted, contains the source
    start: dict  # landmark -> start epoch in [0, start_range)
    seeds: dict  # landmark -> 64-bit wave seed
    radius: int
    source: int

    @property
    def size(self) -> int:
        return len(self.members)


def sample_landmarks(graph: Graph, s: int, C: float = 2.0, seed: int = 0,
                     rng: Optional[np.random.Generator] = None) -> LandmarkSet:
    n = graph.n
    rng = rng if rng is not None else np.random.default_rng(seed)
    p = min(1.0, math.log2(n) / math.sqrt(n)) if n > 1 else 1.0
    join = rng.random(n) < p
    join[s] = True
    members = tuple(np.nonzero(join)[0].tolist())
    tau = rng.integers(0, start_range(n), size=len(members))
    seeds = rng.integers(0, 2**63, size=len(members))
    return LandmarkSet(members, dict(zip(members, tau.tolist())), dict(zip(members, seeds.tolist())),
                       wave_radius(n, C), s)


@dataclass
class DistanceTable:
    rows: list  # per vertex: {landmark: distance}
    overflow: int = 0  # (receiver, epoch) pairs where more than M waves were in range
    max_waves: int = 0
    M: int = 0
    epochs: int = 0


def _closed_adjacency(graph: Graph):
    A = sparse.csr_matrix((np.ones(2 * graph.m, dtype=np.int32), graph.indices, graph.indptr),
                          shape=(graph.n, graph.n))
    return A + sparse.identity(graph.n, dtype=np.int32, format="csr")


def local_bfs_phase(net: RadioNetwork, lm: LandmarkSet, profile: ConstantsProfile = DEFAULT_PROFILE,
                    trace: Optional[list] = None) -> DistanceTable:
    g = net.graph
    n = g.n
    M = wave_capacity(n, profile.bfs_cM)
    h = start_range(n) + lm.radius
    rows = [dict() for _ in range(n)]
    for u in lm.members:
        rows[u][u] = 0
    frontier = {}  # landmark -> vertices that learned it last epoch
    by_start = {}
    for u, t in lm.start.items():
        by_start.setdefault(t, []).append(u)
    Ahat = _closed_adjacency(g)
    everyone = np.arange(n)
    table = DistanceTable(rows, M=M, epochs=h)
    for x in range(h):
        for u in by_start.get(x, ()):
            frontier[u] = [u]
        holdings = {}
        for u, vs in frontier.items():
            for v in vs:
                holdings.setdefault(v, set()).add(u)
        if holdings:
            waves = sorted(frontier)
            widx = {u: j for j, u in enumerate(waves)}
            r, c = [], []
            for v, us in holdings.items():
                for u in us:
                    r.append(v)
                    c.append(widx[u])
            inc = sparse.csr_matrix((np.ones(len(r), dtype=np.int32), (r, c)), shape=(n, len(waves)))
            seen = (Ahat @ inc) > 0
            per_v = np.asarray(seen.sum(axis=1)).ravel()
            table.max_waves = max(table.max_waves, int(per_v.max()))
            table.overflow += int((per_v > M).sum())
        seeds = {u: (lm.seeds[u] + x * _MIX) % (1 << 64) for u in frontier}
        got = P.sr_comm_multi(net, holdings, everyone, seeds, M, profile, trace=trace)
        nxt = {}
        for v, us in got.items():
            for u in us:
                if u not in rows[v]:
                    rows[v][u] = x - lm.start[u] + 1
                    nxt.setdefault(u, []).append(v)
        frontier = {u: vs for u, vs in nxt.items() if x + 1 - lm.start[u] < lm.radius}
    return table


@dataclass
class Resolution:
    dist: np.ndarray  # UNKNOWN where no answer was possible
    overlay_unreached: int  # landmarks the overlay could not connect to the source (vertex view)
    groups: int


def gather_and_resolve(net: RadioNetwork, lab: infra.GoodLabeling, lm: LandmarkSet, table: DistanceTable,
                       profile: ConstantsProfile = DEFAULT_PROFILE) -> Resolution:
    g = net.graph
    n = g.n
    lmset = set(lm.members)
    x = max(len(lm.members), math.ceil(2 * math.sqrt(n) * math.log2(max(n, 2))))
    published = {u: tuple(sorted((w, d) for w, d in table.rows[u].items() if w in lmset))
                 for u in lm.members}
    got = infra.broadcast_x(net, lab, published, infra.MULTI_ONCE, profile, x=x)
    dist = np.full(n, UNKNOWN, dtype=np.int64)
    groups = {}
    for v in range(n):
        known = dict(got.get(v, {}))
        if v in lmset:
            known[v] = published[v]
        groups.setdefault(frozenset(known.items()), []).append(v)
    unreached = 0
    s = lm.source
    row_v = np.fromiter((v for v in range(n) for _ in table.rows[v]), dtype=np.int64)
    row_u = np.fromiter((u for v in range(n) for u in table.rows[v]), dtype=np.int64)
    row_d = np.fromiter((d for v in range(n) for d in table.rows[v].values()), dtype=float)
    in_group = np.empty(n, dtype=bool)
    for key, vs in groups.items():
        known = dict(key)
        nodes = sorted(set(known) | {w for row in known.values() for w, _ in row} | {s})
        idx = {u: i for i, u in enumerate(nodes)}
        r, c, w = [], [], []
        for u, row in known.items():
            for u2, d in row:
                if u2 != u:
                    r.append(idx[u])
                    c.append(idx[u2])
                    w.append(d)
        W = sparse.csr_matrix((np.asarray(w, dtype=float), (r, c)), shape=(len(nodes), len(nodes)))
        D = dijkstra(W, directed=False, indices=idx[s])
        unreached += int(np.isinf(D[[idx[u] for u in known]]).sum()) * len(vs)
        du = np.full(n, math.inf)
        du[nodes] = D
        in_group[:] = False
        in_group[vs] = True
        sel = in_group[row_v]
        best = np.full(n, math.inf)
        np.minimum.at(best, row_v[sel], row_d[sel] + du[row_u[sel]])
        if in_group[s]:
            best[s] = 0
        ok = in_group & np.isfinite(best)
        dist[ok] = best[ok].astype(np.int64)
    return Resolution(dist, unreached, len(groups))


# ------------------------------------------------------------------ offline lemma checks

def _bfs(graph: Graph, s: int, limit: Optional[int] = None) -> np.ndarray:
    d = np.full(graph.n, -1, dtype=np.int64)
    d[s] = 0
    q = deque([s])
    while q:
        a = q.popleft()
        if limit is not None and d[a] >= limit:
            continue
        for b in graph.neighbors(a):
            if d[b] < 0:
                d[b] = d[a] + 1
                q.append(b)
    return d


def hitting_set_check(graph: Graph, s: int, members, window: int) -> bool:
    """Every t has a shortest s-t path with no `window` consecutive vertices outside `members`."""
    d = _bfs(graph, s)
    inU = np.zeros(graph.n, dtype=bool)
    inU[list(members)] = True
    order = np.argsort(d, kind="stable")
    run = np.full(graph.n, np.iinfo(np.int64).max // 2, dtype=np.int64)
    for v in order.tolist():
        if d[v] < 0:
            continue
        if v == s:
            run[v] = 0 if inU[v] else 1
        else:
            best = min((run[p] for p in graph.neighbors(v) if d[p] == d[v] - 1), default=run[v])
            run[v] = 0 if inU[v] else best + 1
        if run[v] >= window:
            run[v] = np.iinfo(np.int64).max // 2
    return bool(np.all(run[d >= 0] < window))


def congestion_check(graph: Graph, lm: LandmarkSet) -> int:
    """Max over (v, epoch) of the number of waves with start + dist(u, v) = epoch within the radius."""
    members = list(lm.members)
    if not members or graph.m == 0:
        return 1 if members else 0
    A = sparse.csr_matrix((np.ones(2 * graph.m), graph.indices, graph.indptr), shape=(graph.n, graph.n))
    D = dijkstra(A, indices=members, unweighted=True, limit=lm.radius)
    ui, v = np.nonzero(np.isfinite(D))
    epoch = np.asarray([lm.start[u] for u in members], dtype=np.int64)[ui] + D[ui, v].astype(np.int64)
    _, counts = np.unique(v * (int(epoch.max()) + 1) + epoch, return_counts=True)
    return int(counts.max())


# ------------------------------------------------------------------ full protocol

@dataclass
class BfsResult:
    dist: np.ndarray
    rounds: int
    max_energy: int
    energy: np.ndarray = field(repr=False)
    stage_energy: dict = field(default_factory=dict)
    landmarks: int = 0
    M: int = 0
    max_waves: int = 0
    overflow: int = 0
    max_congestion: int = 0
    hitting_ok: bool = True
    overlay_unreached: int = 0
    bytes_sent: int = 0


def bfs(graph: Graph, s: int, model: ModelConfig, profile: ConstantsProfile = DEFAULT_PROFILE, *,
        labeling_mode: str = infra.ORACLE_CHARGED, check_lemmas: bool = True) -> BfsResult:
    if not 0 <= s < graph.n:
        raise ValueError(f"source {s} out of range")
    net = RadioNetwork(graph, model)
    lm = sample_landmarks(graph, s, profile.bfs_C, rng=net.rng)
    table = local_bfs_phase(net, lm, profile)
    e1 = net.ledger.energy().copy()
    lab = infra.build_good_labeling(net, root=s, mode=labeling_mode, profile=profile)
    e2 = net.ledger.energy().copy()
    res = gather_and_resolve(net, lab, lm, table, profile)
    e3 = net.ledger.energy()
    out = BfsResult(res.dist, net.ledger.round_count, int(e3.max()), e3.copy(),
                    {"local_waves": int(e1.max()), "labeling": int((e2 - e1).max()),
                     "gather": int((e3 - e2).max())},
                    lm.size, table.M, table.max_waves, table.overflow,
                    overlay_unreached=res.overlay_unreached, bytes_sent=net.bytes_sent)
    if check_lemmas:
        out.max_congestion = congestion_check(graph, lm)
        out.hitting_ok = hitting_set_check(graph, s, lm.members, lm.radius)
    return out
