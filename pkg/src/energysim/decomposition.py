"""Hub / low-degree partition, component typing, the hub graph and its bounded-load owner map."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import infra
from . import primitives as P
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .graph import Graph
from .radio import RadioNetwork


def hub_threshold(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 1 else 1


def component_type(size: int, attach_size: int, T: int) -> int:
    if size <= T and attach_size == 1:
        return 1
    if size <= T and attach_size == 2:
        return 2
    return 3


@dataclass(frozen=True)
class Component:
    vertices: tuple
    type: int
    attach: tuple

    @property
    def rep(self) -> int:
        return self.vertices[0]


@dataclass
class Decomposition:
    n: int
    threshold: int
    hubs: tuple
    components: list
    comp_of: np.ndarray = field(repr=False)  # -1 for hubs
    C1: dict = field(default_factory=dict)  # hub -> [component index]
    C2: dict = field(default_factory=dict)  # (u, v) with u < v -> [component index]
    gh_edges: tuple = ()
    fstar: dict = field(default_factory=dict)  # (u, v) -> owner hub

    def type3(self) -> list:
        return [i for i, c in enumerate(self.components) if c.type == 3]

    def owned_pairs(self, u: int) -> list:
        return sorted(e for e, w in self.fstar.items() if w == u)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "threshold": self.threshold,
            "hubs": list(self.hubs),
            "components": [{"vertices": list(c.vertices), "type": c.type, "attach": list(c.attach)}
                           for c in self.components],
            "gh_edges": [list(e) for e in self.gh_edges],
            "fstar": [[u, v, w] for (u, v), w in sorted(self.fstar.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def component_edges(graph: Graph, S) -> list:
    """Edges of G[S]: every edge with at least one endpoint in S."""
    inside = set(S)
    out = set()
    for x in inside:
        for y in graph.neighbors(x):
            out.add((x, y) if x < y else (y, x))
    return sorted(out)


def degeneracy_owner_map(vertices, edges) -> dict:
    """Minimum-degree peeling (smallest ID on ties); each edge goes to its earlier-peeled endpoint."""
    adj = {v: set() for v in vertices}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    alive = set(adj)
    owner = {}
    while alive:
        x = min(alive, key=lambda v: (len(adj[v] & alive), v))
        for y in adj[x] & alive:
            owner[(x, y) if x < y else (y, x)] = x
        alive.remove(x)
    return owner


def assemble(n: int, hubs, components, threshold: int) -> Decomposition:
    comp_of = np.full(n, -1, dtype=np.int64)
    C1, C2 = {}, {}
    for i, c in enumerate(components):
        comp_of[list(c.vertices)] = i
        if c.type == 1:
            C1.setdefault(c.attach[0], []).append(i)
        elif c.type == 2:
            C2.setdefault(tuple(c.attach), []).append(i)
    gh = tuple(sorted(C2))
    return Decomposition(n, threshold, tuple(sorted(hubs)), components, comp_of, C1, C2, gh,
                         degeneracy_owner_map(sorted(hubs), gh))


def decompose_offline(graph: Graph) -> Decomposition:
    n = graph.n
    T = hub_threshold(n)
    deg = graph.degrees
    is_hub = deg >= T
    hubs = np.nonzero(is_hub)[0].tolist()
    seen = is_hub.copy()
    comps = []
    for v in range(n):
        if seen[v]:
            continue
        stack, S = [v], [v]
        seen[v] = True
        att = set()
        while stack:
            x = stack.pop()
            for y in graph.neighbors(x):
                if is_hub[y]:
                    att.add(y)
                elif not seen[y]:
                    seen[y] = True
                    S.append(y)
                    stack.append(y)
        comps.append(Component(tuple(sorted(S)), component_type(len(S), len(att), T), tuple(sorted(att))))
    comps.sort(key=lambda c: c.rep)
    return assemble(n, hubs, comps, T)


# ------------------------------------------------------------------ structure checks

@dataclass
class StructureReport:
    n_hubs: int
    hub_bound: float
    n_type3: int
    type3_bound: float
    gh_edges: int
    gh_bound: float
    max_owner_load: int
    owner_bound: int
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_structure(graph: Graph, dec: Decomposition, genus: int = 0, dstar: int = 7) -> StructureReport:
    sq = math.sqrt(graph.n)
    nh = len(dec.hubs)
    hub_bound = 2 * graph.m / sq if graph.n else 0.0
    t3 = len(dec.type3())
    t3_bound = sq + 2 * nh + 4 * max(0, genus - 1)
    # simple graph of genus g: |E| <= 3|V| - 6 + 6g once |V| >= 3
    gh_bound = max(0, 3 * nh - 6 + 6 * genus) if nh >= 3 else nh * (nh - 1) / 2
    loads = {}
    for w in dec.fstar.values():
        loads[w] = loads.get(w, 0) + 1
    load = max(loads.values(), default=0)
    ok = nh <= hub_bound and t3 <= t3_bound and len(dec.gh_edges) <= gh_bound and load <= dstar
    return StructureReport(nh, hub_bound, t3, t3_bound, len(dec.gh_edges), gh_bound, load, dstar, ok)


# ------------------------------------------------------------------ distributed I0

@dataclass
class BasicInfo:
    degree_estimate: dict
    is_hub: np.ndarray  # each vertex's own verdict
    hub_neighbors: list  # per vertex, learned N(v) ∩ V_H
    neighbors: dict  # low-degree vertex -> full learned neighbor set
    comp_vertices: dict  # low-degree vertex -> learned vertex set of its component
    comp_edges: dict  # low-degree vertex -> learned edge set of G[S]
    hub_order: dict  # vertex -> learned sorted V_H
    gh_known: dict  # vertex -> learned E(G_H)

    def local_component(self, v: int, T: int) -> Optional[Component]:
        if self.is_hub[v]:
            return None
        S = tuple(sorted(self.comp_vertices.get(v, {v})))
        att = set()
        sset = set(S)
        for a, b in self.comp_edges.get(v, ()):
            for x, y in ((a, b), (b, a)):
                if x in sset and y not in sset:
                    att.add(y)
        return Component(S, component_type(len(S), len(att), T), tuple(sorted(att)))

    def mismatches(self, dec: Decomposition, graph: Graph) -> dict:
        """Counts of vertices whose learned record differs from the offline decomposition."""
        hubset = set(dec.hubs)
        bad = {"hub_flag": 0, "hub_neighbors": 0, "component": 0, "gh": 0, "hub_order": 0}
        for v in range(dec.n):
            if bool(self.is_hub[v]) != (v in hubset):
                bad["hub_flag"] += 1
            if self.hub_neighbors[v] != frozenset(u for u in graph.neighbors(v) if u in hubset):
                bad["hub_neighbors"] += 1
            if self.gh_known.get(v) != frozenset(dec.gh_edges):
                bad["gh"] += 1
            if self.hub_order.get(v) != dec.hubs:
                bad["hub_order"] += 1
            ci = dec.comp_of[v]
            if ci >= 0:
                c = dec.components[ci]
                if (tuple(sorted(self.comp_vertices.get(v, ()))) != c.vertices
                        or self.comp_edges.get(v) != frozenset(component_edges(graph, c.vertices))):
                    bad["component"] += 1
        return bad


def learn_basic_info(net: RadioNetwork, profile: ConstantsProfile = DEFAULT_PROFILE,
                     labeling_mode: str = infra.ORACLE_CHARGED) -> BasicInfo:
    """Every vertex learns its hub flag, N(v)∩V_H, its component's G[S] and E(G_H)."""
    g = net.graph
    n = g.n
    T = hub_threshold(n)
    V = list(range(n))
    sq = T
    # degree estimate (the sum includes the vertex's own value)
    est = P.sr_comm_apx(net, V, V, {v: 1 for v in V}, 1, 1.0, profile)
    deg_est = {v: est[v] - 1.0 for v in V}
    R = [v for v in V if deg_est[v] <= 2 * sq]
    got = P.sr_comm_all(net, V, R, {v: v for v in V}, 4 * sq, profile)
    nbrs = {v: frozenset(got[v]) - {v} for v in R}
    is_hub = np.ones(n, dtype=bool)
    for v in R:
        is_hub[v] = len(nbrs[v]) >= T
    hubs = [v for v in V if is_hub[v]]
    got = P.sr_comm_all(net, hubs, V, {v: v for v in hubs}, profile.hub_neighbor_mult * sq, profile)
    hub_nbrs = [frozenset(got.get(v, {})) - {v} for v in V]
    low = [v for v in V if not is_hub[v]]
    neighbors = {v: nbrs.get(v, frozenset()) for v in low}
    # per-component labeling, then everyone in S shares its two neighbor lists
    comp_vertices, comp_edges = {}, {}
    if low:
        lab = infra.build_good_labeling(net, mode=labeling_mode, scope=low, profile=profile)
        msgs = {v: (neighbors[v] - hub_nbrs[v], hub_nbrs[v]) for v in low}
        held = infra.broadcast_everyone(net, lab, msgs, profile, delta_prime=sq)
        for v in low:
            d = held.get(v, {})
            d = dict(d)
            d[v] = msgs[v]
            comp_vertices[v] = frozenset(d)
            comp_edges[v] = frozenset((min(a, b), max(a, b)) for a, (lo, hi) in d.items() for b in lo | hi)
    # agree on an ordering of V_H
    lab_all = infra.build_good_labeling(net, mode=labeling_mode, profile=profile)
    x = max(1, profile.hub_neighbor_mult * sq)
    got = infra.broadcast_x(net, lab_all, {u: u for u in hubs[:x]}, infra.MULTI_ONCE, profile, x=x)
    hub_order = {v: tuple(sorted(got.get(v, {}).keys() | ({v} if is_hub[v] else set()))) for v in V}
    # one SR-comm per hub v_i: for each type-2 S attached to v_i and w, min(N(w) ∩ S) tells w
    info = BasicInfo(deg_est, is_hub, hub_nbrs, neighbors, comp_vertices, comp_edges, hub_order, {})
    reps = {}
    for v in low:
        c = info.local_component(v, T)
        if c.type != 2:
            continue
        for a in c.attach:
            w = c.attach[1] if a == c.attach[0] else c.attach[0]
            # smallest vertex of S adjacent to w
            z = min(x for x in c.vertices if any(
                (min(x, w), max(x, w)) == e for e in comp_edges[v]))
            if z == v:
                reps.setdefault(a, set()).add(v)
    order = hub_order[hubs[0]] if hubs else ()
    pairs_at = {u: set() for u in hubs}
    for vi in order:
        snd = sorted(reps.get(vi, ()))
        heard = P.sr_comm(net, snd, hubs, {z: vi for z in snd}, profile)
        for u, (msg, _) in heard.items():
            if u != msg:
                pairs_at[u].add(msg)
    got = infra.broadcast_x(net, lab_all, {u: frozenset(pairs_at[u]) for u in hubs[:x]},
                            infra.MULTI_ONCE, profile, x=x)
    for v in V:
        d = dict(got.get(v, {}))
        if is_hub[v]:
            d[v] = frozenset(pairs_at[v])
        info.gh_known[v] = frozenset((min(u, w), max(u, w)) for u, ws in d.items() for w in ws)
    return info


def decomposition_from_knowledge(n: int, T: int, hubs, components, gh_edges) -> Decomposition:
    """Rebuild a decomposition from learned pieces (owner map recomputed locally)."""
    dec = assemble(n, hubs, sorted(components, key=lambda c: c.rep), T)
    if tuple(sorted(gh_edges)) != dec.gh_edges:
        dec.gh_edges = tuple(sorted(gh_edges))
        dec.fstar = degeneracy_owner_map(sorted(hubs), dec.gh_edges)
    return dec
