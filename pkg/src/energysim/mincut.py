"""Exact global minimum cut and approximate s-t minimum cut through the hub decomposition."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from . import infra
from . import primitives as P
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .decomposition import (Decomposition, component_edges, decompose_offline, degeneracy_owner_map,
                            hub_threshold, learn_basic_info)
from .graph import Graph
from .radio import ModelConfig, RadioNetwork

INF = math.inf


# ------------------------------------------------------------------ cut values on small graphs

def _nx(edges, weights=None) -> nx.Graph:
    h = nx.Graph()
    for i, (a, b) in enumerate(edges):
        w = 1 if weights is None else weights[i]
        if h.has_edge(a, b):
            h[a][b]["weight"] += w
        else:
            h.add_edge(a, b, weight=w)
    return h


def weighted_min_cut(h: nx.Graph) -> float:
    if h.number_of_nodes() < 2:
        return INF
    if not nx.is_connected(h):
        return 0
    return nx.stoer_wagner(h, weight="weight")[0]


def weighted_st_cut(h: nx.Graph, s, t) -> float:
    d = nx.DiGraph()
    for a, b, w in h.edges(data="weight"):
        d.add_edge(a, b, capacity=w)
        d.add_edge(b, a, capacity=w)
    return nx.maximum_flow_value(d, s, t)


def global_mincut_offline(graph: Graph) -> int:
    if graph.n < 2:
        raise ValueError("need at least two vertices")
    return int(weighted_min_cut(_nx(graph.edges)))


def st_mincut_offline(graph: Graph, s: int, t: int) -> int:
    if s == t:
        raise ValueError("s and t must differ")
    return int(weighted_st_cut(_nx(graph.edges), s, t))


def cut_c(edges) -> int:
    """Minimum cut of G[S]."""
    return int(weighted_min_cut(_nx(edges)))


def cut_c1(edges, u, v) -> int:
    """u-v minimum cut of G[S]."""
    return int(weighted_st_cut(_nx(edges), u, v))


def cut_c2(edges, u, v) -> int:
    """Minimum cut of G[S] over cuts keeping u and v on one side (u, v merged)."""
    merged = [(u if a == v else a, u if b == v else b) for a, b in edges]
    return int(weighted_min_cut(_nx([e for e in merged if e[0] != e[1]])))


# ------------------------------------------------------------------ parameters

@dataclass
class CutParams:
    c: dict  # type-1 component index -> c(S)
    c1: dict  # type-2 component index -> c'(S)
    c2: dict  # type-2 component index -> c''(S)
    hub_min_c: dict  # hub -> min over C(u) of c(S)
    pair_min_c2: dict  # pair -> min over C(u,v) of c''(S)
    pair_sum_c1: dict  # pair -> sum over C(u,v) of c'(S), uncapped

    def capped(self, kstar: int) -> dict:
        return {p: min(kstar, s) for p, s in self.pair_sum_c1.items()}


def cut_params_offline(graph: Graph, dec: Decomposition) -> CutParams:
    c, c1, c2 = {}, {}, {}
    for i, comp in enumerate(dec.components):
        es = component_edges(graph, comp.vertices)
        if comp.type == 1:
            c[i] = cut_c(es)
        elif comp.type == 2:
            u, v = comp.attach
            c1[i] = cut_c1(es, u, v)
            c2[i] = cut_c2(es, u, v)
    hub_min = {u: min(c[i] for i in idxs) for u, idxs in dec.C1.items()}
    pmin = {p: min(c2[i] for i in idxs) for p, idxs in dec.C2.items()}
    psum = {p: sum(c1[i] for i in idxs) for p, idxs in dec.C2.items()}
    return CutParams(c, c1, c2, hub_min, pmin, psum)


# ------------------------------------------------------------------ reduction graphs

def reduction_graph(graph: Graph, dec: Decomposition, pair_weights: dict, keep=()) -> nx.Graph:
    """Hubs, type-3 components and the components in `keep` with all their edges;
    each pair in `pair_weights` becomes one weighted hub-hub edge (merged with any direct edge)."""
    inside = set(dec.hubs)
    for i in dec.type3():
        inside |= set(dec.components[i].vertices)
    for i in keep:
        inside |= set(dec.components[i].vertices)
    es = [(a, b) for a, b in graph.edges if a in inside and b in inside]
    ws = [1] * len(es)
    for (u, v), w in sorted(pair_weights.items()):
        if w > 0:
            es.append((u, v))
            ws.append(w)
    h = _nx(es, ws)
    h.add_nodes_from(inside)
    return h


def global_answer(hub_min_c: dict, pair_min_c2: dict, reduced: nx.Graph) -> float:
    return min([weighted_min_cut(reduced)] + list(hub_min_c.values()) + list(pair_min_c2.values()))


def global_mincut_pipeline_offline(graph: Graph, kstar: int = 6) -> int:
    dec = decompose_offline(graph)
    cp = cut_params_offline(graph, dec)
    red = reduction_graph(graph, dec, cp.capped(kstar))
    return int(global_answer(cp.hub_min_c, cp.pair_min_c2, red))


def _st_components(dec: Decomposition, s: int, t: int) -> tuple:
    out = []
    for x in (s, t):
        i = int(dec.comp_of[x])
        if i >= 0 and dec.components[i].type in (1, 2) and i not in out:
            out.append(i)
    return tuple(out)


def st_mincut_pipeline_offline(graph: Graph, s: int, t: int) -> int:
    if s == t:
        raise ValueError("s and t must differ")
    dec = decompose_offline(graph)
    cp = cut_params_offline(graph, dec)
    keep = _st_components(dec, s, t)
    sums = {p: sum(cp.c1[i] for i in idxs if i not in keep) for p, idxs in dec.C2.items()}
    return int(round(weighted_st_cut(reduction_graph(graph, dec, sums, keep), s, t)))


# ------------------------------------------------------------------ cut-aux case split

def cut_aux_check(graph: Graph) -> bool:
    """Every minimum cut satisfies the per-hub and per-pair case split (exhaustive, n <= 16)."""
    n = graph.n
    if n > 16:
        raise ValueError("exhaustive check is for n <= 16")
    dec = decompose_offline(graph)
    cp = cut_params_offline(graph, dec)
    edges = graph.edges
    vals = {}
    for mask in range(1, 1 << (n - 1)):
        side = [(mask >> x) & 1 for x in range(n - 1)] + [0]
        vals[mask] = (sum(1 for a, b in edges if side[a] != side[b]), side)
    best = min(v for v, _ in vals.values())
    for val, side in vals.values():
        if val != best:
            continue
        for u, idxs in dec.C1.items():
            block = {u} | {x for i in idxs for x in dec.components[i].vertices}
            if len({side[x] for x in block}) > 1 and val != cp.hub_min_c[u]:
                return False
        for (u, v), idxs in dec.C2.items():
            block = {u, v} | {x for i in idxs for x in dec.components[i].vertices}
            if len({side[x] for x in block}) == 1:
                continue
            if val == cp.pair_min_c2[(u, v)]:
                continue
            mass = {x for i in idxs for x in dec.components[i].vertices}
            touched = sum(1 for a, b in edges if side[a] != side[b] and (a in mass or b in mass))
            if side[u] == side[v] or touched != cp.pair_sum_c1[(u, v)]:
                return False
    return True


# ------------------------------------------------------------------ distributed

@dataclass
class CutResult:
    outputs: np.ndarray  # per-vertex answer (float for s-t; -1 where unknown)
    rounds: int
    max_energy: int
    energy: np.ndarray = field(repr=False)
    stage_energy: dict = field(default_factory=dict)
    learned: dict = field(default_factory=dict)
    bytes_sent: int = 0

    @property
    def answer(self):
        vals, counts = np.unique(self.outputs, return_counts=True)
        return vals[np.argmax(counts)].item()


class _Views:
    def __init__(self, info, n):
        T = hub_threshold(n)
        self.comps = {}
        for v in range(n):
            if not info.is_hub[v]:
                c = info.local_component(v, T)
                self.comps.setdefault(c.vertices, (c, tuple(sorted(info.comp_edges[v]))))

    def rep(self, S, hub) -> int:
        es = set(self.comps[S][1])
        return min(x for x in S if (min(x, hub), max(x, hub)) in es)

    def by_kind(self):
        C1, C2 = {}, {}
        for S, (c, _) in self.comps.items():
            if c.type == 1:
                C1.setdefault(c.attach[0], []).append(S)
            elif c.type == 2:
                C2.setdefault(tuple(c.attach), []).append(S)
        return C1, C2


def _hub_setup(info):
    hubs = [v for v in range(len(info.is_hub)) if info.is_hub[v]]
    order = info.hub_order[hubs[0]] if hubs else ()
    gh = sorted(info.gh_known[hubs[0]]) if hubs else []
    return hubs, order, gh, degeneracy_owner_map(sorted(order), gh)


def _broadcast_and_eval(net, info, sources, profile, labeling_mode, evaluate):
    n = net.graph.n
    T = hub_threshold(n)
    lab = infra.build_good_labeling(net, mode=labeling_mode, profile=profile)
    x = max(len(sources), (profile.hub_neighbor_mult + 1) * T)
    got = infra.broadcast_x(net, lab, sources, infra.MULTI_ONCE, profile, x=x)
    outputs = np.full(n, -1.0)
    cache = {}
    for v in range(n):
        known = dict(got.get(v, {}))
        if v in sources:
            known[v] = sources[v]
        key = frozenset(known.items())
        if key not in cache:
            cache[key] = evaluate(known)
        outputs[v] = cache[key]
    return outputs


def _reduced_from(known: dict, pair_key: str) -> tuple:
    es, ws, nodes = [], [], set()
    mins = []
    for o, (kind, *rest) in known.items():
        if kind == "hub":
            hub_min, pairs, hub_nbrs = rest
            nodes.add(o)
            if hub_min is not None:
                mins.append(hub_min)
            for y in hub_nbrs:
                if o < y:
                    es.append((o, y))
                    ws.append(1)
            for (a, b), vals in pairs:
                d = dict(vals)
                if d.get("min_c2") is not None:
                    mins.append(d["min_c2"])
                if d.get(pair_key, 0) > 0:
                    es.append((a, b))
                    ws.append(d[pair_key])
        else:
            S, edges = rest[0]
            nodes |= set(S)
            es.extend(edges)
            ws.extend([1] * len(edges))
    h = _nx(es, ws)
    h.add_nodes_from(nodes)
    return h, mins


def _learn_sum(net, hub, sums, W, eps, profile) -> float:
    """Approximate sum of the representatives' values at the hub."""
    snd = list(sums)
    if not snd:
        # nobody transmits; the hub still runs its listening schedule
        got = P.sr_comm_apx(net, [], [hub], {}, W, eps, profile)
    else:
        got = P.sr_comm_apx(net, snd, [hub], sums, W, eps, profile)
    return got.get(hub, 0.0)


def global_mincut_distributed(graph: Graph, model: ModelConfig, profile: ConstantsProfile = DEFAULT_PROFILE,
                              *, kstar: Optional[int] = None,
                              labeling_mode: str = infra.ORACLE_CHARGED) -> CutResult:
    kstar = profile.kstar if kstar is None else int(kstar)
    n = graph.n
    net = RadioNetwork(graph, model)
    info = learn_basic_info(net, profile, labeling_mode)
    e1 = net.ledger.energy().copy()
    views = _Views(info, n)
    C1, C2 = views.by_kind()
    hubs, order, gh, fstar = _hub_setup(info)
    K = kstar + 1
    hub_min, pair_vals = {}, {u: [] for u in hubs}
    for u in order:
        comps = C1.get(u, [])
        keys = {views.rep(S, u): min(K, cut_c(views.comps[S][1])) for S in comps}
        got = P.sr_comm_min(net, list(keys), [u], keys, {r: r for r in keys}, K, profile)
        hub_min[u] = got[u][1] if u in got else None
    for pr in gh:
        a, b = pr
        w = fstar[pr]
        comps = C2.get(pr, [])
        reps = {views.rep(S, w): S for S in comps}
        keys = {r: min(K, cut_c2(views.comps[S][1], a, b)) for r, S in reps.items()}
        got = P.sr_comm_min(net, list(keys), [w], keys, {r: r for r in keys}, K, profile)
        mc2 = got[w][1] if w in got else None
        vals = {r: min(kstar, cut_c1(views.comps[S][1], a, b)) for r, S in reps.items()}
        est = _learn_sum(net, w, vals, kstar, 1.0 / (kstar + 1), profile)
        pair_vals[w].append((pr, (("min_c2", mc2), ("sum", min(kstar, int(round(est)))))))
    e2 = net.ledger.energy().copy()
    sources = {u: ("hub", hub_min.get(u), tuple(sorted(pair_vals[u])), tuple(sorted(info.hub_neighbors[u])))
               for u in hubs}
    sources.update(_type3_sources(info, n))

    def evaluate(known):
        h, mins = _reduced_from(known, "sum")
        return float(min([weighted_min_cut(h)] + mins))

    outputs = _broadcast_and_eval(net, info, sources, profile, labeling_mode, evaluate)
    e3 = net.ledger.energy()
    learned = {"hub_min_c": {u: v for u, v in hub_min.items() if v is not None},
               "pair": {pr: dict(vals) for u in hubs for pr, vals in pair_vals[u]}}
    return CutResult(outputs, net.ledger.round_count, int(e3.max()), e3.copy(),
                     {"basic_info": int(e1.max()), "parameters": int((e2 - e1).max()),
                      "broadcast": int((e3 - e2).max())}, learned, net.bytes_sent)


def _type3_sources(info, n, extra=()) -> dict:
    T = hub_threshold(n)
    out, seen = {}, set()
    for v in range(n):
        if info.is_hub[v]:
            continue
        c = info.local_component(v, T)
        if (c.type == 3 or c.vertices in extra) and c.vertices not in seen and v == c.vertices[0]:
            seen.add(c.vertices)
            out[v] = ("comp", (c.vertices, tuple(sorted(info.comp_edges[v]))))
    return out


def st_mincut_distributed(graph: Graph, s: int, t: int, eps: float, model: ModelConfig,
                          profile: ConstantsProfile = DEFAULT_PROFILE, *,
                          labeling_mode: str = infra.ORACLE_CHARGED) -> CutResult:
    if s == t:
        raise ValueError("s and t must differ")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    n = graph.n
    T = hub_threshold(n)
    net = RadioNetwork(graph, model)
    info = learn_basic_info(net, profile, labeling_mode)
    e1 = net.ledger.energy().copy()
    views = _Views(info, n)
    _, C2 = views.by_kind()
    hubs, order, gh, fstar = _hub_setup(info)
    # components containing s or t are kept whole; every vertex of them knows it
    special = {S for S, (c, _) in views.comps.items() if c.type in (1, 2) and (s in S or t in S)}
    pair_vals = {u: [] for u in hubs}
    for pr in gh:
        a, b = pr
        w = fstar[pr]
        comps = [S for S in C2.get(pr, []) if S not in special]
        vals = {views.rep(S, w): cut_c1(views.comps[S][1], a, b) for S in comps}
        est = _learn_sum(net, w, vals, max(1, T), eps, profile)
        pair_vals[w].append((pr, (("min_c2", None), ("sum", est))))
    e2 = net.ledger.energy().copy()
    sources = {u: ("hub", None, tuple(sorted(pair_vals[u])), tuple(sorted(info.hub_neighbors[u])))
               for u in hubs}
    sources.update(_type3_sources(info, n, extra=special))

    def evaluate(known):
        h, _ = _reduced_from(known, "sum")
        if s not in h or t not in h:
            return -1.0
        return float(weighted_st_cut(h, s, t))

    outputs = _broadcast_and_eval(net, info, sources, profile, labeling_mode, evaluate)
    e3 = net.ledger.energy()
    learned = {"pair": {pr: dict(vals) for u in hubs for pr, vals in pair_vals[u]}}
    return CutResult(outputs, net.ledger.round_count, int(e3.max()), e3.copy(),
                     {"basic_info": int(e1.max()), "parameters": int((e2 - e1).max()),
                      "broadcast": int((e3 - e2).max())}, learned, net.bytes_sent)


def global_mincut_pipeline(graph: Graph, mode: str = "offline", kstar: int = 6,
                           model: Optional[ModelConfig] = None,
                           profile: ConstantsProfile = DEFAULT_PROFILE):
    if mode == "offline":
        return global_mincut_pipeline_offline(graph, kstar)
    if mode == "distributed":
        return global_mincut_distributed(graph, model or ModelConfig(), profile, kstar=kstar)
    raise ValueError(f"unknown mode {mode!r}")


def st_mincut_pipeline(graph: Graph, s: int, t: int, eps: float = 0.25, mode: str = "offline",
                       model: Optional[ModelConfig] = None, profile: ConstantsProfile = DEFAULT_PROFILE):
    if mode == "offline":
        return st_mincut_pipeline_offline(graph, s, t)
    if mode == "distributed":
        return st_mincut_distributed(graph, s, t, eps, model or ModelConfig(), profile)
    raise ValueError(f"unknown mode {mode!r}")
