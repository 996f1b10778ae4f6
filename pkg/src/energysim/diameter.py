"""Diameter through a sparse certified subgraph: extremal type-1/type-2 component parameters,
the subgraph G* they select, and the distributed pipeline that teaches G* to every vertex."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import shortest_path

from . import infra
from . import primitives as P
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .decomposition import (Component, Decomposition, component_edges, decompose_offline,
                            degeneracy_owner_map, hub_threshold, learn_basic_info)
from .graph import Graph
from .radio import ModelConfig, RadioNetwork

INF = np.iinfo(np.int64).max // 4


def k_range(n: int) -> range:
    """Distance-difference offsets considered for type-2 components."""
    T = hub_threshold(n) + 1
    return range(-T, T + 1)


def l_range(n: int) -> range:
    return range(1, hub_threshold(n) + 2)


# ------------------------------------------------------------------ component-local geometry

class LocalView:
    """All-pairs distances inside G[S] (S plus its attachment hubs)."""

    def __init__(self, S, edges):
        self.S = tuple(sorted(S))
        nodes = sorted(set(self.S) | {x for e in edges for x in e})
        self.nodes = nodes
        self.idx = {v: i for i, v in enumerate(nodes)}
        k = len(nodes)
        if edges:
            r = [self.idx[a] for a, b in edges] + [self.idx[b] for a, b in edges]
            c = [self.idx[b] for a, b in edges] + [self.idx[a] for a, b in edges]
            A = sparse.csr_matrix((np.ones(len(r)), (r, c)), shape=(k, k))
        else:
            A = sparse.csr_matrix((k, k))
        D = shortest_path(A, unweighted=True, directed=False)
        D[np.isinf(D)] = INF
        self.D = D.astype(np.int64)
        self.sidx = np.asarray([self.idx[v] for v in self.S], dtype=np.int64)

    def dist(self, a, b) -> int:
        return int(self.D[self.idx[a], self.idx[b]])

    def ecc_from(self, u) -> int:
        return int(self.D[self.idx[u], self.sidx].max())

    def internal_diameter(self, extra=()) -> int:
        pts = np.asarray(list(self.sidx) + [self.idx[x] for x in extra], dtype=np.int64)
        return int(self.D[np.ix_(pts, pts)].max())

    def ecc_offset(self, u, v, k) -> Optional[int]:
        """Eccentricity of u over {w in S : d(w,v) - d(w,u) >= k}; None when that set is empty."""
        du = self.D[self.idx[u], self.sidx]
        dv = self.D[self.idx[v], self.sidx]
        sel = (dv - du) >= k
        return int(du[sel].max()) if sel.any() else None

    def phi(self, u, v, l) -> int:
        """Largest distance among S ∪ {u, v} once a fresh u-v path of length l is added."""
        pts = np.asarray(list(self.sidx) + [self.idx[u], self.idx[v]], dtype=np.int64)
        D = self.D[np.ix_(pts, pts)]
        iu, iv = len(pts) - 2, len(pts) - 1
        via = np.minimum(D[:, iu][:, None] + l + D[iv, :][None, :],
                         D[:, iv][:, None] + l + D[iu, :][None, :])
        return int(np.minimum(D, via).max())


def _views(graph: Graph, dec: Decomposition, idxs) -> dict:
    return {i: LocalView(dec.components[i].vertices, component_edges(graph, dec.components[i].vertices))
            for i in idxs}


def _topology(graph: Graph, comp: Component) -> tuple:
    return (comp.vertices, tuple(component_edges(graph, comp.vertices)))


# ------------------------------------------------------------------ parameters

def _top2(cands):
    """cands: [(value, rep, comp)] -> best and runner-up, larger value first, smaller rep on ties."""
    order = sorted(cands, key=lambda t: (-t[0], t[1]))
    first = order[0] if order else None
    second = order[1] if len(order) > 1 else None
    return first, second


@dataclass
class Type1Params:
    hub: int
    A1: Optional[int] = None  # component index
    A2: Optional[int] = None
    B: Optional[int] = None
    a1: int = 0
    a2: int = 0
    b: int = 0

    def selected(self) -> set:
        return {c for c in (self.A1, self.A2, self.B) if c is not None}

    def values(self) -> dict:
        return {"a1": self.a1, "a2": self.a2, "b": self.b}

    def choices(self) -> dict:
        return {"a1": self.A1, "a2": self.A2, "b": self.B}


@dataclass
class Type2Params:
    pair: tuple  # (u, v), u < v
    R: Optional[int] = None
    r: int = 0
    A: dict = field(default_factory=dict)  # (end, i, k) -> (component, value); end is the near hub
    B: dict = field(default_factory=dict)  # l -> (component, value)
    l_overflow: int = 0  # components whose outside u-v distance exceeds the l range

    def selected(self) -> set:
        out = {self.R} if self.R is not None else set()
        out |= {c for c, _ in self.A.values()}
        out |= {c for c, _ in self.B.values()}
        return out

    def values(self) -> dict:
        d = {"r": self.r}
        for (end, i, k), (_, val) in self.A.items():
            d[f"a{i}[{end}]{k}"] = val
        for l, (_, val) in self.B.items():
            d[f"b{l}"] = val
        return d

    def choices(self) -> dict:
        d = {"r": self.R}
        for (end, i, k), (c, _) in self.A.items():
            d[f"a{i}[{end}]{k}"] = c
        for l, (c, _) in self.B.items():
            d[f"b{l}"] = c
        return d


def _rep(dec: Decomposition, graph: Graph, i: int, hub: int) -> int:
    S = dec.components[i].vertices
    return min(w for w in S if graph.has_edge(w, hub))


def type1_params_offline(graph: Graph, dec: Decomposition, u: int, views: Optional[dict] = None) -> Type1Params:
    idxs = dec.C1.get(u, [])
    views = views if views is not None else _views(graph, dec, idxs)
    out = Type1Params(u)
    if not idxs:
        return out
    ecc = [(views[i].ecc_from(u), _rep(dec, graph, i, u), i) for i in idxs]
    f, s = _top2(ecc)
    out.A1, out.a1 = f[2], f[0]
    if s is not None:
        out.A2, out.a2 = s[2], s[0]
    b, _ = _top2([(views[i].internal_diameter((u,)), _rep(dec, graph, i, u), i) for i in idxs])
    out.B, out.b = b[2], b[0]
    return out


def outside_distance(graph: Graph, S, u: int, v: int) -> int:
    """dist(u, v) in G with the vertices of S removed; INF when disconnected."""
    banned = set(S)
    dist = {u: 0}
    frontier = [u]
    while frontier and v not in dist:
        nxt = []
        for x in frontier:
            for y in graph.neighbors(x):
                if y not in dist and y not in banned:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return dist.get(v, INF)


def type2_params_offline(graph: Graph, dec: Decomposition, pair: tuple, views: Optional[dict] = None,
                         owner: Optional[int] = None) -> Type2Params:
    """Representatives (for tie-breaking) are taken next to `owner`, default the F* owner."""
    u, v = sorted(pair)
    idxs = dec.C2.get((u, v), [])
    views = views if views is not None else _views(graph, dec, idxs)
    w = owner if owner is not None else dec.fstar.get((u, v), u)
    out = Type2Params((u, v))
    if not idxs:
        return out
    reps = {i: _rep(dec, graph, i, w) for i in idxs}
    best = min(((views[i].dist(u, v), reps[i], i) for i in idxs))
    out.R, out.r = best[2], best[0]
    for near, far in ((u, v), (v, u)):
        for k in k_range(dec.n):
            cands = []
            for i in idxs:
                e = views[i].ecc_offset(near, far, k)
                if e is not None:
                    cands.append((e, reps[i], i))
            f, s = _top2(cands)
            for rank, t in ((1, f), (2, s)):
                if t is not None:
                    out.A[(near, rank, k)] = (t[2], t[0])
    rest = [i for i in idxs if i != out.R]
    for l in l_range(dec.n):
        f, _ = _top2([(views[i].phi(u, v, l), reps[i], i) for i in rest])
        if f is not None:
            out.B[l] = (f[2], f[0])
    top = l_range(dec.n)[-1]
    out.l_overflow = sum(1 for i in idxs
                         if outside_distance(graph, dec.components[i].vertices, u, v) > top)
    return out


@dataclass
class ParamTables:
    type1: dict  # hub -> Type1Params
    type2: dict  # pair -> Type2Params

    def selected(self) -> set:
        out = set()
        for p in self.type1.values():
            out |= p.selected()
        for p in self.type2.values():
            out |= p.selected()
        return out

    def values(self, what: str = "values") -> dict:
        """Flat {key: value}; what="choices" gives the selected component instead."""
        d = {}
        for u, p in sorted(self.type1.items()):
            for k, val in getattr(p, what)().items():
                d[f"1:{u}:{k}"] = val
        for pr, p in sorted(self.type2.items()):
            for k, val in getattr(p, what)().items():
                d[f"2:{pr[0]}-{pr[1]}:{k}"] = val
        return d

    @property
    def l_overflow(self) -> int:
        return sum(p.l_overflow for p in self.type2.values())


def params_offline(graph: Graph, dec: Decomposition) -> ParamTables:
    views = _views(graph, dec, [i for i, c in enumerate(dec.components) if c.type in (1, 2)])
    t1 = {u: type1_params_offline(graph, dec, u, views) for u in dec.hubs}
    t2 = {pr: type2_params_offline(graph, dec, pr, views) for pr in dec.gh_edges}
    return ParamTables(t1, t2)


# ------------------------------------------------------------------ G*

@dataclass
class GStar:
    vertices: tuple
    graph: Graph  # relabeled 0..|V(G*)|-1 in the order of `vertices`
    roles: dict  # component index -> sorted role tags

    def original(self, i: int) -> int:
        return self.vertices[i]


def _roles(params: ParamTables) -> dict:
    roles = {}
    for u, p in params.type1.items():
        for tag, c in (("A1", p.A1), ("A2", p.A2), ("B", p.B)):
            if c is not None:
                roles.setdefault(c, set()).add(f"{tag}[{u}]")
    for pr, p in params.type2.items():
        if p.R is not None:
            roles.setdefault(p.R, set()).add(f"R{pr}")
        for (end, i, k), (c, _) in p.A.items():
            roles.setdefault(c, set()).add(f"A{i}^{k}[{end}]{pr}")
        for l, (c, _) in p.B.items():
            roles.setdefault(c, set()).add(f"B^{l}{pr}")
    return {c: tuple(sorted(r)) for c, r in roles.items()}


def induced_on(graph: Graph, keep) -> tuple:
    vs = tuple(sorted(set(keep)))
    idx = {v: i for i, v in enumerate(vs)}
    es = [(idx[a], idx[b]) for a, b in graph.edges if a in idx and b in idx]
    return vs, Graph.from_edges(len(vs), es)


def assemble_gstar(graph: Graph, dec: Decomposition, params: ParamTables) -> GStar:
    keep = set(dec.hubs)
    for i in dec.type3():
        keep |= set(dec.components[i].vertices)
    roles = _roles(params)
    for i in roles:
        keep |= set(dec.components[i].vertices)
    vs, gs = induced_on(graph, keep)
    return GStar(vs, gs, roles)


def graph_diameter(graph: Graph) -> int:
    """Exact diameter by all-source unweighted shortest paths; raises on a disconnected graph."""
    if graph.n <= 1:
        return 0
    A = sparse.csr_matrix((np.ones(2 * graph.m), graph.indices, graph.indptr), shape=(graph.n, graph.n))
    D = shortest_path(A, unweighted=True, directed=False)
    if np.isinf(D).any():
        raise ValueError("graph is disconnected")
    return int(D.max())


def diameter_offline(graph: Graph) -> int:
    return graph_diameter(graph)


@dataclass
class GStarCheck:
    ok: bool
    diameter: int
    gstar_diameter: int
    gstar_vertices: int
    n: int
    l_overflow: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def gstar_equality_check(graph: Graph, genus_bound: Optional[int] = None) -> GStarCheck:
    """diam(G) == diam(G*) for the offline decomposition and parameters.

    `genus_bound` is informational: the statement is only claimed for bounded-genus inputs.
    """
    dec = decompose_offline(graph)
    params = params_offline(graph, dec)
    gs = assemble_gstar(graph, dec, params)
    d = diameter_offline(graph)
    ds = graph_diameter(gs.graph)
    return GStarCheck(d == ds, d, ds, gs.graph.n, graph.n, params.l_overflow)


# ------------------------------------------------------------------ distributed

@dataclass
class DiameterResult:
    outputs: np.ndarray  # per-vertex diameter, -1 where a vertex could not compute one
    rounds: int
    max_energy: int
    energy: np.ndarray = field(repr=False)
    stage_energy: dict = field(default_factory=dict)
    learned: Optional[ParamTables] = None
    struct_mismatches: dict = field(default_factory=dict)
    bytes_sent: int = 0
    parameter_calls: int = 0

    @property
    def answer(self) -> int:
        vals, counts = np.unique(self.outputs, return_counts=True)
        return int(vals[np.argmax(counts)])


class _Learner:
    """Runs the one-parameter-at-a-time loop from the vertices' learned component views."""

    def __init__(self, net, info, T, profile):
        self.net, self.info, self.T, self.profile = net, info, T, profile
        g = net.graph
        # every low vertex holds its component view; group by representative view
        self.comps = {}
        for v in range(g.n):
            if info.is_hub[v]:
                continue
            c = info.local_component(v, T)
            self.comps.setdefault(c.vertices, (c, info.comp_edges[v]))
        self.views = {}
        self.K = max(2, 2 * T + 4)
        self.calls = 0

    def view(self, S) -> LocalView:
        if S not in self.views:
            self.views[S] = LocalView(S, sorted(self.comps[S][1]))
        return self.views[S]

    def rep(self, S, hub) -> int:
        # smallest vertex of S adjacent to hub, read off the learned G[S]
        edges = self.comps[S][1]
        return min(x for x in S if (min(x, hub), max(x, hub)) in edges)

    def topology(self, S) -> tuple:
        return (S, tuple(sorted(self.comps[S][1])))

    def learn(self, hub, cands, maximize=True, exclude=None):
        """cands: {S: key}.  Returns (S, key, rep) or None."""
        net = self.net
        if exclude is not None:
            # the hub names the representative to drop
            reps = [self.rep(S, hub) for S in cands]
            heard = P.sr_comm(net, [hub], reps, {hub: exclude}, self.profile)
            dropped = {r for r, (msg, _) in heard.items() if msg == r}
            cands = {S: k for S, k in cands.items() if self.rep(S, hub) not in dropped}
        snd = {self.rep(S, hub): S for S in cands}
        # ties go to the smallest representative: the low digit of the key ranks it
        n = net.graph.n
        keys = {r: (cands[S] - 1) * n + ((n - 1 - r) if maximize else r) + 1 for r, S in snd.items()}
        msgs = {r: self.topology(S) for r, S in snd.items()}
        fn = P.sr_comm_max if maximize else P.sr_comm_min
        self.calls += 1
        got = fn(self.net, list(snd), [hub], keys, msgs, self.K * n, self.profile)
        if hub not in got:
            return None
        msg, key, r = got[hub]
        return msg[0], (key - 1) // n + 1, r


def learn_parameters(net: RadioNetwork, info, T: int, profile: ConstantsProfile = DEFAULT_PROFILE) -> tuple:
    """Every hub learns its type-1 parameters and those of the pairs it owns.

    Returns (ParamTables keyed by learned vertex sets, per-hub learned topologies, calls).
    """
    n = net.graph.n
    lr = _Learner(net, info, T, profile)
    hubs = [v for v in range(n) if info.is_hub[v]]
    order = info.hub_order[hubs[0]] if hubs else ()
    gh = sorted(info.gh_known[hubs[0]]) if hubs else []
    fstar = degeneracy_owner_map(sorted(order), gh)
    C1, C2 = {}, {}
    for S, (c, _) in lr.comps.items():
        if c.type == 1:
            C1.setdefault(c.attach[0], []).append(S)
        elif c.type == 2:
            C2.setdefault(tuple(c.attach), []).append(S)
    topo = {u: {} for u in hubs}
    t1, t2 = {}, {}
    for u in order:
        comps = C1.get(u, [])
        p = Type1Params(u)
        # a hub with no type-1 component still listens; the senders set is simply empty
        ecc = {S: lr.view(S).ecc_from(u) for S in comps}
        got = lr.learn(u, ecc)
        if got:
            p.A1, p.a1, r1 = got
            topo[u][p.A1] = lr.topology(p.A1)
            got = lr.learn(u, ecc, exclude=r1)
            if got:
                p.A2, p.a2, _ = got
                topo[u][p.A2] = lr.topology(p.A2)
        got = lr.learn(u, {S: lr.view(S).internal_diameter((u,)) for S in comps})
        if got:
            p.B, p.b, _ = got
            topo[u][p.B] = lr.topology(p.B)
        t1[u] = p
    for pr in gh:
        u, v = pr
        w = fstar[pr]
        comps = C2.get(pr, [])
        p = Type2Params(pr)
        got = lr.learn(w, {S: lr.view(S).dist(u, v) for S in comps}, maximize=False)
        rR = None
        if got:
            p.R, p.r, rR = got
            topo[w][p.R] = lr.topology(p.R)
        for near, far in ((u, v), (v, u)):
            for k in k_range(n):
                cands = {}
                for S in comps:
                    e = lr.view(S).ecc_offset(near, far, k)
                    if e is not None:
                        cands[S] = e
                got = lr.learn(w, cands)
                if got:
                    p.A[(near, 1, k)] = got[:2]
                    topo[w][got[0]] = lr.topology(got[0])
                    got = lr.learn(w, cands, exclude=got[2])
                    if got:
                        p.A[(near, 2, k)] = got[:2]
                        topo[w][got[0]] = lr.topology(got[0])
        for l in l_range(n):
            cands = {S: lr.view(S).phi(u, v, l) for S in comps}
            got = lr.learn(w, cands, exclude=rR) if rR is not None else lr.learn(w, cands)
            if got:
                p.B[l] = got[:2]
                topo[w][got[0]] = lr.topology(got[0])
        t2[pr] = p
    return ParamTables(t1, t2), topo, lr.calls


def _as_indexed(dec: Decomposition, params: ParamTables) -> ParamTables:
    """Translate vertex-set references into component indices of `dec` (for comparisons)."""
    where = {c.vertices: i for i, c in enumerate(dec.components)}

    def fix(x):
        return where.get(x) if x is not None else None

    t1 = {u: Type1Params(u, fix(p.A1), fix(p.A2), fix(p.B), p.a1, p.a2, p.b) for u, p in params.type1.items()}
    t2 = {}
    for pr, p in params.type2.items():
        q = Type2Params(pr, fix(p.R), p.r, {k: (fix(c), val) for k, (c, val) in p.A.items()},
                        {l: (fix(c), val) for l, (c, val) in p.B.items()})
        t2[pr] = q
    return ParamTables(t1, t2)


def compare_params(a: ParamTables, b: ParamTables) -> list:
    """Keys whose learned value or selected component differs (both sides break ties by smallest rep)."""
    out = set()
    for what in ("values", "choices"):
        va, vb = a.values(what), b.values(what)
        out |= {k for k in set(va) | set(vb) if va.get(k) != vb.get(k)}
    return sorted(out)


def diameter_distributed(graph: Graph, model: ModelConfig, profile: ConstantsProfile = DEFAULT_PROFILE, *,
                         labeling_mode: str = infra.ORACLE_CHARGED, check: bool = True) -> DiameterResult:
    n = graph.n
    T = hub_threshold(n)
    net = RadioNetwork(graph, model)
    info = learn_basic_info(net, profile, labeling_mode)
    e1 = net.ledger.energy().copy()
    params, topo, calls = learn_parameters(net, info, T, profile)
    e2 = net.ledger.energy().copy()
    # broadcast: hubs send their learned topologies and hub neighbors; type-3 leaders send G[S]
    hubs = [v for v in range(n) if info.is_hub[v]]
    sources = {u: ("hub", tuple(sorted(topo[u].values())), tuple(sorted(info.hub_neighbors[u])))
               for u in hubs}
    seen = set()
    for v in range(n):
        if info.is_hub[v]:
            continue
        c = info.local_component(v, T)
        if c.type == 3 and c.vertices not in seen and v == c.vertices[0]:
            seen.add(c.vertices)
            sources[v] = ("type3", (c.vertices, tuple(sorted(info.comp_edges[v]))))
    lab = infra.build_good_labeling(net, mode=labeling_mode, profile=profile)
    x = max(len(sources), (profile.hub_neighbor_mult + 1) * T)
    got = infra.broadcast_x(net, lab, sources, infra.MULTI_ONCE, profile, x=x)
    e3 = net.ledger.energy()
    outputs = np.full(n, -1, dtype=np.int64)
    cache = {}
    for v in range(n):
        known = dict(got.get(v, {}))
        if v in sources:
            known[v] = sources[v]
        key = frozenset(known.items())
        if key not in cache:
            cache[key] = _local_diameter(known)
        outputs[v] = cache[key]
    out = DiameterResult(outputs, net.ledger.round_count, int(e3.max()), e3.copy(),
                         {"basic_info": int(e1.max()), "parameters": int((e2 - e1).max()),
                          "broadcast": int((e3 - e2).max())},
                         params, bytes_sent=net.bytes_sent, parameter_calls=calls)
    if check:
        dec = decompose_offline(graph)
        out.struct_mismatches = info.mismatches(dec, graph)
        out.learned = _as_indexed(dec, params)
    return out


def _local_diameter(known: dict) -> int:
    vs, es = set(), set()
    for kind, *rest in known.values():
        if kind == "hub":
            tops, hub_nbrs = rest
            for S, edges in tops:
                vs |= set(S)
                for a, b in edges:
                    vs |= {a, b}
                es |= set(edges)
        else:
            S, edges = rest[0]
            vs |= set(S)
            es |= set(edges)
    for o, (kind, *rest) in known.items():
        if kind == "hub":
            vs.add(o)
            for y in rest[1]:
                vs.add(y)
                es.add((min(o, y), max(o, y)))
    vl = sorted(vs)
    idx = {v: i for i, v in enumerate(vl)}
    try:
        return graph_diameter(Graph.from_edges(len(vl), [(idx[a], idx[b]) for a, b in es]))
    except ValueError:
        return -1
