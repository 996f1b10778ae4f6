"""Instance generators and the plain-text graph file format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import networkx as nx
import numpy as np

from .graph import Graph, GraphError

PLANAR_CLUSTER = "planar_cluster"
TOROIDAL_CLUSTER = "toroidal_cluster"
DISJOINTNESS = "disjointness"
K2DELTA = "k2delta"
KN = "kn"
KN_MINUS_E = "kn_minus_e"
RANDOM_CONNECTED = "random_connected"
GRID = "grid"
PATH = "path"
STAR = "star"
CYCLE = "cycle"

MAX_BLOB_DEGREE = 4  # degree cap inside a blob, keeps every blob vertex far below the hub threshold


def hub_threshold(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 1 else 1  # ceil(sqrt n)


# ---------------------------------------------------------------- simple families

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Graph:
    """Center 0 and leaves 1..n-1."""
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def grid_graph(rows: int, cols: int) -> Graph:
    es = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                es.append((v, v + 1))
            if r + 1 < rows:
                es.append((v, v + cols))
    return Graph.from_edges(rows * cols, es)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def kn_minus_e(n: int, e: Optional[tuple] = None, seed: int = 0) -> Graph:
    if n < 3:
        raise ValueError("K_n - e needs n >= 3")
    if e is None:
        rng = np.random.default_rng(seed)
        u, v = sorted(rng.choice(n, size=2, replace=False).tolist())
    else:
        u, v = sorted(int(x) for x in e)
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"invalid removed edge {e}")
    return Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) != (u, v)])


def k2delta(delta: int) -> Graph:
    """K_{2,Δ}: s = 0 and t = 1 on one side, 2..Δ+1 on the other."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    return Graph.from_edges(delta + 2, [(h, 2 + i) for h in (0, 1) for i in range(delta)])


def random_connected(n: int, avg_degree: float = 4.0, seed: int = 0) -> Graph:
    """Random recursive tree plus uniformly random extra edges up to the target average degree."""
    rng = np.random.default_rng(seed)
    es = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        es.add((u, v))
    target = min(n * (n - 1) // 2, int(round(avg_degree * n / 2)))
    while len(es) < target:
        u, v = sorted(rng.integers(0, n, size=2).tolist())
        if u != v:
            es.add((u, v))
    return Graph.from_edges(n, es)


# ---------------------------------------------------------------- cluster generators

@dataclass
class ClusterMeta:
    family: str
    certified_genus: int
    hubs: list
    components: list  # dicts: vertices, type, attach
    skeleton_faces: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"family": self.family, "certified_genus": self.certified_genus, "hubs": self.hubs,
                "components": self.components}


class _Builder:
    def __init__(self, rng, T, robust=False):
        self.rng = rng
        self.T = T
        self.robust = robust  # no pendant vertices: every blob is 2-edge-connected through its hubs
        self.n = 0
        self.edges = set()
        self.deg = []
        self.blobs = []  # (vertices, type, attach)

    def new(self) -> int:
        self.deg.append(0)
        self.n += 1
        return self.n - 1

    def edge(self, u, v):
        key = (u, v) if u < v else (v, u)
        if u != v and key not in self.edges:
            self.edges.add(key)
            self.deg[u] += 1
            self.deg[v] += 1

    def _grow_leaves(self, vs, extra):
        for _ in range(extra):
            open_ = [x for x in vs if self.deg[x] < MAX_BLOB_DEGREE - 1] or vs
            p = open_[int(self.rng.integers(len(open_)))]
            q = self.new()
            self.edge(p, q)
            vs.append(q)

    def tree_blob(self, hub, size, typ):
        """Random tree; its root and a random subset of vertices are joined to the hub."""
        vs = [self.new()]
        self._grow_leaves(vs, size - 1)
        self.edge(hub, vs[0])
        for x in vs[1:]:
            if self.rng.random() < 0.2 or (self.robust and self.deg[x] == 1):
                self.edge(hub, x)
        self.blobs.append((vs, typ, [hub]))

    def extend_blob(self, hub):
        """Attach one more vertex to the hub and to the root of a small type-1 blob of that hub."""
        for vs, typ, att in reversed(self.blobs):
            if typ == 1 and att == [hub] and len(vs) < self.T:
                q = self.new()
                self.edge(q, hub)
                self.edge(q, vs[0])
                vs.append(q)
                return True
        return False

    def sp_blob(self, u, v, size, typ):
        """Series-parallel blob between terminals u and v."""
        k = int(self.rng.integers(1, size + 1))
        vs = [self.new() for _ in range(k)]
        chain = [u] + vs + [v]
        local = list(zip(chain, chain[1:]))
        for a, b in local:
            self.edge(a, b)
        inner = set(vs)
        for _ in range(size - k):
            cand = [(a, b) for a, b in local
                    if all(x not in inner or self.deg[x] < MAX_BLOB_DEGREE for x in (a, b))]
            q = self.new()
            if self.robust and not cand:
                cand = [(a, b) for a, b in local
                        if all(x not in inner or self.deg[x] < self.T - 2 for x in (a, b))]
            if cand and (self.robust or self.rng.random() < 0.5):
                a, b = cand[int(self.rng.integers(len(cand)))]
                self.edge(q, a)
                self.edge(q, b)
                local += [(q, a), (q, b)]
            else:
                open_ = [x for x in vs if self.deg[x] < MAX_BLOB_DEGREE] or vs
                p = open_[int(self.rng.integers(len(open_)))]
                self.edge(q, p)
                local.append((q, p))
            vs.append(q)
            inner.add(q)
        self.blobs.append((vs, typ, sorted({u, v})))

    def face_blob(self, corners, size):
        """Path across a face touching every listed corner (3 or 4 hubs)."""
        k = size if self.robust else int(self.rng.integers(1, size + 1))
        vs = [self.new() for _ in range(k)]
        for a, b in zip(vs, vs[1:]):
            self.edge(a, b)
        self.edge(corners[0], vs[0])
        self.edge(corners[2], vs[-1])
        self.edge(corners[1], vs[k // 2])
        if len(corners) == 4:
            self.edge(corners[3], vs[(k - 1) // 2])
        self._grow_leaves(vs, size - k)
        self.blobs.append((vs, 3, sorted(corners)))


def _fill(b: _Builder, hubs, skel_edges, faces, budget, mix):
    rng, T = b.rng, b.T
    f = np.asarray(mix, dtype=float)
    if f.sum() <= 0 or (f < 0).any():
        raise ValueError("mix must be nonnegative with a positive sum")
    f = f / f.sum()
    m2 = int(round(budget * f[1])) if skel_edges else 0
    m3 = int(round(budget * f[2]))
    m1 = budget - m2 - m3
    while m2 > 0:
        s = int(rng.integers(1, min(T, m2) + 1))
        u, v = skel_edges[int(rng.integers(len(skel_edges)))]
        b.sp_blob(u, v, s, 2)
        m2 -= s
    free = list(faces)
    rng.shuffle(free)
    while m3 > 0:
        big_ok = m3 > T
        if free and (not big_ok or rng.random() < 0.5):
            s = int(rng.integers(1, min(T, m3) + 1))
            b.face_blob(list(free.pop()), s)
        elif big_ok:
            s = int(rng.integers(T + 1, min(3 * T, m3) + 1))
            if skel_edges and rng.random() < 0.5:
                u, v = skel_edges[int(rng.integers(len(skel_edges)))]
                b.sp_blob(u, v, s, 3)
            else:
                b.tree_blob(hubs[int(rng.integers(len(hubs)))], s, 3)
        else:
            break
        m3 -= s
    m1 += max(0, m3)
    lo = 2 if b.robust else 1  # a lone vertex on a hub would be a pendant
    while m1 >= lo:
        s = int(rng.integers(lo, min(T, m1) + 1))
        b.tree_blob(hubs[int(rng.integers(len(hubs)))], s, 1)
        m1 -= s


def _finish(b: _Builder, hubs, n, family, genus, faces, seed) -> tuple:
    T = b.T
    lift = 2 if b.robust else 1  # a triangle through the hub instead of a pendant leaf
    for h in hubs:
        while b.deg[h] < T and b.n + lift <= n:
            b.tree_blob(h, lift, 1)
    if any(b.deg[h] < T for h in hubs):
        raise ValueError("vertex budget too small to lift every hub to the degree threshold")
    while b.n + lift <= n:
        b.tree_blob(hubs[int(b.rng.integers(len(hubs)))], lift, 1)
    if b.n < n and not any(b.extend_blob(h) for h in hubs):
        raise ValueError("no blob can absorb the last vertex")
    if b.n != n:
        raise ValueError("blob allocation overshot the vertex budget")
    # random relabeling so vertex IDs carry no structural information
    perm = np.random.default_rng([seed, 1]).permutation(n)
    es = [(int(perm[u]), int(perm[v])) for u, v in b.edges]
    g = Graph.from_edges(n, es, require_connected=True)
    comps = [{"vertices": sorted(int(perm[x]) for x in vs), "type": t,
              "attach": sorted(int(perm[h]) for h in att)} for vs, t, att in b.blobs]
    # leaves sharing a hub are separate components, so no merging is needed
    comps.sort(key=lambda c: c["vertices"][0])
    meta = ClusterMeta(family, genus, sorted(int(perm[h]) for h in hubs), comps,
                       [tuple(int(perm[h]) for h in f) for f in faces])
    return g, meta


def gen_planar_cluster(n: int, hub_count: int = 4, mix=(0.4, 0.4, 0.2), seed: int = 0,
                       robust: bool = False) -> tuple:
    """Planar graph with a known hub/component structure.  Returns (Graph, ClusterMeta)."""
    T = hub_threshold(n)
    if T < MAX_BLOB_DEGREE + 3:
        raise ValueError("n too small for the cluster generator (need ceil(sqrt n) >= 7)")
    if hub_count < 1:
        raise ValueError("hub_count must be >= 1")
    rng = np.random.default_rng(seed)
    b = _Builder(rng, T, robust)
    hubs = [b.new() for _ in range(hub_count)]
    h = hub_count
    # fan triangulation of the hub polygon
    skel = [(i, i + 1) for i in range(h - 1)]
    if h >= 3:
        skel.append((0, h - 1))
        skel += [(0, i) for i in range(2, h - 1)]
    faces = [(0, i, i + 1) for i in range(1, h - 1)] if h >= 3 else []
    for u, v in skel:
        if rng.random() < 0.5 or robust:
            b.edge(u, v)
    budget = n - h - h * T
    if budget < 0:
        raise ValueError("vertex budget too small for this many hubs")
    _fill(b, hubs, skel, faces, budget, mix)
    _connect_hubs(b, hubs, [(i, i + 1) for i in range(h - 1)])
    return _finish(b, hubs, n, PLANAR_CLUSTER, 0, faces, seed)


def gen_toroidal_cluster(n: int, rows: int = 3, cols: int = 3, mix=(0.4, 0.4, 0.2), seed: int = 0,
                         robust: bool = False) -> tuple:
    """Cluster graph on a torus-grid hub skeleton (genus at most 1)."""
    if rows < 3 or cols < 3:
        raise ValueError("torus skeleton needs at least 3 x 3 hubs")
    T = hub_threshold(n)
    if T < MAX_BLOB_DEGREE + 4:
        raise ValueError("n too small for the cluster generator (need ceil(sqrt n) >= 8)")
    rng = np.random.default_rng(seed)
    b = _Builder(rng, T, robust)
    hubs = [b.new() for _ in range(rows * cols)]
    at = lambda r, c: (r % rows) * cols + (c % cols)
    skel, faces = [], []
    for r in range(rows):
        for c in range(cols):
            skel.append((at(r, c), at(r, c + 1)))
            skel.append((at(r, c), at(r + 1, c)))
            faces.append((at(r, c), at(r, c + 1), at(r + 1, c + 1), at(r + 1, c)))
    for u, v in skel:
        b.edge(u, v)
    budget = n - len(hubs) - len(hubs) * (T - 4)
    if budget < 0:
        raise ValueError("vertex budget too small for this torus skeleton")
    _fill(b, hubs, skel, faces, budget, mix)
    return _finish(b, hubs, n, TOROIDAL_CLUSTER, 1, faces, seed)


def _connect_hubs(b: _Builder, hubs, chain):
    parent = list(range(b.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in b.edges:
        parent[find(u)] = find(v)
    for u, v in chain:
        if find(u) != find(v):
            b.edge(u, v)
            parent[find(u)] = find(v)


def planar_face_count(graph: Graph) -> Optional[int]:
    """Faces of a planar embedding, or None when the graph is not planar."""
    G = nx.Graph()
    G.add_nodes_from(range(graph.n))
    G.add_edges_from(graph.edges)
    ok, emb = nx.check_planarity(G)
    if not ok:
        return None
    seen = set()
    faces = 0
    for u, v in emb.edges():
        if (u, v) in seen:
            continue
        emb.traverse_face(u, v, mark_half_edges=seen)
        faces += 1
    if graph.m == 0:
        faces = 1
    return faces


def euler_certificate(graph: Graph) -> bool:
    """V - E + F = 2 for a connected planar graph."""
    f = planar_face_count(graph)
    return f is not None and graph.n - graph.m + f == 2


# ---------------------------------------------------------------- set disjointness gadget

@dataclass(frozen=True)
class GadgetRoles:
    width: int
    C: tuple  # bit-position vertices adjacent on a one-bit of V_A elements
    D: tuple
    u_star: int
    v_star: int
    A: tuple
    B: tuple


def ones(s: int, width: int) -> set:
    """1-based bit positions, most significant first, holding a 1."""
    return {i + 1 for i in range(width) if (s >> (width - 1 - i)) & 1}


def zeros(s: int, width: int) -> set:
    return set(range(1, width + 1)) - ones(s, width)


def gen_disjointness_gadget(S_A: Iterable, S_B: Iterable, k: int) -> tuple:
    """Diameter 2 iff S_A and S_B are disjoint, else 3.  Returns (Graph, GadgetRoles).

    Elements range over 0..k with k a power of two; bit strings use
    k.bit_length() positions so that 0 and k stay distinct.
    """
    if k < 2 or k & (k - 1):
        raise ValueError("k must be a power of two >= 2")
    A, B = sorted(set(int(a) for a in S_A)), sorted(set(int(x) for x in S_B))
    for s in A + B:
        if not 0 <= s <= k:
            raise ValueError(f"element {s} outside 0..{k}")
    w = k.bit_length()
    C = tuple(range(w))
    D = tuple(range(w, 2 * w))
    us, vs = 2 * w, 2 * w + 1
    VA = tuple(range(2 * w + 2, 2 * w + 2 + len(A)))
    VB = tuple(range(VA[-1] + 1 if VA else 2 * w + 2, (VA[-1] + 1 if VA else 2 * w + 2) + len(B)))
    es = []
    for ui, a in zip(VA, A):
        es += [(ui, C[j - 1]) for j in ones(a, w)]
        es += [(ui, D[j - 1]) for j in zeros(a, w)]
    for vi, bb in zip(VB, B):
        es += [(vi, C[j - 1]) for j in zeros(bb, w)]
        es += [(vi, D[j - 1]) for j in ones(bb, w)]
    es += [(us, x) for x in VA + C + D]
    es += [(vs, x) for x in VB + C + D]
    n = 2 * w + 2 + len(A) + len(B)
    return Graph.from_edges(n, es, require_connected=True), GadgetRoles(w, C, D, us, vs, VA, VB)


# ---------------------------------------------------------------- specs and file IO

@dataclass
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(sorted(self.params.items())), "seed": self.seed}


def generate(spec: GeneratorSpec) -> tuple:
    """Returns (Graph, metadata dict)."""
    p, s, f = dict(spec.params), spec.seed, spec.family
    meta = {"family": f, "seed": s, "certified_genus": None}
    if f == PLANAR_CLUSTER:
        if "mix" in p:
            p["mix"] = tuple(p["mix"])
        g, cm = gen_planar_cluster(seed=s, **p)
        meta.update(cm.to_dict())
    elif f == TOROIDAL_CLUSTER:
        if "mix" in p:
            p["mix"] = tuple(p["mix"])
        g, cm = gen_toroidal_cluster(seed=s, **p)
        meta.update(cm.to_dict())
    elif f == DISJOINTNESS:
        k = int(p.get("k", 256))
        if "S_A" in p:
            A, B = p["S_A"], p["S_B"]
        else:
            A, B = random_set_pair(k, p.get("size", 8), p.get("intersecting", False), s)
        g, roles = gen_disjointness_gadget(A, B, k)
        meta.update({"S_A": sorted(A), "S_B": sorted(B), "k": k, "width": roles.width})
    elif f == K2DELTA:
        g = k2delta(int(p["delta"]))
        meta["certified_genus"] = 0
    elif f == KN:
        g = complete_graph(int(p["n"]))
    elif f == KN_MINUS_E:
        g = kn_minus_e(int(p["n"]), p.get("e"), s)
    elif f == RANDOM_CONNECTED:
        g = random_connected(int(p["n"]), float(p.get("avg_degree", 4.0)), s)
    elif f == GRID:
        g = grid_graph(int(p["rows"]), int(p["cols"]))
        meta["certified_genus"] = 0
    elif f == PATH:
        g = path_graph(int(p["n"]))
        meta["certified_genus"] = 0
    elif f == STAR:
        g = star_graph(int(p["n"]))
        meta["certified_genus"] = 0
    elif f == CYCLE:
        g = cycle_graph(int(p["n"]))
        meta["certified_genus"] = 0
    else:
        raise ValueError(f"unknown family {f!r}")
    return g, meta


def random_set_pair(k: int, size: int, intersecting: bool, seed: int) -> tuple:
    """Two random subsets of 0..k; disjoint unless `intersecting`, then sharing exactly one element."""
    rng = np.random.default_rng([seed, 7])
    pool = rng.permutation(k + 1).tolist()
    A, B = pool[:size], pool[size:2 * size]
    if intersecting:
        B[0] = A[int(rng.integers(size))]
    return sorted(A), sorted(B)


def save_graph(graph: Graph, path) -> None:
    lines = [f"{graph.n} {graph.m}"] + [f"{u} {v}" for u, v in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_graph(text: str, *, require_connected: bool = True) -> Graph:
    rows = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise GraphError("line 1: missing 'n m' header")

    def ints(i, ln):
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"line {i}: expected two integers, got {ln!r}")
        try:
            return int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {i}: expected two integers, got {ln!r}") from None

    n, m = ints(*rows[0])
    if n < 0 or m < 0:
        raise GraphError(f"line {rows[0][0]}: negative count")
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"line {rows[0][0]}: header says {m} edges, found {len(body)}")
    seen = set()
    es = []
    for i, ln in body:
        u, v = ints(i, ln)
        if not 0 <= u < v < n:
            raise GraphError(f"line {i}: edge must satisfy 0 <= u < v < n, got {u} {v}")
        if (u, v) in seen:
            raise GraphError(f"line {i}: duplicate edge {u} {v}")
        seen.add((u, v))
        es.append((u, v))
    return Graph.from_edges(n, es, require_connected=require_connected)


def load_graph(path, *, require_connected: bool = True) -> Graph:
    return parse_graph(Path(path).read_text(), require_connected=require_connected)
