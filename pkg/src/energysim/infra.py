"""Good labelings and the layer-by-layer converge/diverge casts built on them."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import primitives as P
from .constants import DEFAULT_PROFILE, ConstantsProfile
from .radio import RadioNetwork

IN_MODEL = "inmodel"
ORACLE_CHARGED = "oracle"
ALL_MESSAGES, ANY_ONE, MULTI = "all", "any", "multi"
MULTI_ONCE, REPEAT_ANY_ONE = "multi_once", "repeat_any_one"


class LabelingError(RuntimeError):
    def __init__(self, unreached):
        super().__init__(f"{len(unreached)} vertices were never labeled")
        self.unreached = sorted(unreached)


@dataclass
class GoodLabeling:
    labels: np.ndarray  # -1 outside the labeled scope
    roots: tuple

    @property
    def root(self) -> int:
        return self.roots[0]

    def layers(self) -> list:
        top = int(self.labels.max()) if self.labels.size else -1
        order = np.argsort(self.labels, kind="stable")
        lab = self.labels[order]
        out = []
        for i in range(top + 1):
            lo, hi = np.searchsorted(lab, [i, i + 1])
            out.append(order[lo:hi])
        return out


def validate_labeling(graph, lab: GoodLabeling) -> bool:
    labels = lab.labels
    scope = np.nonzero(labels >= 0)[0]
    zeros = set(np.nonzero(labels == 0)[0].tolist())
    if zeros != set(lab.roots):
        return False
    for v in scope.tolist():
        if labels[v] > 0 and not any(labels[u] == labels[v] - 1 for u in graph.neighbors(v)):
            return False
    # exactly one root per connected piece of the scope
    seen = set()
    for r in lab.roots:
        if r in seen:
            return False
        q = deque([r])
        seen.add(r)
        while q:
            x = q.popleft()
            for y in graph.neighbors(x):
                if labels[y] >= 0 and y not in seen:
                    if y in zeros:
                        return False
                    seen.add(y)
                    q.append(y)
    return len(seen) == scope.size


def _scope_pieces(graph, scope: np.ndarray) -> list:
    inside = np.zeros(graph.n, dtype=bool)
    inside[scope] = True
    seen = np.zeros(graph.n, dtype=bool)
    pieces = []
    for v in scope.tolist():
        if seen[v]:
            continue
        piece, q = [v], [v]
        seen[v] = True
        while q:
            x = q.pop()
            for y in graph.neighbors(x):
                if inside[y] and not seen[y]:
                    seen[y] = True
                    piece.append(y)
                    q.append(y)
        pieces.append(sorted(piece))
    return pieces


def labeling_charge(n: int, max_degree: int, profile: ConstantsProfile) -> tuple:
    lg = P.clog2(n)
    dl = P.clog2(max_degree) if max_degree > 1 else 1
    energy = profile.labeling_charge * dl * lg * lg
    return energy, n * dl * lg * lg


def build_good_labeling(net: RadioNetwork, root: Optional[int] = None, mode: str = ORACLE_CHARGED,
                        scope: Optional[Iterable] = None,
                        profile: ConstantsProfile = DEFAULT_PROFILE) -> GoodLabeling:
    """Label every connected piece of `scope` (default: all vertices).

    Each piece is rooted at `root` if it contains it, otherwise at its
    smallest ID (vertex 0 for a connected whole graph).
    """
    g = net.graph
    sc = np.arange(g.n) if scope is None else np.asarray(sorted(set(scope)), dtype=np.int64)
    labels = np.full(g.n, -1, dtype=np.int64)
    if sc.size == 0:
        return GoodLabeling(labels, ())
    if scope is None:
        pieces = [sc.tolist()]
    else:
        pieces = _scope_pieces(g, sc)
    roots = []
    for piece in pieces:
        roots.append(root if root is not None and root in piece else piece[0])
    inside = np.zeros(g.n, dtype=bool)
    inside[sc] = True
    if mode == ORACLE_CHARGED:
        for r in roots:
            labels[r] = 0
        q = deque(roots)
        while q:
            x = q.popleft()
            for y in g.neighbors(x):
                if inside[y] and labels[y] < 0:
                    labels[y] = labels[x] + 1
                    q.append(y)
        unreached = sc[labels[sc] < 0]
        if unreached.size:
            raise LabelingError(unreached.tolist())
        energy, time = labeling_charge(g.n, g.max_degree, profile)
        net.charge_silent_listening(sc, np.full(sc.size, energy))
        net.idle(time)
        return GoodLabeling(labels, tuple(roots))
    if mode != IN_MODEL:
        raise ValueError(f"unknown labeling mode {mode!r}")
    T = P.decay_block_length(g.n, g.max_degree, profile.rep_logn * P.clog2(g.n))[0]
    for r in roots:
        labels[r] = 0
    frontier = list(roots)
    steps = 0
    for i in range(g.n - 1):
        unlabeled = sc[labels[sc] < 0]
        if unlabeled.size == 0 or not frontier:
            break
        got = P.sr_comm(net, frontier, unlabeled, {u: i for u in frontier}, profile)
        frontier = sorted(got)
        for v in frontier:
            labels[v] = i + 1
        steps += 1
    unlabeled = sc[labels[sc] < 0]
    remaining = g.n - 1 - steps
    if unlabeled.size:
        net.charge_silent_listening(unlabeled, np.full(unlabeled.size, remaining * T))
    net.idle(remaining * T)
    if unlabeled.size:
        raise LabelingError(unlabeled.tolist())
    return GoodLabeling(labels, tuple(roots))


# ------------------------------------------------------------------ casts

def _step_length(net, profile, combine, delta_prime=None, M=1) -> int:
    g = net.graph
    lg = P.clog2(g.n)
    if combine == ALL_MESSAGES:
        return profile.rep_all * max(1, int(delta_prime)) * lg
    if combine == MULTI:
        L_in = P.decay_block_length(g.n, g.max_degree, profile.multi_inner_sweeps)[0]
        return profile.rep_multi * max(1, int(M)) * lg * L_in
    return P.decay_block_length(g.n, g.max_degree, profile.rep_logn * lg)[0]


def converge_cast(net: RadioNetwork, lab: GoodLabeling, sources: Mapping, combine: str = ALL_MESSAGES,
                  profile: ConstantsProfile = DEFAULT_PROFILE, *, delta_prime: Optional[int] = None,
                  M: Optional[int] = None, seeds: Optional[Mapping] = None) -> dict:
    """Relay source messages toward the root(s), layer i -> i-1 for i = n-1 .. 1.

    Returns {vertex: {origin: message}} as held at the end (roots hold the result).
    """
    g = net.graph
    layers = lab.layers()
    held = {int(v): {int(v): m} for v, m in sources.items()}
    if combine == ALL_MESSAGES and delta_prime is None:
        delta_prime = max(1, g.max_degree)
    if combine == MULTI:
        M = max(1, int(M if M is not None else len(sources)))
        if seeds is None:
            seeds = {int(v): int(s) for v, s in zip(sorted(sources), net.rng.integers(0, 2**63, size=len(sources)))}
    T = _step_length(net, profile, combine, delta_prime, M or 1)
    top = len(layers) - 1
    net.idle(max(0, g.n - 1 - top) * T)
    for i in range(top, 0, -1):
        snd = [int(u) for u in layers[i] if held.get(int(u))]
        rcv = [int(v) for v in layers[i - 1]]
        if combine == ALL_MESSAGES:
            got = P.sr_comm_all(net, snd, rcv, {u: held[u] for u in snd}, delta_prime, profile)
            for v, d in got.items():
                for payload in d.values():
                    held.setdefault(v, {}).update(payload)
        elif combine == ANY_ONE:
            got = P.sr_comm(net, snd, rcv, {u: held[u] for u in snd}, profile)
            for v, (payload, _) in got.items():
                if not held.get(v):
                    origin = min(payload)
                    held[v] = {origin: payload[origin]}
        elif combine == MULTI:
            got = P.sr_comm_multi(net, {u: held[u].keys() for u in snd}, rcv, seeds, M, profile)
            for v, ids in got.items():
                for o in ids:
                    held.setdefault(v, {})[o] = sources[o]
        else:
            raise ValueError(f"unknown combine mode {combine!r}")
    return held


def diverge_cast(net: RadioNetwork, lab: GoodLabeling, root_payload: Mapping,
                 profile: ConstantsProfile = DEFAULT_PROFILE) -> dict:
    """Push each root's payload outward, layer i -> i+1 for i = 0 .. n-2.

    Returns {vertex: payload} for every vertex that ends up holding one.
    """
    g = net.graph
    layers = lab.layers()
    have = {int(r): root_payload[r] for r in lab.roots if r in root_payload}
    T = _step_length(net, profile, ANY_ONE)
    top = len(layers) - 1
    for i in range(top):
        snd = [int(u) for u in layers[i] if int(u) in have]
        rcv = [int(v) for v in layers[i + 1]]
        got = P.sr_comm(net, snd, rcv, {u: have[u] for u in snd}, profile)
        for v, (payload, _) in got.items():
            have[v] = payload
    if top >= 0:
        # the last layer still transmits once, into an empty layer
        snd = [int(u) for u in layers[top] if int(u) in have]
        P.sr_comm(net, snd, [], {u: have[u] for u in snd}, profile, noop_without_receivers=False)
    net.idle(max(0, g.n - 2 - top) * T)
    return have


def broadcast_everyone(net: RadioNetwork, lab: GoodLabeling, messages: Mapping,
                       profile: ConstantsProfile = DEFAULT_PROFILE, *,
                       delta_prime: Optional[int] = None) -> dict:
    """Every vertex of each labeled piece ends with all of that piece's messages."""
    held = converge_cast(net, lab, messages, ALL_MESSAGES, profile, delta_prime=delta_prime)
    return diverge_cast(net, lab, {r: dict(held.get(r, {})) for r in lab.roots}, profile)


def broadcast_x(net: RadioNetwork, lab: GoodLabeling, sources: Mapping, strategy: str = MULTI_ONCE,
                profile: ConstantsProfile = DEFAULT_PROFILE, *, x: Optional[int] = None) -> dict:
    """Broadcast up to x source messages to every vertex.  Returns {vertex: {origin: message}}."""
    x = len(sources) if x is None else int(x)
    if x == 0:
        return {}
    if len(sources) > x:
        raise ValueError("more sources than the broadcast bound x")
    if strategy == MULTI_ONCE:
        held = converge_cast(net, lab, sources, MULTI, profile, M=x)
        return diverge_cast(net, lab, {r: dict(held.get(r, {})) for r in lab.roots}, profile)
    if strategy != REPEAT_ANY_ONE:
        raise ValueError(f"unknown strategy {strategy!r}")
    pending = dict(sources)
    known = {}
    delivered = {r: {} for r in lab.roots}
    for _ in range(x):
        held = converge_cast(net, lab, pending, ANY_ONE, profile)
        for r in lab.roots:
            delivered[r].update(held.get(r, {}))
        got = diverge_cast(net, lab, {r: dict(delivered[r]) for r in lab.roots}, profile)
        for v, payload in got.items():
            known.setdefault(v, {}).update(payload)
        pending = {o: m for o, m in pending.items() if o not in known.get(o, {})}
    return known
