"""SR-communication primitives (decay, all, multi, min/max, approximate sum).

Every primitive takes a `RadioNetwork`, advances its clock by the full
length of the primitive's fixed schedule and charges energy exactly as the
devices would spend it.  Receivers that cannot hear anything (no sender in
range) and senders nobody can hear are charged from the same distributions
without materializing their slots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy import sparse

from .constants import DEFAULT_PROFILE, ConstantsProfile
from .radio import Listening, RadioNetwork, bernoulli_events, payload_size, random_bits


def clog2(x: float) -> int:
    """ceil(log2 x), at least 1."""
    return max(1, math.ceil(math.log2(x))) if x > 1 else 1


def _arr(xs) -> np.ndarray:
    return np.asarray(sorted(set(int(x) for x in xs)), dtype=np.int64)


def _flags(n: int, vs: np.ndarray) -> np.ndarray:
    f = np.zeros(n, dtype=bool)
    f[vs] = True
    return f


def _payload_sizes(n: int, senders: np.ndarray, messages: Mapping) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    memo = {}
    for u in senders.tolist():
        m = messages.get(u)
        if id(m) not in memo:
            memo[id(m)] = payload_size(m)
        out[u] = memo[id(m)]
    return out


def decay_block_length(n: int, max_degree: int, sweeps: int) -> tuple:
    steps = clog2(max_degree) if max_degree > 1 else 1
    return sweeps * steps, steps


def decay_probs(steps: int, sweeps: int) -> np.ndarray:
    return np.tile(0.5 ** np.arange(1, steps + 1), sweeps)


# ------------------------------------------------------------------- SR-comm

def sr_comm(net: RadioNetwork, senders: Iterable, receivers: Iterable, messages: Mapping,
            profile: ConstantsProfile = DEFAULT_PROFILE, *, sweeps: Optional[int] = None,
            noop_without_receivers: bool = True) -> dict:
    """Decay protocol.  Returns {receiver: (message, sender)} for receivers that got one."""
    g = net.graph
    S = _arr(senders)
    sflag = _flags(g.n, S)
    R = np.asarray([v for v in _arr(receivers).tolist() if not sflag[v]], dtype=np.int64)
    if R.size == 0 and noop_without_receivers:
        return {}
    sw = sweeps if sweeps is not None else profile.rep_logn * clog2(g.n)
    L, steps = decay_block_length(g.n, g.max_degree, sw)
    if S.size == 0:
        net.charge_silent_listening(R, np.full(R.size, L))
        net.idle(L)
        return {}
    rflag = _flags(g.n, R)
    hears = g.neighbor_count(sflag)[R] > 0
    heard = g.neighbor_count(rflag)[S] > 0
    quiet_R, live_R = R[~hears], R[hears]
    net.charge_silent_listening(quiet_R, np.full(quiet_R.size, L))
    probs = decay_probs(steps, sw)
    # senders out of every receiver's range: only their transmit count matters
    mute = S[~heard]
    if mute.size:
        per_step = net.rng.binomial(sw, probs[:steps], size=(mute.size, steps)).sum(axis=1)
        net.ledger.transmit_count[mute] += per_step
    live_S = S[heard]
    row, t = bernoulli_events(net.rng, live_S.size, L, probs)
    rec = net.run_block(L, live_S[row], t, Listening.always(live_R, L),
                        _payload_sizes(g.n, S, messages))
    return {v: (messages.get(u), u) for v, u in rec.first_sender().items()}


def sr_comm_all(net: RadioNetwork, senders: Iterable, receivers: Iterable, messages: Mapping,
                delta_prime: int, profile: ConstantsProfile = DEFAULT_PROFILE) -> dict:
    """Every receiver collects the message of every sender in N⁺(v).

    Returns {receiver: {sender: message}}.
    """
    g = net.graph
    S = _arr(senders)
    R = _arr(receivers)
    dp = max(1, int(delta_prime))
    out = {int(v): {} for v in R.tolist()}
    sflag = _flags(g.n, S)
    for v in R.tolist():
        if sflag[v]:
            out[v][v] = messages.get(v)
    if R.size == 0:
        return out
    L = profile.rep_all * dp * clog2(g.n)
    p = 1.0 / dp
    rflag = _flags(g.n, R)
    hears = g.neighbor_count(sflag)[R] > 0
    heard = (g.neighbor_count(rflag)[S] > 0) | rflag[S]
    quiet_R = R[~hears & ~sflag[R]]
    live_R = R[hears | sflag[R]]
    net.charge_silent_listening(quiet_R, np.full(quiet_R.size, L))
    mute = S[~heard]
    if mute.size:
        net.ledger.transmit_count[mute] += net.rng.binomial(L, p, size=mute.size)
    live_S = S[heard]
    row, t = bernoulli_events(net.rng, live_S.size, L, p)
    rec = net.run_block(L, live_S[row], t, Listening.always(live_R, L),
                        _payload_sizes(g.n, S, messages))
    for v, u in rec.pairs():
        out[v][u] = messages.get(u)
    return out


# ------------------------------------------------------------- SR-comm^multi

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def shared_coins(seeds, iterations: int) -> np.ndarray:
    """Uniform [0,1) values, one per (message seed, iteration), identical at every holder."""
    s = np.asarray(seeds, dtype=np.uint64)[:, None]
    j = np.arange(iterations, dtype=np.uint64)[None, :]
    with np.errstate(over="ignore"):
        z = _splitmix(_splitmix(s) ^ (j * _GOLDEN))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass
class MultiTrace:
    messages: list
    coins: np.ndarray  # (messages, iterations) join decisions
    senders: np.ndarray
    joined: np.ndarray  # (senders, iterations) membership in S'
    excluded: np.ndarray  # (senders, iterations) sender was sampled into R'


def sr_comm_multi(net: RadioNetwork, holdings: Mapping, receivers: Iterable, seeds: Mapping,
                  M: int, profile: ConstantsProfile = DEFAULT_PROFILE, *,
                  trace: Optional[list] = None) -> dict:
    """Deliver every distinct message held in N⁺(v) to each receiver v.

    holdings: {sender: iterable of message ids}; seeds: {message id: uint64}.
    Returns {receiver: set of message ids}.
    """
    g = net.graph
    hold = {int(u): frozenset(ms) for u, ms in holdings.items() if ms}
    S = np.asarray(sorted(hold), dtype=np.int64)
    R = _arr(receivers)
    out = {int(v): set(hold.get(int(v), ())) for v in R.tolist()}
    if R.size == 0:
        return out
    M = max(1, int(M))
    lg = clog2(g.n)
    J = profile.rep_multi * M * lg
    sweeps = profile.multi_inner_sweeps
    L_in, steps = decay_block_length(g.n, g.max_degree, sweeps)
    L = J * L_in
    sflag = _flags(g.n, S)
    rflag = _flags(g.n, R)
    hears = g.neighbor_count(sflag)[R] > 0
    rel_R = R[hears | sflag[R]]
    quiet_R = R[~(hears | sflag[R])]
    # quiet receivers: only the number of iterations they were sampled into R' matters
    if quiet_R.size:
        net.charge_silent_listening(quiet_R, net.rng.binomial(J, 0.5, size=quiet_R.size) * L_in)
    if S.size == 0:
        net.charge_silent_listening(rel_R, net.rng.binomial(J, 0.5, size=rel_R.size) * L_in)
        net.idle(L)
        return out
    in_rprime = random_bits(net.rng, (rel_R.size, J))
    msgs = sorted({m for ms in hold.values() for m in ms})
    midx = {m: i for i, m in enumerate(msgs)}
    coins = shared_coins([seeds[m] for m in msgs], J) < 1.0 / M
    rows, cols = [], []
    for i, u in enumerate(S.tolist()):
        for m in hold[u]:
            rows.append(i)
            cols.append(midx[m])
    inc = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                            shape=(S.size, len(msgs)))
    joined = (inc @ coins.astype(np.int32)) > 0
    joined = np.asarray(joined)
    rrow = np.full(g.n, -1, dtype=np.int64)
    rrow[rel_R] = np.arange(rel_R.size)
    excluded = np.zeros_like(joined)
    both = np.nonzero(rflag[S])[0]
    if both.size:
        excluded[both] = in_rprime[rrow[S[both]]]
    active = joined & ~excluded
    if trace is not None:
        trace.append(MultiTrace(msgs, coins, S.copy(), joined, excluded))
    heard = g.neighbor_count(rflag)[S] > 0
    a_s, a_j = np.nonzero(active)
    probs = decay_probs(steps, sweeps)
    live = heard[a_s]
    if (~live).any():
        k = int((~live).sum())
        cnt = net.rng.binomial(sweeps, probs[:steps], size=(k, steps)).sum(axis=1)
        np.add.at(net.ledger.transmit_count, S[a_s[~live]], cnt)
    a_s, a_j = a_s[live], a_j[live]
    row, t = bernoulli_events(net.rng, a_s.size, L_in, probs)
    tx_v = S[a_s[row]]
    tx_t = a_j[row] * L_in + t
    sizes = np.zeros(g.n, dtype=np.int64)
    memo = {}
    for u in S.tolist():
        if hold[u] not in memo:
            memo[hold[u]] = payload_size(sorted(hold[u], key=repr))
        sizes[u] = memo[hold[u]]
    rec = net.run_block(L, tx_v, tx_t,
                        Listening(rel_R, L_in, in_rprime), sizes)
    for v, u in rec.pairs():
        out[v] |= hold[u]
    return out


def neighborhood_message_counts(graph, holdings: Mapping, receivers: Iterable) -> dict:
    """Distinct messages in N⁺(v) for each receiver (for M-overflow checks)."""
    out = {}
    for v in receivers:
        ms = set(holdings.get(v, ()))
        for u in graph.neighbors(v):
            ms |= set(holdings.get(u, ()))
        out[v] = len(ms)
    return out


# ------------------------------------------------------------ SR-comm^min/max

def _pow2(K: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(K, 1))))


def _uses_special_case(g, S: np.ndarray, R: np.ndarray) -> bool:
    if np.intersect1d(S, R).size:
        return False
    rflag = _flags(g.n, R)
    return bool(np.all(g.neighbor_count(rflag)[S] <= 1))


def sr_comm_min(net: RadioNetwork, senders: Iterable, receivers: Iterable, keys: Mapping,
                messages: Mapping, K: int, profile: ConstantsProfile = DEFAULT_PROFILE,
                *, special_case: Optional[bool] = None) -> dict:
    """Each receiver learns the minimum key in N⁺(v)∩𝒮 and a message carrying it.

    Keys are integers in 1..K.  Returns {receiver: (message, key, sender)}.
    """
    g = net.graph
    S = _arr(senders)
    R = _arr(receivers)
    for u in S.tolist():
        if not 1 <= int(keys[u]) <= K:
            raise ValueError(f"key {keys[u]} of sender {u} outside 1..{K}")
    if special_case is None:
        special_case = _uses_special_case(g, S, R)
    elif special_case and not _uses_special_case(g, S, R):
        raise ValueError("special-case preconditions do not hold")
    bits = max(1, int(math.log2(_pow2(K))))
    if special_case:
        return _min_special(net, S, R, keys, messages, bits, profile)
    return _min_general(net, S, R, keys, messages, bits, profile)


def sr_comm_max(net, senders, receivers, keys, messages, K, profile=DEFAULT_PROFILE, *,
                special_case=None) -> dict:
    flipped = {u: K + 1 - int(k) for u, k in keys.items()}
    got = sr_comm_min(net, senders, receivers, flipped, messages, K, profile,
                      special_case=special_case)
    return {v: (m, K + 1 - k, u) for v, (m, k, u) in got.items()}


def _prefix(key0: int, bits: int, length: int) -> int:
    return key0 >> (bits - length)


def _min_general(net, S, R, keys, messages, bits, profile) -> dict:
    g = net.graph
    key0 = {u: int(keys[u]) - 1 for u in S.tolist()}
    sset = set(S.tolist())
    probe = sr_comm(net, S, R, {u: None for u in S.tolist()}, profile)
    active = [v for v in R.tolist() if v in probe or v in sset]
    prefix = {v: 0 for v in active}
    best = {}
    T = decay_block_length(g.n, g.max_degree, profile.rep_logn * clog2(g.n))[0]
    for x in range(bits):
        by_sender = {}
        for u in S.tolist():
            by_sender.setdefault(_prefix(key0[u], bits, x + 1), []).append(u)
        by_recv = {}
        for v in active:
            by_recv.setdefault(prefix[v], []).append(v)
        decided = {}
        used = sorted(set(by_sender) | {2 * p for p in by_recv} | {2 * p + 1 for p in by_recv})
        cursor = 0
        for s in used:
            net.idle((s - cursor) * T)
            cursor = s + 1
            snd = by_sender.get(s, [])
            rcv = [v for v in by_recv.get(s >> 1, []) if v not in decided]
            got = sr_comm(net, snd, rcv, {u: messages.get(u) for u in snd}, profile,
                          noop_without_receivers=False)
            for v in rcv:
                own = v in sset and _prefix(key0[v], bits, x + 1) == s
                if own:
                    decided[v] = (s, messages.get(v), v)
                elif v in got:
                    m, u = got[v]
                    decided[v] = (s, m, u)
                elif s & 1:
                    decided[v] = (s, None, None)  # missed: fall through with bit 1
        net.idle(((1 << (x + 1)) - cursor) * T)
        for v in active:
            s, m, u = decided.get(v, ((prefix[v] << 1) | 1, None, None))
            prefix[v] = s
            best[v] = (m, u)
    return {v: (best[v][0], prefix[v] + 1, best[v][1]) for v in active if best[v][1] is not None}


def _min_special(net, S, R, keys, messages, bits, profile) -> dict:
    key0 = {u: int(keys[u]) - 1 for u in S.tolist()}
    probe = sr_comm(net, S, R, {u: None for u in S.tolist()}, profile)
    active = sorted(probe)
    prefix = {v: 0 for v in active}
    alive = set(S.tolist())
    for x in range(bits):
        zero = [u for u in sorted(alive) if not (key0[u] >> (bits - 1 - x)) & 1]
        got = sr_comm(net, zero, active, {u: None for u in zero}, profile,
                      noop_without_receivers=False)
        bit = {v: 0 if v in got else 1 for v in active}
        for v in active:
            prefix[v] = (prefix[v] << 1) | bit[v]
        told = sr_comm(net, active, sorted(alive), bit, profile, noop_without_receivers=False)
        alive = {u for u in alive
                 if u in told and told[u][0] == ((key0[u] >> (bits - 1 - x)) & 1)}
    final = sr_comm(net, sorted(alive), active, {u: messages.get(u) for u in alive}, profile,
                    noop_without_receivers=False)
    out = {}
    for v in active:
        if v in final:
            m, u = final[v]
            out[v] = (m, prefix[v] + 1, u)
    return out


# ------------------------------------------------------------ counting / sum

@dataclass
class CountInfo:
    phase: dict = field(default_factory=dict)  # receiver -> 1 or 2
    heard: dict = field(default_factory=dict)  # receiver -> {sender: phase-1 reception count}
    threshold: float = 0.0
    Z: float = 0.0
    eps: float = 0.0


class SimulationTooLarge(RuntimeError):
    pass


def approx_count_phase(net: RadioNetwork, senders: Iterable, receivers: Iterable, eps: float,
                       profile: ConstantsProfile = DEFAULT_PROFILE) -> tuple:
    """Estimate |N(v)∩𝒮| at each receiver.  Returns ({receiver: estimate}, CountInfo)."""
    g = net.graph
    eps = min(float(eps), profile.eps0)
    Z = (10.0 * profile.c0 / eps) ** 2
    lg = clog2(g.n)
    C = profile.rep_apx
    L1 = math.ceil(C * Z * lg)
    S = _arr(senders)
    R = _arr(receivers)
    info = CountInfo(threshold=0.5 * C * lg / math.e, Z=Z, eps=eps)
    est = {}
    if R.size == 0:
        if S.size:
            net.ledger.transmit_count[S] += net.rng.binomial(L1, 1.0 / Z, size=S.size)
        net.idle(L1)
        return est, info
    sflag = _flags(g.n, S)
    rflag = _flags(g.n, R)
    # a participant matters if it may be heard (sender) or may hear (receiver)
    matters = (sflag & (g.neighbor_count(rflag) > 0)) | (rflag & (g.neighbor_count(sflag) > 0))
    P = np.union1d(S, R)
    part, rest = P[matters[P]], P[~matters[P]]
    if rest.size:
        h = net.rng.binomial(L1, 1.0 / Z, size=rest.size)
        net.ledger.transmit_count[rest] += np.where(sflag[rest], h, 0)
        net.charge_silent_listening(rest, np.where(rflag[rest], L1 - h, 0))
    live_R = part[rflag[part]]
    row, t = bernoulli_events(net.rng, part.size, L1, 1.0 / Z)
    hv = part[row]
    is_s = sflag[hv]
    lis = Listening.always(live_R, L1)
    is_r = rflag[hv]
    lis.exclude_v, lis.exclude_t = hv[is_r & ~is_s], t[is_r & ~is_s]
    rec = net.run_block(L1, hv[is_s], t[is_s], lis, np.full(g.n, 8, dtype=np.int64))
    counts = {}
    for v, u in zip(rec.v.tolist(), rec.u.tolist()):
        d = counts.setdefault(v, {})
        d[u] = d.get(u, 0) + 1
    need2 = []
    for v in R.tolist():
        d = counts.get(v, {})
        info.heard[v] = d
        if any(c < info.threshold for c in d.values()):
            need2.append(v)
            info.phase[v] = 2
        else:
            info.phase[v] = 1
            est[v] = float(len(d))
    _count_phase2(net, S, np.asarray(need2, dtype=np.int64), eps, profile, est)
    return est, info


def phase2_probabilities(max_degree: int, eps: float) -> list:
    p = min(1.0, 2.0 / max(max_degree, 1))
    ps = [p]
    while p < 1.0:
        p = min(1.0, p * (1 + eps))
        ps.append(p)
    return ps


def _count_phase2(net, S, R2, eps, profile, est) -> None:
    g = net.graph
    lg = clog2(g.n)
    per = math.ceil(profile.apx_phase2_C * lg / eps ** 4)
    ps = phase2_probabilities(g.max_degree, eps)
    L2 = per * len(ps)
    if R2.size == 0:
        # nobody listens: senders' transmissions only cost them energy
        if S.size:
            tx = sum(net.rng.binomial(per, 0.5 * p, size=S.size) for p in ps)
            net.ledger.transmit_count[S] += tx
        net.idle(L2)
        return
    sflag = _flags(g.n, S)
    rflag = _flags(g.n, R2)
    heard = g.neighbor_count(rflag)[S] > 0
    live_S = S[heard]
    mute = S[~heard]
    if mute.size:
        net.ledger.transmit_count[mute] += sum(net.rng.binomial(per, 0.5 * p, size=mute.size)
                                               for p in ps)
    part = np.union1d(live_S, R2)
    if part.size * per > 50_000_000:
        raise SimulationTooLarge("approximate counting phase 2 is too long to simulate slot by slot")
    wins = {int(v): np.zeros(len(ps), dtype=np.int64) for v in R2.tolist()}
    for i, p in enumerate(ps):
        heads = net.rng.random((part.size, per)) < 0.5
        send = heads & (net.rng.random((part.size, per)) < p) & sflag[part][:, None]
        listen = ~heads & rflag[part][:, None]
        sr, st = np.nonzero(send)
        lr = np.nonzero(rflag[part])[0]
        lis = Listening(part[lr], 1, listen[lr])
        rec = net.run_block(per, part[sr], st, lis, np.full(g.n, 8, dtype=np.int64))
        for v in rec.v.tolist():
            wins[v][i] += 1
    for v, w in wins.items():
        est[v] = 2.0 / ps[int(np.argmax(w))]


def apx_buckets(W: int, eps_prime: float) -> list:
    ws = [0.0, 1.0]
    while ws[-1] < W:
        ws.append(min(float(W), ws[-1] * (1 + eps_prime)))
    return ws


def sr_comm_apx(net: RadioNetwork, senders: Iterable, receivers: Iterable, values: Mapping,
                W: int, eps: float, profile: ConstantsProfile = DEFAULT_PROFILE) -> dict:
    """Estimate Σ m_u over N⁺(v)∩𝒮 within a factor 1±eps.  Returns {receiver: estimate}."""
    S = _arr(senders)
    R = _arr(receivers)
    for u in S.tolist():
        if not 1 <= int(values[u]) <= W:
            raise ValueError(f"value {values[u]} of sender {u} outside 1..{W}")
    sset = set(S.tolist())
    total = {v: float(values[v]) if v in sset else 0.0 for v in R.tolist()}
    if W == 1:
        got, _ = approx_count_phase(net, S, R, eps, profile)
        for v in total:
            total[v] += got.get(v, 0.0)
        return total
    ws = apx_buckets(W, eps / 3.0)
    for i in range(1, len(ws)):
        lo, hi = ws[i - 1], ws[i]
        members = [u for u in S.tolist() if lo < values[u] <= hi]
        got, _ = approx_count_phase(net, members, R, eps / 3.0, profile)
        for v in total:
            total[v] += got.get(v, 0.0) * hi
    return total


# ------------------------------------------------------- counting constants

def check_aux_cal(N: float, eps: float) -> bool:
    """e^-1 (1 - 0.51 eps^2) <= (1+eps)(1-(1+eps)/N)^(N-1) <= e^-1 (1 - 0.49 eps^2)."""
    base = 1.0 - (1.0 + eps) / N
    if base <= 0:
        return False
    mid = (1.0 + eps) * math.exp((N - 1) * math.log(base))
    lo = math.exp(-1.0) * (1.0 - 0.51 * eps * eps)
    hi = math.exp(-1.0) * (1.0 - 0.49 * eps * eps)
    return lo <= mid <= hi


def aux_cal_grid(profile: ConstantsProfile = DEFAULT_PROFILE, n_min: int = 1_000, n_max: int = 1_000_000,
                 n_points: int = 61, eps_points: int = 41):
    """Yield (N, eps) over log-spaced N and |eps| in [c0/sqrt N, eps0], both signs."""
    for N in np.unique(np.round(np.geomspace(n_min, n_max, n_points))).tolist():
        lo = profile.c0 / math.sqrt(N)
        if lo > profile.eps0:
            continue
        for e in np.linspace(lo, profile.eps0, eps_points).tolist():
            yield N, e
            yield N, -e


def certify_aux_cal(profile: ConstantsProfile = DEFAULT_PROFILE, **kw) -> tuple:
    """(all points pass, number of points checked)."""
    pts = list(aux_cal_grid(profile, **kw))
    return all(check_aux_cal(N, e) for N, e in pts), len(pts)
