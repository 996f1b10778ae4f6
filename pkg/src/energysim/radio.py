"""Half-duplex radio channel with exact energy accounting.

Two execution paths share the same channel rules:

* `step_round` / `run_protocol` execute one round at a time with explicit
  per-device programs; they are the reference semantics.
* `RadioNetwork.run_block` executes a whole block of slots at once from
  sparse transmit events and a listening schedule.  Protocols built from
  fixed random schedules (every SR-comm variant) use it, since a block of
  10^8 mostly-silent slots costs only as much as its transmissions.
"""
from __future__ import annotations

import math
import pickle
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .graph import Graph


class CollisionModel(str, Enum):
    CD = "cd"
    NOCD = "nocd"


@dataclass(frozen=True)
class ModelConfig:
    collision_model: CollisionModel = CollisionModel.NOCD
    seed: int = 0
    round_cap: Optional[int] = None

    @property
    def cd(self) -> bool:
        return CollisionModel(self.collision_model) is CollisionModel.CD


class RoundLimitExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- actions

TRANSMIT, LISTEN, IDLE = "transmit", "listen", "idle"
RECEIVED, SILENCE, NOISE = "received", "silence", "noise"


@dataclass(frozen=True)
class RoundAction:
    kind: str
    payload: Optional[bytes] = None

    @staticmethod
    def transmit(payload: bytes) -> "RoundAction":
        return RoundAction(TRANSMIT, bytes(payload))


LISTEN_ACTION = RoundAction(LISTEN)
IDLE_ACTION = RoundAction(IDLE)


@dataclass(frozen=True)
class ChannelFeedback:
    kind: str
    payload: Optional[bytes] = None
    sender: Optional[int] = None


@dataclass
class EnergyLedger:
    transmit_count: np.ndarray
    listen_count: np.ndarray
    round_count: int = 0

    @classmethod
    def zeros(cls, n: int) -> "EnergyLedger":
        return cls(np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64), 0)

    def energy(self) -> np.ndarray:
        return self.transmit_count + self.listen_count

    def copy(self) -> "EnergyLedger":
        return EnergyLedger(self.transmit_count.copy(), self.listen_count.copy(), self.round_count)

    def check(self) -> None:
        if np.any(self.energy() > self.round_count):
            raise AssertionError("a vertex accessed the channel more often than there were rounds")


def algorithm_energy(ledger: EnergyLedger) -> int:
    e = ledger.energy()
    return int(e.max()) if e.size else 0


def random_bits(rng: np.random.Generator, shape) -> np.ndarray:
    """Fair coins as a bool array, eight per random byte."""
    k = int(np.prod(shape))
    raw = np.frombuffer(rng.bytes((k + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw)[:k].astype(bool).reshape(shape)


def payload_size(obj) -> int:
    if isinstance(obj, (bytes, bytearray)):
        return len(obj)
    return len(pickle.dumps(obj, protocol=4))


# ------------------------------------------------------- reference rounds

def step_round(graph: Graph, actions: Sequence[RoundAction], model: ModelConfig,
               ledger: Optional[EnergyLedger] = None) -> list:
    """Resolve one round.  Returns per-vertex feedback (None for non-listeners)."""
    if len(actions) != graph.n:
        raise ValueError("need exactly one action per vertex")
    out: list = [None] * graph.n
    for v, a in enumerate(actions):
        if a.kind == TRANSMIT:
            if ledger is not None:
                ledger.transmit_count[v] += 1
            continue
        if a.kind != LISTEN:
            continue
        if ledger is not None:
            ledger.listen_count[v] += 1
        talkers = [u for u in graph.neighbors(v) if actions[u].kind == TRANSMIT]
        if len(talkers) == 1:
            u = talkers[0]
            out[v] = ChannelFeedback(RECEIVED, actions[u].payload, u)
        elif len(talkers) > 1 and model.cd:
            out[v] = ChannelFeedback(NOISE)
        else:
            out[v] = ChannelFeedback(SILENCE)
    if ledger is not None:
        ledger.round_count += 1
    return out


@dataclass
class DeviceContext:
    id: int
    n: int
    max_degree: int
    rng: np.random.Generator


class DeviceProgram:
    """Per-device state machine.  Subclasses override `act` and `observe`."""

    done = False
    output = None

    def __init__(self, ctx: DeviceContext):
        self.ctx = ctx

    def act(self, round_no: int) -> RoundAction:
        return IDLE_ACTION

    def observe(self, round_no: int, feedback: ChannelFeedback) -> None:
        pass


@dataclass
class ProtocolResult:
    outputs: list
    ledger: EnergyLedger
    transcript: list
    bytes_sent: int


def default_round_cap(n: int) -> int:
    lg = max(1.0, math.log2(max(n, 2)))
    return int(10 * max(n, 2) ** 1.5 * lg ** 3)


def run_protocol(graph: Graph, program: Callable[[DeviceContext], DeviceProgram],
                 model: ModelConfig, max_rounds: Optional[int] = None) -> ProtocolResult:
    cap = max_rounds if max_rounds is not None else (model.round_cap or default_round_cap(graph.n))
    devices = [program(DeviceContext(v, graph.n, graph.max_degree,
                                     np.random.default_rng([model.seed & (2**64 - 1), v])))
               for v in range(graph.n)]
    ledger = EnergyLedger.zeros(graph.n)
    transcript = []
    sent = 0
    r = 0
    while not all(d.done for d in devices):
        if r >= cap:
            raise RoundLimitExceeded(f"protocol still running after {cap} rounds")
        actions = [d.act(r) if not d.done else IDLE_ACTION for d in devices]
        fb = step_round(graph, actions, model, ledger)
        for v, f in enumerate(fb):
            if f is not None:
                devices[v].observe(r, f)
        sent += sum(len(a.payload or b"") for a in actions if a.kind == TRANSMIT)
        transcript.append(tuple((a.kind, None if f is None else (f.kind, f.sender))
                                for a, f in zip(actions, fb)))
        r += 1
    return ProtocolResult([d.output for d in devices], ledger, transcript, sent)


# ----------------------------------------------------------- block engine

@dataclass
class Listening:
    """Which vertices listen in which slots of a block.

    Slots are cut into equal segments; `mask[i, j]` says whether
    `vertices[i]` listens throughout segment j, except for the individual
    `(exclude_v, exclude_t)` slots where it idles.  A vertex that transmits
    in a slot it would listen in transmits instead (sender role wins).
    """
    vertices: np.ndarray
    seg_len: int
    mask: np.ndarray
    exclude_v: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    exclude_t: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @classmethod
    def always(cls, vertices, length: int) -> "Listening":
        vs = np.asarray(vertices, dtype=np.int64)
        return cls(vs, max(length, 1), np.ones((len(vs), 1), dtype=bool))

    @classmethod
    def nobody(cls, length: int) -> "Listening":
        return cls(np.zeros(0, dtype=np.int64), max(length, 1), np.zeros((0, 1), dtype=bool))


@dataclass
class Reception:
    v: np.ndarray  # listener
    t: np.ndarray  # slot within block
    u: np.ndarray  # sender
    noise_v: np.ndarray
    noise_t: np.ndarray

    def first_sender(self) -> dict:
        """Map listener -> sender of its earliest reception."""
        out = {}
        for v, u in zip(self.v.tolist(), self.u.tolist()):
            out.setdefault(v, u)
        return out

    def pairs(self) -> list:
        """Distinct (listener, sender) pairs that got through."""
        if self.v.size == 0:
            return []
        n = int(max(self.v.max(), self.u.max())) + 1
        k = np.unique(self.v * n + self.u)
        return list(zip((k // n).tolist(), (k % n).tolist()))


@dataclass
class BlockRecord:
    start: int
    length: int
    tx_v: np.ndarray
    tx_t: np.ndarray
    listening: Listening
    reception: Reception


def _lookup(sorted_keys: np.ndarray, keys: np.ndarray) -> np.ndarray:
    if sorted_keys.size == 0 or keys.size == 0:
        return np.zeros(keys.shape, dtype=bool)
    i = np.searchsorted(sorted_keys, keys)
    i[i == sorted_keys.size] = 0
    return sorted_keys[i] == keys


class RadioNetwork:
    """Engine value: graph, collision model, RNG, ledger and round clock."""

    def __init__(self, graph: Graph, model: ModelConfig, *, record: bool = False):
        self.graph = graph
        self.model = model
        self.rng = np.random.default_rng(model.seed & (2**64 - 1))
        self.ledger = EnergyLedger.zeros(graph.n)
        self.bytes_sent = 0
        self.records: Optional[list] = [] if record else None
        self.counters: dict = {}

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def max_degree(self) -> int:
        return self.graph.max_degree

    def _advance(self, length: int) -> None:
        self.ledger.round_count += int(length)
        cap = self.model.round_cap
        if cap is not None and self.ledger.round_count > cap:
            raise RoundLimitExceeded(f"round cap {cap} exceeded")

    def idle(self, length: int) -> None:
        """Slots in which no device touches the channel."""
        if length > 0:
            self._advance(length)

    def charge_silent_listening(self, vertices, counts) -> None:
        """Listening by devices that have no possible transmitter in range.

        Equivalent to including them in a block's schedule; the caller
        guarantees they neither transmit nor have a transmitting neighbor.
        """
        np.add.at(self.ledger.listen_count, np.asarray(vertices, dtype=np.int64),
                  np.asarray(counts, dtype=np.int64))

    def bump(self, key: str, amount: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + amount

    def run_block(self, length: int, tx_v, tx_t, listening: Listening,
                  payload_bytes: Optional[np.ndarray] = None) -> Reception:
        L = int(length)
        tx_v = np.asarray(tx_v, dtype=np.int64)
        tx_t = np.asarray(tx_t, dtype=np.int64)
        g = self.graph
        n_seg = listening.mask.shape[1] if listening.mask.ndim == 2 else 1
        if listening.vertices.size and listening.seg_len * n_seg < L:
            raise ValueError("listening schedule shorter than block")
        if tx_v.size:
            if tx_t.min() < 0 or tx_t.max() >= L:
                raise ValueError("transmit slot outside block")
        tx_keys = np.unique(tx_v * L + tx_t)
        if tx_keys.size != tx_v.size:
            raise ValueError("duplicate transmit event")

        rowmap = np.full(g.n, -1, dtype=np.int64)
        rowmap[listening.vertices] = np.arange(listening.vertices.size)
        excl_keys = np.unique(listening.exclude_v * L + listening.exclude_t)

        # energy: transmissions
        if tx_v.size:
            self.ledger.transmit_count += np.bincount(tx_v, minlength=g.n)
            if payload_bytes is not None:
                self.bytes_sent += int(np.asarray(payload_bytes, dtype=np.int64)[tx_v].sum())
        # energy: listening
        if listening.vertices.size:
            seg_counts = listening.mask.sum(axis=1).astype(np.int64)
            seg_len = listening.seg_len
            # last segment may run past the block end
            last_full = L - (n_seg - 1) * seg_len
            listen = seg_counts * seg_len
            if last_full != seg_len:
                listen -= listening.mask[:, n_seg - 1].astype(np.int64) * (seg_len - last_full)
            lost = np.union1d(excl_keys, tx_keys)
            if lost.size:
                lv, lt = lost // L, lost % L
                r = rowmap[lv]
                ok = r >= 0
                lv, lt, r = lv[ok], lt[ok], r[ok]
                inside = listening.mask[r, lt // seg_len]
                np.subtract.at(listen, r[inside], 1)
            self.ledger.listen_count[listening.vertices] += listen

        # deliveries
        empty = np.zeros(0, dtype=np.int64)
        rec = Reception(empty, empty, empty, empty, empty)
        if tx_v.size and listening.vertices.size:
            deg = g.degrees[tx_v]
            total = int(deg.sum())
            starts = np.cumsum(deg) - deg
            src = np.repeat(np.arange(tx_v.size), deg)
            nb = g.indices[np.arange(total) + np.repeat(g.indptr[tx_v] - starts, deg)]
            r = rowmap[nb]
            t = tx_t[src]
            # one pass over (listener row, segment); rows of non-listeners map to a padded all-False row
            seg = listening.mask
            padded = np.zeros((seg.shape[0] + 1, seg.shape[1]), dtype=bool)
            padded[:-1] = seg
            keep = np.nonzero(padded[r, t // listening.seg_len])[0]
            src, r, t = src[keep], r[keep], t[keep]
            rkey = r * L + t
            cells = listening.vertices.size * L
            if cells <= 40_000_000:
                busy = np.zeros(cells, dtype=bool)
                tr = rowmap[tx_v]
                own = tr >= 0
                busy[tr[own] * L + tx_t[own]] = True
                er = rowmap[listening.exclude_v]
                ok = er >= 0
                busy[er[ok] * L + listening.exclude_t[ok]] = True
                keep = np.nonzero(~busy[rkey])[0]
            else:
                key = listening.vertices[r] * L + t
                keep = np.nonzero(~_lookup(tx_keys, key) & ~_lookup(excl_keys, key))[0]
            src, rkey = src[keep], rkey[keep]
            if rkey.size:
                order = np.argsort(rkey)
                sk = rkey[order]
                head = np.ones(sk.size, dtype=bool)
                head[1:] = sk[1:] != sk[:-1]
                starts = np.nonzero(head)[0]
                cnt = np.diff(np.append(starts, sk.size))
                sel = order[starts[cnt == 1]]
                rv = listening.vertices[rkey[sel] // L]
                rec = Reception(rv, tx_t[src[sel]], tx_v[src[sel]], empty, empty)
                if self.model.cd:
                    many = sk[starts[cnt > 1]]
                    rec.noise_v, rec.noise_t = listening.vertices[many // L], many % L
        if self.records is not None:
            self.records.append(BlockRecord(self.ledger.round_count, L, tx_v.copy(), tx_t.copy(),
                                            listening, rec))
        self._advance(L)
        return rec


# --------------------------------------------------------- random events

def bernoulli_events(rng: np.random.Generator, rows: int, length: int, p) -> tuple:
    """Independent Bernoulli trials on a rows x length grid.

    `p` is a scalar or a per-slot probability vector of size `length`.
    Returns (row, slot) of the successes, sorted by row then slot.
    """
    if rows <= 0 or length <= 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    if np.ndim(p) == 0:
        p = float(p)
        if p <= 0:
            e = np.zeros(0, dtype=np.int64)
            return e, e
        if p >= 1:
            r = np.repeat(np.arange(rows, dtype=np.int64), length)
            return r, np.tile(np.arange(length, dtype=np.int64), rows)
        if rows * length <= 2_000_000:
            hit = rng.random((rows, length)) < p
            r, t = np.nonzero(hit)
            return r.astype(np.int64), t.astype(np.int64)
        return _geometric_events(rng, rows, length, p)
    probs = np.asarray(p, dtype=float)
    out_r, out_t = [], []
    chunk = max(1, 2_000_000 // length)
    for r0 in range(0, rows, chunk):
        k = min(chunk, rows - r0)
        hit = rng.random((k, length)) < probs
        r, t = np.nonzero(hit)
        out_r.append(r.astype(np.int64) + r0)
        out_t.append(t.astype(np.int64))
    return np.concatenate(out_r), np.concatenate(out_t)


def _geometric_events(rng, rows, length, p):
    mu = length * p
    k = int(mu + 6 * math.sqrt(mu) + 8)
    gaps = rng.geometric(p, size=(rows, k))
    pos = np.cumsum(gaps, axis=1) - 1
    short = np.nonzero(pos[:, -1] < length)[0]
    parts_r = [np.nonzero(pos < length)[0]]
    parts_t = [pos[pos < length]]
    for row in short.tolist():
        cur = int(pos[row, -1])
        extra = []
        while True:
            step = rng.geometric(p, size=k)
            nxt = cur + np.cumsum(step)
            extra.append(nxt[nxt < length])
            if nxt[-1] >= length:
                break
            cur = int(nxt[-1])
        e = np.concatenate(extra)
        parts_r.append(np.full(e.size, row, dtype=np.int64))
        parts_t.append(e)
    r = np.concatenate(parts_r).astype(np.int64)
    t = np.concatenate(parts_t).astype(np.int64)
    order = np.lexsort((t, r))
    return r[order], t[order]


# ------------------------------------------------------ transcript checks

def validate_block(graph: Graph, rec: BlockRecord, cd: bool) -> None:
    """Slot-by-slot re-derivation of one recorded block (small blocks only)."""
    lis = rec.listening
    excluded = set(zip(lis.exclude_v.tolist(), lis.exclude_t.tolist()))
    tx = {}
    for v, t in zip(rec.tx_v.tolist(), rec.tx_t.tolist()):
        tx.setdefault(t, set()).add(v)
    listening = {}
    for i, v in enumerate(lis.vertices.tolist()):
        for t in range(rec.length):
            if lis.mask[i, t // lis.seg_len] and (v, t) not in excluded:
                if v in tx.get(t, ()):
                    continue  # sender role wins; never both in one slot
                listening.setdefault(t, set()).add(v)
    got = {(int(v), int(t)): int(u) for v, t, u in zip(rec.reception.v, rec.reception.t, rec.reception.u)}
    noise = set(zip(rec.reception.noise_v.tolist(), rec.reception.noise_t.tolist()))
    for t in range(rec.length):
        talkers = tx.get(t, set())
        for v in listening.get(t, ()):
            assert v not in talkers
            nb = [u for u in graph.neighbors(v) if u in talkers]
            if len(nb) == 1:
                assert got.get((v, t)) == nb[0], (v, t)
            else:
                assert (v, t) not in got
                assert ((v, t) in noise) == (cd and len(nb) > 1)
    for (v, t), u in got.items():
        assert u in graph.neighbors(v) and u in tx.get(t, ()) and v in listening.get(t, ())
