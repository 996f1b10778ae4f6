import itertools

import numpy as np
import pytest

from energysim.graph import Graph
from energysim.instances import path_graph, star_graph
from energysim.radio import (IDLE_ACTION, LISTEN_ACTION, NOISE, RECEIVED, SILENCE, CollisionModel, DeviceProgram,
                             EnergyLedger, Listening, ModelConfig, RadioNetwork, RoundAction, RoundLimitExceeded,
                             run_protocol, step_round)

CD = ModelConfig(CollisionModel.CD)
NOCD = ModelConfig(CollisionModel.NOCD)


def test_single_transmitter_is_received_in_both_models():
    g = path_graph(2)
    for model in (CD, NOCD):
        fb = step_round(g, [RoundAction.transmit(b"hi"), LISTEN_ACTION], model)
        assert fb[0] is None
        assert (fb[1].kind, fb[1].payload, fb[1].sender) == (RECEIVED, b"hi", 0)


def test_collision_is_noise_only_with_detection():
    g = star_graph(3)
    acts = [LISTEN_ACTION, RoundAction.transmit(b"a"), RoundAction.transmit(b"b")]
    assert step_round(g, acts, CD)[0].kind == NOISE
    assert step_round(g, acts, NOCD)[0].kind == SILENCE


def test_transmitter_hears_nothing():
    g = path_graph(3)
    fb = step_round(g, [RoundAction.transmit(b"x"), RoundAction.transmit(b"y"), LISTEN_ACTION], CD)
    assert fb[0] is None and fb[1] is None
    assert fb[2].kind == RECEIVED and fb[2].sender == 1


def test_ledger_counts_transmit_and_listen_but_not_idle():
    g = path_graph(3)
    led = EnergyLedger.zeros(3)
    step_round(g, [RoundAction.transmit(b"x"), LISTEN_ACTION, IDLE_ACTION], NOCD, led)
    step_round(g, [IDLE_ACTION, LISTEN_ACTION, LISTEN_ACTION], NOCD, led)
    assert led.transmit_count.tolist() == [1, 0, 0]
    assert led.listen_count.tolist() == [0, 2, 1]
    assert led.round_count == 2
    led.check()


def test_step_round_rejects_wrong_action_count():
    with pytest.raises(ValueError):
        step_round(path_graph(3), [IDLE_ACTION], NOCD)


class _Beacon(DeviceProgram):
    """Vertex 0 transmits its id once; the others listen once and stop."""

    def act(self, r):
        self.done = True
        if self.ctx.id == 0:
            return RoundAction.transmit(b"\x00")
        return LISTEN_ACTION

    def observe(self, r, fb):
        self.output = fb.kind


def test_run_protocol_records_transcript():
    res = run_protocol(star_graph(4), _Beacon, NOCD)
    assert res.outputs == [None, RECEIVED, RECEIVED, RECEIVED]
    assert res.ledger.round_count == 1
    assert res.bytes_sent == 1
    assert len(res.transcript) == 1


class _Forever(DeviceProgram):
    def act(self, r):
        return LISTEN_ACTION


def test_run_protocol_round_cap():
    with pytest.raises(RoundLimitExceeded):
        run_protocol(path_graph(2), _Forever, NOCD, max_rounds=5)


def _block_vs_rounds(g, L, tx, listeners, cd):
    """Run one block and the same slots round by round; return both feedbacks and ledgers."""
    model = ModelConfig(CollisionModel.CD if cd else CollisionModel.NOCD)
    net = RadioNetwork(g, model)
    tx_v = np.array([v for v, t in tx], dtype=np.int64)
    tx_t = np.array([t for v, t in tx], dtype=np.int64)
    rec = net.run_block(L, tx_v, tx_t, Listening.always(listeners, L))
    led = EnergyLedger.zeros(g.n)
    got, noise = set(), set()
    txs = set(tx)
    for t in range(L):
        acts = []
        for v in range(g.n):
            if (v, t) in txs:
                acts.append(RoundAction.transmit(b"."))
            elif v in listeners:
                acts.append(LISTEN_ACTION)
            else:
                acts.append(IDLE_ACTION)
        for v, f in enumerate(step_round(g, acts, model, led)):
            if f is not None and f.kind == RECEIVED:
                got.add((v, t, f.sender))
            elif f is not None and f.kind == NOISE:
                noise.add((v, t))
    block = set(zip(rec.v.tolist(), rec.t.tolist(), rec.u.tolist()))
    bnoise = set(zip(rec.noise_v.tolist(), rec.noise_t.tolist()))
    return block, got, bnoise, noise, net.ledger, led


@pytest.mark.parametrize("cd", [False, True])
def test_block_engine_matches_reference_rounds(cd):
    rng = np.random.default_rng(5)
    g = Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])
    for _ in range(30):
        L = 8
        tx = sorted({(int(rng.integers(6)), int(rng.integers(L))) for _ in range(8)})
        listeners = sorted(set(rng.choice(6, size=4, replace=False).tolist()))
        block, ref, bn, rn, l1, l2 = _block_vs_rounds(g, L, tx, listeners, cd)
        assert block == ref
        assert bn == rn
        assert l1.transmit_count.tolist() == l2.transmit_count.tolist()
        assert l1.listen_count.tolist() == l2.listen_count.tolist()
        assert l1.round_count == l2.round_count


def test_block_rejects_duplicate_and_out_of_range_events():
    net = RadioNetwork(path_graph(2), NOCD)
    with pytest.raises(ValueError):
        net.run_block(4, [0, 0], [1, 1], Listening.nobody(4))
    with pytest.raises(ValueError):
        net.run_block(4, [0], [4], Listening.nobody(4))


def test_round_cap_on_engine():
    net = RadioNetwork(path_graph(2), ModelConfig(round_cap=10))
    net.idle(10)
    with pytest.raises(RoundLimitExceeded):
        net.idle(1)


def test_all_action_combinations_on_triangle():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    kinds = [RoundAction.transmit(b"t"), LISTEN_ACTION, IDLE_ACTION]
    for acts in itertools.product(kinds, repeat=3):
        for model in (CD, NOCD):
            fb = step_round(g, list(acts), model)
            for v, a in enumerate(acts):
                if a.kind != "listen":
                    assert fb[v] is None
                    continue
                k = sum(1 for u in g.neighbors(v) if acts[u].kind == "transmit")
                want = RECEIVED if k == 1 else (NOISE if k > 1 and model.cd else SILENCE)
                assert fb[v].kind == want
