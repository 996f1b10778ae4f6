import numpy as np
import pytest

from energysim import infra
from energysim.graph import Graph
from energysim.instances import grid_graph, path_graph, random_connected
from energysim.radio import ModelConfig, RadioNetwork


def _net(g, seed=0):
    return RadioNetwork(g, ModelConfig("nocd", seed))


@pytest.mark.parametrize("mode", [infra.ORACLE_CHARGED, infra.IN_MODEL])
def test_labeling_is_good(mode):
    g = grid_graph(4, 5)
    lab = infra.build_good_labeling(_net(g, 1), root=7, mode=mode)
    assert lab.roots == (7,)
    assert infra.validate_labeling(g, lab)


def test_oracle_labeling_is_bfs_distance():
    g = path_graph(6)
    lab = infra.build_good_labeling(_net(g), root=2)
    assert lab.labels.tolist() == [2, 1, 0, 1, 2, 3]
    assert [sorted(l.tolist()) for l in lab.layers()] == [[2], [1, 3], [0, 4], [5]]


def test_scoped_labeling_roots_each_piece():
    g = path_graph(7)
    lab = infra.build_good_labeling(_net(g), scope=[0, 1, 2, 4, 5])
    assert lab.roots == (0, 4)
    assert lab.labels[3] == -1 and lab.labels[6] == -1
    assert infra.validate_labeling(g, lab)


def test_validate_rejects_broken_labels():
    g = path_graph(4)
    bad = infra.GoodLabeling(np.array([0, 2, 1, 2]), (0,))
    assert not infra.validate_labeling(g, bad)
    two_zero = infra.GoodLabeling(np.array([0, 1, 0, 1]), (0,))
    assert not infra.validate_labeling(g, two_zero)


def test_unknown_labeling_mode():
    with pytest.raises(ValueError):
        infra.build_good_labeling(_net(path_graph(3)), mode="guess")


def test_converge_then_diverge_reaches_everyone():
    g = random_connected(40, 3.0, seed=2)
    net = _net(g, 3)
    lab = infra.build_good_labeling(net)
    msgs = {v: v * v for v in (3, 17, 29)}
    held = infra.broadcast_everyone(net, lab, msgs)
    for v in range(g.n):
        assert held[v] == msgs


@pytest.mark.parametrize("strategy", [infra.MULTI_ONCE, infra.REPEAT_ANY_ONE])
def test_broadcast_x(strategy):
    g = grid_graph(5, 5)
    net = _net(g, 4)
    lab = infra.build_good_labeling(net)
    src = {0: "a", 12: "b", 24: "c"}
    got = infra.broadcast_x(net, lab, src, strategy, x=4)
    for v in range(g.n):
        assert got[v] == src


def test_broadcast_x_bound_enforced():
    g = path_graph(3)
    net = _net(g)
    lab = infra.build_good_labeling(net)
    with pytest.raises(ValueError):
        infra.broadcast_x(net, lab, {0: 0, 1: 1}, x=1)
    assert infra.broadcast_x(net, lab, {}, x=0) == {}


def test_converge_cast_any_one_keeps_one_origin():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    net = _net(g)
    lab = infra.build_good_labeling(net, root=0)
    held = infra.converge_cast(net, lab, {1: "x", 2: "y"}, infra.ANY_ONE)
    assert len(held[0]) == 1 and set(held[0]) <= {1, 2}


def test_labeling_charge_formula():
    energy, time = infra.labeling_charge(256, 16, infra.DEFAULT_PROFILE)
    assert energy == 4 * 8 * 8
    assert time == 256 * 4 * 8 * 8
