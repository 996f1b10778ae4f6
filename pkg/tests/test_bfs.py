import numpy as np
import pytest

from energysim import bfs as B
from energysim.graph import Graph
from energysim.instances import cycle_graph, grid_graph, path_graph, random_connected
from energysim.oracles import bfs_oracle
from energysim.radio import ModelConfig, RadioNetwork


def test_parameter_formulas():
    assert B.sqrt_ceil(256) == 16 and B.sqrt_ceil(257) == 17 and B.sqrt_ceil(1) == 1
    assert B.wave_radius(100, 2.0) == 20
    assert B.start_range(256) == 2 * 16 * 8
    # c_M * lg / log2(lg) with lg = 8
    assert B.wave_capacity(256, 4.0) == 11


def test_landmarks_contain_source_and_are_seeded():
    g = random_connected(200, seed=1)
    a = B.sample_landmarks(g, 5, seed=3)
    b = B.sample_landmarks(g, 5, seed=3)
    assert 5 in a.members
    assert a.members == b.members and a.start == b.start
    assert all(0 <= t < B.start_range(200) for t in a.start.values())


def test_hitting_set_check_on_path():
    g = path_graph(10)
    assert B.hitting_set_check(g, 0, [0, 3, 6, 9], 3)
    assert not B.hitting_set_check(g, 0, [0, 9], 3)
    assert B.hitting_set_check(g, 0, [0], 11)


def test_congestion_check_counts_coinciding_waves():
    g = path_graph(5)
    lm = B.LandmarkSet((0, 4), {0: 0, 4: 0}, {0: 1, 4: 2}, 10, 0)
    # both waves reach vertex 2 at epoch 2
    assert B.congestion_check(g, lm) == 2


@pytest.mark.parametrize("g", [path_graph(30), cycle_graph(41), grid_graph(7, 8)])
def test_bfs_matches_oracle_on_small_graphs(g):
    res = B.bfs(g, 0, ModelConfig("nocd", 1))
    assert res.dist.tolist() == bfs_oracle(g, 0)
    assert res.hitting_ok
    assert res.max_congestion <= res.M


def test_bfs_random_graph_and_energy_bookkeeping():
    g = random_connected(150, seed=4)
    res = B.bfs(g, 11, ModelConfig("cd", 2))
    assert res.dist.tolist() == bfs_oracle(g, 11)
    assert res.max_energy == int(res.energy.max())
    assert sum(res.stage_energy.values()) >= res.max_energy
    assert res.max_energy <= res.rounds


def test_bfs_single_vertex():
    res = B.bfs(Graph.from_edges(1, []), 0, ModelConfig())
    assert res.dist.tolist() == [0]


def test_bfs_rejects_bad_source():
    with pytest.raises(ValueError):
        B.bfs(path_graph(3), 3, ModelConfig())


def test_local_phase_rows_never_undercount():
    # a row is the length of a real walk; a missed delivery can only make it longer
    g = grid_graph(6, 6)
    exact = total = 0
    for seed in range(3):
        net = RadioNetwork(g, ModelConfig("nocd", seed))
        lm = B.sample_landmarks(g, 0, rng=net.rng)
        table = B.local_bfs_phase(net, lm)
        for v, row in enumerate(table.rows):
            for u, d in row.items():
                true = bfs_oracle(g, u)[v]
                assert true <= d <= lm.radius
                exact += d == true
                total += 1
    assert exact / total >= 0.99


def test_bfs_deterministic():
    g = random_connected(80, seed=6)
    a = B.bfs(g, 0, ModelConfig("nocd", 9))
    b = B.bfs(g, 0, ModelConfig("nocd", 9))
    assert (a.energy == b.energy).all() and a.rounds == b.rounds
    assert np.array_equal(a.dist, b.dist)
