import pytest

from energysim import mincut as Mc
from energysim.decomposition import decompose_offline
from energysim.instances import GeneratorSpec, complete_graph, cycle_graph, generate, k2delta
from energysim.oracles import global_cut_oracle, st_cut_oracle
from energysim.radio import ModelConfig

from gadgets import small_cluster, two_hubs


def test_cut_values_on_single_path():
    # u - a - b - v: cutting one edge separates u from v; merged u=v makes a triangle
    es = [(0, 2), (2, 3), (1, 3)]
    assert Mc.cut_c1(es, 0, 1) == 1
    assert Mc.cut_c2(es, 0, 1) == 2
    assert Mc.cut_c(es) == 1


def test_parallel_paths_become_one_weighted_edge():
    g = two_hubs([3, 3, 3], 9)
    dec = decompose_offline(g)
    cp = Mc.cut_params_offline(g, dec)
    assert cp.pair_sum_c1 == {(0, 1): 3}
    assert cp.pair_min_c2 == {(0, 1): 2}
    red = Mc.reduction_graph(g, dec, cp.capped(6))
    assert red[0][1]["weight"] == 3
    assert cp.capped(2) == {(0, 1): 2}


def test_direct_edge_merges_with_pair_weight():
    g = two_hubs([2, 2], 6, direct=True)
    dec = decompose_offline(g)
    red = Mc.reduction_graph(g, dec, Mc.cut_params_offline(g, dec).capped(6))
    assert red[0][1]["weight"] == 3


def test_weighted_cut_helpers():
    h = Mc._nx([(0, 1), (1, 2), (2, 0)], [2, 3, 4])
    assert Mc.weighted_min_cut(h) == 5
    assert Mc.weighted_st_cut(h, 0, 1) == 5
    assert Mc.weighted_min_cut(Mc._nx([])) == Mc.INF


@pytest.mark.parametrize("g,want", [(cycle_graph(9), 2), (complete_graph(6), 5), (k2delta(5), 2)])
def test_offline_global_cut_known(g, want):
    assert Mc.global_mincut_offline(g) == want
    assert Mc.global_mincut_pipeline_offline(g) == want


def test_st_cut_k2delta():
    assert Mc.st_mincut_offline(k2delta(7), 0, 1) == 7
    assert Mc.st_mincut_pipeline_offline(k2delta(7), 0, 1) == 7


def test_st_rejects_equal_endpoints():
    with pytest.raises(ValueError):
        Mc.st_mincut_offline(cycle_graph(4), 1, 1)


@pytest.mark.parametrize("seed", range(6))
def test_pipeline_on_small_clusters(seed):
    g = small_cluster(seed)
    assert Mc.global_mincut_pipeline_offline(g) == global_cut_oracle(g)
    assert Mc.st_mincut_pipeline_offline(g, 0, g.n - 1) == st_cut_oracle(g, 0, g.n - 1)
    assert Mc.cut_aux_check(g)


def test_cut_aux_check_size_limit():
    with pytest.raises(ValueError):
        Mc.cut_aux_check(cycle_graph(17))


def test_distributed_global_cut():
    g, _ = generate(GeneratorSpec("planar_cluster", {"n": 100, "robust": True}, 1))
    res = Mc.global_mincut_distributed(g, ModelConfig("nocd", 1))
    assert (res.outputs == global_cut_oracle(g)).all()


def test_distributed_st_cut_within_eps():
    g, meta = generate(GeneratorSpec("toroidal_cluster", {"n": 100}, 2))
    s, t = meta["hubs"][0], meta["hubs"][-1]
    res = Mc.st_mincut_pipeline(g, s, t, 0.25, "distributed", ModelConfig("nocd", 2))
    truth = st_cut_oracle(g, s, t)
    assert ((res.outputs >= 0.75 * truth) & (res.outputs <= 1.25 * truth)).all()


def test_dispatch_rejects_unknown_mode():
    with pytest.raises(ValueError):
        Mc.global_mincut_pipeline(cycle_graph(5), mode="guess")
