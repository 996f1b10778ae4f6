import pytest

from energysim import decomposition as D
from energysim.instances import GeneratorSpec, generate, star_graph
from energysim.oracles import brute_force_components
from energysim.radio import ModelConfig, RadioNetwork

from gadgets import hub_with_paths, two_hubs


def test_component_types():
    assert D.component_type(3, 1, 5) == 1
    assert D.component_type(5, 2, 5) == 2
    assert D.component_type(6, 1, 5) == 3
    assert D.component_type(2, 3, 5) == 3
    assert D.component_type(2, 0, 5) == 3


def test_star_center_is_only_hub():
    dec = D.decompose_offline(star_graph(25))
    assert dec.threshold == 5
    assert dec.hubs == (0,)
    assert len(dec.C1[0]) == 24
    assert dec.gh_edges == ()


def test_two_hub_gadget_pairs():
    g = two_hubs([2, 3, 4], 8)
    dec = D.decompose_offline(g)
    assert dec.hubs == (0, 1)
    assert len(dec.C2[(0, 1)]) == 3
    assert dec.gh_edges == ((0, 1),)
    assert dec.fstar == {(0, 1): 0}
    assert all(dec.components[i].attach == (0, 1) for i in dec.C2[(0, 1)])


def test_component_edges_include_attachment_edges():
    g = hub_with_paths([2], 6)
    assert D.component_edges(g, (1, 2)) == [(0, 1), (1, 2)]


def test_degeneracy_owner_map_bounded_on_planar_triangulation():
    # wheel: center 0 and rim 1..8
    vs = list(range(9))
    es = [(0, i) for i in range(1, 9)] + [(i, i % 8 + 1) for i in range(1, 9)]
    owner = D.degeneracy_owner_map(vs, [tuple(sorted(e)) for e in es])
    loads = {}
    for w in owner.values():
        loads[w] = loads.get(w, 0) + 1
    assert len(owner) == len(es)
    assert max(loads.values()) <= 3


@pytest.mark.parametrize("family,n,seed", [("planar_cluster", 256, 0), ("toroidal_cluster", 256, 1),
                                           ("planar_cluster", 400, 2)])
def test_offline_components_match_brute_force(family, n, seed):
    g, meta = generate(GeneratorSpec(family, {"n": n}, seed))
    dec = D.decompose_offline(g)
    assert sorted(list(c.vertices) for c in dec.components) == sorted(brute_force_components(g, dec.threshold))
    assert list(dec.hubs) == meta["hubs"]


def test_verify_structure_passes_on_cluster():
    g, meta = generate(GeneratorSpec("toroidal_cluster", {"n": 256}, 3))
    rep = D.verify_structure(g, D.decompose_offline(g), meta["certified_genus"])
    assert rep.ok
    assert rep.max_owner_load <= 7


def test_decomposition_json_roundtrip_fields():
    dec = D.decompose_offline(two_hubs([2], 5))
    d = dec.to_dict()
    assert d["hubs"] == [0, 1]
    assert d["fstar"] == [[0, 1, 0]]


def test_learned_basic_info_matches_offline():
    g, _ = generate(GeneratorSpec("planar_cluster", {"n": 100}, 4))
    net = RadioNetwork(g, ModelConfig("nocd", 4))
    info = D.learn_basic_info(net)
    bad = info.mismatches(D.decompose_offline(g), g)
    assert sum(bad.values()) == 0


def test_decomposition_from_knowledge_recomputes_owner():
    dec = D.decompose_offline(two_hubs([2, 2], 6))
    again = D.decomposition_from_knowledge(dec.n, dec.threshold, dec.hubs, dec.components, dec.gh_edges)
    assert again.fstar == dec.fstar and again.C2 == dec.C2
