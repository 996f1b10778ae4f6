import pytest

from energysim import instances as I
from energysim.constants import DEFAULT_PROFILE, load_profile, parse_profile
from energysim.decomposition import decompose_offline
from energysim.graph import GraphError
from energysim.oracles import diameter_oracle


def test_simple_families():
    assert I.path_graph(5).m == 4
    assert I.cycle_graph(5).m == 5
    assert I.star_graph(5).max_degree == 4
    assert I.grid_graph(3, 4).m == 3 * 3 + 2 * 4
    assert I.complete_graph(6).m == 15
    assert I.kn_minus_e(6, (1, 4)).m == 14 and not I.kn_minus_e(6, (1, 4)).has_edge(1, 4)
    assert I.k2delta(4).n == 6 and I.k2delta(4).degree(0) == 4


def test_random_connected_is_connected_and_seeded():
    a = I.random_connected(300, 4.0, seed=5)
    assert a.is_connected() and a.m == 600
    assert a.edges == I.random_connected(300, 4.0, seed=5).edges


def test_bits_helpers():
    # 5 = 101 over three positions, most significant first
    assert I.ones(5, 3) == {1, 3}
    assert I.zeros(5, 3) == {2}
    assert I.ones(0, 4) == set() and I.zeros(0, 4) == {1, 2, 3, 4}


def test_gadget_roles_and_small_diameters():
    g, roles = I.gen_disjointness_gadget([1, 2], [4, 5], 8)
    assert roles.width == 4
    assert g.n == 2 * 4 + 2 + 4
    assert diameter_oracle(g) == 2
    g2, _ = I.gen_disjointness_gadget([1, 2], [2, 5], 8)
    assert diameter_oracle(g2) == 3


def test_gadget_rejects_bad_k():
    with pytest.raises(ValueError):
        I.gen_disjointness_gadget([1], [2], 6)
    with pytest.raises(ValueError):
        I.gen_disjointness_gadget([9], [2], 8)


def test_random_set_pair():
    A, B = I.random_set_pair(256, 8, False, 3)
    assert len(A) == 8 and not set(A) & set(B)
    A, B = I.random_set_pair(256, 8, True, 3)
    assert len(set(A) & set(B)) == 1


@pytest.mark.parametrize("robust", [False, True])
def test_planar_cluster_is_certified(robust):
    g, meta = I.gen_planar_cluster(256, seed=1, robust=robust)
    assert g.n == 256 and g.is_connected()
    assert I.euler_certificate(g)
    dec = decompose_offline(g)
    assert list(dec.hubs) == meta.hubs
    assert [list(c.vertices) for c in dec.components] == [c["vertices"] for c in meta.components]


def test_toroidal_cluster_metadata_matches():
    g, meta = I.gen_toroidal_cluster(400, seed=2)
    assert g.n == 400 and meta.certified_genus == 1
    dec = decompose_offline(g)
    assert list(dec.hubs) == meta.hubs


def test_cluster_generator_rejects_tiny_n():
    with pytest.raises(ValueError):
        I.gen_planar_cluster(20)


def test_generate_dispatch_and_unknown_family():
    g, meta = I.generate(I.GeneratorSpec("grid", {"rows": 3, "cols": 3}))
    assert g.n == 9 and meta["certified_genus"] == 0
    with pytest.raises(ValueError):
        I.generate(I.GeneratorSpec("hypercube", {}))


def test_graph_file_roundtrip(tmp_path):
    g = I.random_connected(30, seed=1)
    p = tmp_path / "g.txt"
    I.save_graph(g, p)
    assert I.load_graph(p).edges == g.edges


@pytest.mark.parametrize("text,msg", [
    ("", "missing"),
    ("3 1\n0 1 2\n", "two integers"),
    ("3 2\n0 1\n", "header says 2"),
    ("3 1\n1 0\n", "0 <= u < v < n"),
    ("3 2\n0 1\n0 1\n", "duplicate"),
    ("4 2\n0 1\n2 3\n", "not connected"),
    ("x 1\n0 1\n", "two integers"),
])
def test_parse_graph_errors(text, msg):
    with pytest.raises(GraphError, match=msg):
        I.parse_graph(text)


def test_parse_graph_allows_comments_and_disconnected_when_asked():
    g = I.parse_graph("# two edges\n4 2\n0 1\n\n2 3\n", require_connected=False)
    assert g.m == 2


def test_profile_parsing(tmp_path, monkeypatch):
    prof = parse_profile("rep_logn = 6  # more sweeps\neps0=0.05\n")
    assert prof.rep_logn == 6 and prof.eps0 == 0.05 and prof.rep_all == DEFAULT_PROFILE.rep_all
    with pytest.raises(ValueError):
        parse_profile("bogus = 1")
    with pytest.raises(ValueError):
        parse_profile("rep_logn 3")
    with pytest.raises(ValueError):
        parse_profile("rep_logn = 0")
    p = tmp_path / "prof.txt"
    p.write_text("bfs_C = 3\n")
    monkeypatch.setenv("ENERGYSIM_PROFILE", str(p))
    assert load_profile().bfs_C == 3.0
