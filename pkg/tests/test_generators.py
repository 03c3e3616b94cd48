import json

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from blockpart.decomposition import TreeDecomposition
from blockpart.generators import (
    GenerationError, complete_kary_tree, generate, girth, grid, instance_hash,
    layered_genus_instance, partial_ktree, regular_high_girth, sparse_plane_graph,
    stacked_triangulation, write_corpus,
)
from blockpart.graph import Graph, components

from oracles import to_nx


def test_grid_small():
    G, R, td = grid(1, 1)
    assert G.n == 1 and G.m == 0
    G, R, td = grid(2, 2)
    assert G.m == 4 and nx.is_isomorphic(to_nx(G), nx.cycle_graph(4))
    assert len(R.faces()) == 2       # one inner face plus the outer one
    td.validate(G)


def test_grid_12():
    G, R, td = grid(12, 12)
    assert (G.n, G.m) == (144, 264)
    assert R.euler_check()
    td.validate(G)
    assert td.width == 12
    assert nx.is_isomorphic(to_nx(G), nx.grid_2d_graph(12, 12))


def test_grid_rejects_empty():
    with pytest.raises(GenerationError):
        grid(0, 3)


def test_kary_trees():
    G, R, td = complete_kary_tree(1, 5)
    assert nx.is_isomorphic(to_nx(G), nx.path_graph(6))
    G, R, td = complete_kary_tree(2, 3)
    assert G.n == 15 and nx.is_tree(to_nx(G))
    td.validate(G)
    G, R, td = complete_kary_tree(3, 2)
    assert G.n == 13 and G.degree(0) == 3
    td.validate(G)


def test_stacked_k4_and_small():
    G, R = stacked_triangulation(4, 0)
    assert nx.is_isomorphic(to_nx(G), nx.complete_graph(4))
    for n in (1, 2, 3):
        G, R = stacked_triangulation(n, 0)
        assert G.n == n and G.m == n * (n - 1) // 2


def test_stacked_frozen_hash():
    obj = generate("triangulation", seed=1, n=10)
    assert instance_hash(obj) == "57961afa037164a1495e4d029d3e3001b466a0f0ac74bf7c98aafad52f7c53d0"


@given(st.integers(4, 200), st.integers(0, 10 ** 6))
def test_stacked_is_triangulation(n, seed):
    G, R = stacked_triangulation(n, seed)
    assert G.m == 3 * n - 6
    assert R.euler_check()
    assert all(len(f) == 3 for f in R.faces())
    assert nx.check_planarity(to_nx(G))[0]


@given(st.integers(4, 150), st.integers(0, 10 ** 6))
def test_sparse_plane_connected(n, seed):
    G, R = sparse_plane_graph(n, seed)
    assert len(components(G, range(G.n))) == 1
    assert R.euler_check()
    assert G.m <= 3 * n - 6


@given(st.integers(20, 300), st.integers(1, 4), st.integers(0, 4), st.integers(0, 10 ** 6))
def test_partial_ktree(n, k, spare, seed):
    D = k + 1 + spare
    G, td = partial_ktree(n, k, D, seed)
    assert G.n == n
    assert G.max_degree() <= D
    assert len(components(G, range(n))) == 1
    td.validate(G)
    assert td.width <= k


def test_partial_ktree_needs_spare_degree():
    with pytest.raises(GenerationError):
        partial_ktree(50, 3, 3, 0)


def test_girth_helper_against_networkx():
    for G in (Graph(5, [(i, (i + 1) % 5) for i in range(5)]), grid(4, 4)[0], Graph(3, [(0, 1)])):
        assert girth(G) == nx.girth(to_nx(G))


@pytest.mark.parametrize("n,g,seed", [(200, 8, 0), (400, 9, 1), (60, 5, 3)])
def test_regular_high_girth(n, g, seed):
    G = regular_high_girth(n, g, seed)
    H = to_nx(G)
    assert G.n == n
    assert all(G.degree(v) == 4 for v in range(n))
    assert nx.girth(H) >= g


def test_regular_high_girth_impossible():
    # Moore bound for 4-regular graphs of girth 9 exceeds 120
    with pytest.raises(GenerationError):
        regular_high_girth(120, 9, 0, budget=20_000)


def test_layered_genus_zero_has_no_paths():
    G, L, paths = layered_genus_instance(0, 2, 0)
    assert paths == []
    assert nx.check_planarity(to_nx(G))[0]


@pytest.mark.parametrize("g", [1, 2])
def test_layered_genus_paths(g):
    G, L, paths = layered_genus_instance(g, 2, 5)
    assert len(paths) == 2 * g
    for p in paths:
        assert [L.layer_of[v] for v in p] == list(range(len(p)))
    tree = {v for p in paths for v in p}
    H = to_nx(G)
    H.remove_nodes_from(tree)
    assert nx.check_planarity(H)[0]


def test_layered_genus_frozen_hash():
    obj = generate("genus", seed=7, g=1, ell=2)
    assert instance_hash(obj) == "6d8c09452108ddd73b5c38fd16b00bb7bdf55d685e3e4aa1ccc43df92c228b28"


def test_generate_unknown_kind():
    with pytest.raises(GenerationError):
        generate("hypercube")


@pytest.mark.parametrize("kind,params", [
    ("grid", {"m": 3, "n": 4}), ("triangulation", {"n": 30}), ("plane", {"n": 30}),
    ("tree", {"b": 2, "h": 3}), ("ktree", {"n": 40, "k": 2}), ("girth", {"n": 60, "g": 5}),
    ("genus", {"g": 1, "ell": 2}),
])
def test_generate_deterministic(kind, params):
    a = generate(kind, seed=3, **params)
    b = generate(kind, seed=3, **params)
    assert instance_hash(a) == instance_hash(b)
    G = Graph.from_json(a["graph"])
    if "decomposition" in a:
        TreeDecomposition.from_json(a["decomposition"]).validate(G)


def test_write_corpus(tmp_path):
    m1 = write_corpus(tmp_path / "a", "triangulation", [0, 1, 2], n=20)
    m2 = write_corpus(tmp_path / "b", "triangulation", [0, 1, 2], n=20)
    assert m1 == m2
    assert len(m1["instances"]) == 3
    on_disk = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert on_disk == m1
    assert (tmp_path / "a" / "triangulation_1.json").read_bytes() == (tmp_path / "b" / "triangulation_1.json").read_bytes()
