import math

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from blockpart.generators import grid
from blockpart.graph import (Graph, GraphError, Partition, bfs_layering, bfs_spanning_tree,
                             components, distance, dumps, h_partition_width_check,
                             is_connected_partition, quotient, strong_product)
from oracles import graphs, graph_and_partition, to_nx
import oracles


def path_graph(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def blocks_of_6x6():
    """3x3 blocks of the 6x6 grid, labelled row-major like the 2x2 grid."""
    return Partition(tuple((r // 3) * 2 + (c // 3) for r in range(6) for c in range(6)))


class TestGraph:
    def test_rejects_bad_edges(self):
        with pytest.raises(GraphError):
            Graph(2, [(0, 0)])
        with pytest.raises(GraphError):
            Graph(2, [(0, 1), (1, 0)])
        with pytest.raises(GraphError):
            Graph(2, [(0, 2)])

    def test_json_round_trip(self):
        G, _, _ = grid(3, 4)
        assert Graph.from_json(G.to_json()) == G

    def test_dumps_is_canonical(self):
        assert dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_induced_subgraph_ids(self):
        H, ids = path_graph(5).induced_subgraph([4, 1, 2])
        assert ids == [1, 2, 4]
        assert sorted(H.edges()) == [(0, 1)]


class TestLayering:
    def test_path(self):
        assert bfs_layering(path_graph(3), 0).layer_of == (0, 1, 2)

    def test_complete(self):
        assert bfs_layering(complete(4), 2).layer_of == (1, 1, 0, 1)

    def test_grid_corner(self):
        G, _, _ = grid(5, 5)
        L = bfs_layering(G, 0)
        assert L.layer_of[24] == 8
        assert nx.shortest_path_length(to_nx(G), 0, 24) == 8

    def test_unreachable_marked(self):
        L = bfs_layering(Graph(3, [(0, 1)]), 0)
        assert L.layer_of[2] is None

    @given(graphs(max_n=15))
    def test_adjacent_layers_differ_by_at_most_one(self, G):
        L = bfs_layering(G, 0)
        for u, v in G.edges():
            if L.layer_of[u] is not None:
                assert abs(L.layer_of[u] - L.layer_of[v]) <= 1
        ref = nx.single_source_shortest_path_length(to_nx(G), 0)
        assert {v: d for v, d in enumerate(L.layer_of) if d is not None} == ref


class TestSpanningTree:
    def test_path(self):
        T = bfs_spanning_tree(path_graph(3), bfs_layering(path_graph(3), 0))
        assert T.parent == {0: None, 1: 0, 2: 1}

    def test_cycle_lowest_parent(self):
        C4 = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        T = bfs_spanning_tree(C4, 0)
        assert (T.parent[1], T.parent[3], T.parent[2]) == (0, 0, 1)

    def test_star(self):
        star = Graph(6, [(0, i) for i in range(1, 6)])
        assert all(bfs_spanning_tree(star, 0).parent[i] == 0 for i in range(1, 6))

    @given(graphs(max_n=15, connected=True))
    def test_parent_one_layer_up(self, G):
        L = bfs_layering(G, 0)
        T = bfs_spanning_tree(G, L)
        for v, p in T.parent.items():
            if p is not None:
                assert L.layer_of[p] == L.layer_of[v] - 1
                assert p == min(w for w in G.adj[v] if L.layer_of[w] == L.layer_of[v] - 1)


class TestDistance:
    def test_overlap(self):
        assert distance(path_graph(5), [1, 2], [2, 3]) == 0

    def test_path_ends(self):
        assert distance(path_graph(5), 0, 4) == 4

    def test_grid_columns(self):
        G, _, _ = grid(4, 4)
        left, right = [4 * r for r in range(4)], [4 * r + 3 for r in range(4)]
        assert distance(G, left, right) == 3
        H = to_nx(G)
        assert min(nx.shortest_path_length(H, a, b) for a in left for b in right) == 3

    def test_edges_and_infinity(self):
        G = Graph(5, [(0, 1), (1, 2), (3, 4)])
        assert distance(G, (0, 1), 2) == 1
        assert distance(G, [(0, 1)], [(3, 4)]) == math.inf

    def test_empty_set(self):
        with pytest.raises(GraphError):
            distance(path_graph(3), [], [1])

    @given(graphs(max_n=12, connected=True), st.data())
    def test_triangle_inequality(self, G, data):
        a, b, c = (data.draw(st.integers(0, G.n - 1)) for _ in range(3))
        assert distance(G, a, c) <= distance(G, a, b) + distance(G, b, c)


class TestQuotient:
    def test_singletons_identity(self):
        G, _, _ = grid(3, 3)
        assert quotient(G, Partition.singletons(G.n)) == G

    def test_cycle_halves(self):
        C4 = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        assert quotient(C4, Partition((0, 0, 1, 1))) == Graph(2, [(0, 1)])

    def test_grid_blocks(self):
        G, _, _ = grid(6, 6)
        Q = quotient(G, blocks_of_6x6())
        assert (Q.n, Q.m) == (4, 4)
        assert Q == grid(2, 2)[0]

    @given(graph_and_partition())
    def test_matches_networkx(self, gp):
        G, P = gp
        ref = nx.quotient_graph(to_nx(G), [set(p) for p in P.parts])
        assert quotient(G, P).m == ref.number_of_edges() - nx.number_of_selfloops(ref)


class TestStrongProduct:
    def test_edge_squared_is_k4(self):
        assert strong_product(path_graph(2), path_graph(2)) == complete(4)

    def test_k1_identity(self):
        G, _, _ = grid(3, 3)
        assert strong_product(G, Graph(1)) == G

    def test_king_graph(self):
        assert strong_product(path_graph(3), path_graph(3)).m == 20

    @given(graphs(max_n=5), graphs(max_n=5))
    def test_matches_networkx(self, A, B):
        P = strong_product(A, B)
        assert P.n == A.n * B.n
        ref = nx.strong_product(to_nx(A), to_nx(B))
        assert {tuple(sorted((a * B.n + x, c * B.n + y))) for (a, x), (c, y) in ref.edges()} == set(P.edges())


class TestPartitions:
    def test_singletons_connected(self):
        assert is_connected_partition(path_graph(4), Partition.singletons(4))

    def test_split_part(self):
        assert not is_connected_partition(path_graph(3), Partition((0, 1, 0)))

    def test_dense_ids_required(self):
        with pytest.raises(GraphError):
            Partition((0, 2))

    def test_canonical(self):
        assert Partition((1, 0, 1)).canonical().part_of == (0, 1, 0)

    @given(graph_and_partition())
    def test_connectivity_matches_oracle(self, gp):
        G, P = gp
        assert is_connected_partition(G, P) == oracles.is_connected_partition(G, P)

    def test_components_order(self):
        assert components(Graph(5, [(3, 4), (0, 2)])) == [[0, 2], [1], [3, 4]]


class TestHPartition:
    def test_edge(self):
        K2 = Graph(2, [(0, 1)])
        assert h_partition_width_check(K2, Partition.singletons(2), K2, 1)

    def test_too_wide(self):
        assert not h_partition_width_check(path_graph(3), Partition((0, 0, 1)), Graph(2, [(0, 1)]), 1)

    def test_grid_blocks(self):
        G, _, _ = grid(6, 6)
        assert h_partition_width_check(G, blocks_of_6x6(), grid(2, 2)[0], 9)

    def test_wrong_labelling(self):
        G, _, _ = grid(6, 6)
        H = Graph(4, [(0, 1), (1, 2), (2, 3)])
        assert not h_partition_width_check(G, blocks_of_6x6(), H, 9)

    def test_unlabelled_parts(self):
        with pytest.raises(GraphError):
            h_partition_width_check(path_graph(3), Partition.singletons(3), Graph(2), 1)
