import pytest
from hypothesis import given, settings, strategies as st

from blockpart.chordal import (ClaimError, build_chordal_partition, elimination_width,
                               select_bridge, terminal_bound)
from blockpart.embedding import RotationSystem
from blockpart.generators import grid, sparse_plane_graph, stacked_triangulation
from blockpart.graph import Graph, GraphError, dumps, is_connected_partition, quotient
from blockpart.verify import verify_ell_blocking


def test_single_vertex():
    res = build_chordal_partition(RotationSystem([[]], (0, 0)), 1)
    assert res.num_trees == 1 and res.partition.part_of == (0,)


def test_triangle_is_one_tree():
    # the first tree is one outer vertex padded by all its neighbours
    _, R = stacked_triangulation(3, 0)
    res = build_chordal_partition(R, 1)
    assert res.num_trees == 1
    assert res.steps[0].terminals == (0,)
    assert res.steps[0].vertices == [0, 1, 2]


def test_disconnected_rejected():
    with pytest.raises(GraphError):
        build_chordal_partition(RotationSystem([[1], [0], []], (0, 1)), 1)


def test_tau_must_be_positive():
    _, R = stacked_triangulation(5, 0)
    with pytest.raises(GraphError):
        build_chordal_partition(R, 0)


def test_select_bridge_lowest_uncovered():
    G = Graph(9, [(3, 4), (4, 5), (7, 8), (0, 3), (0, 7)])
    covered = [0, 0, 0, -1, -1, -1, 0, -1, -1]
    assert select_bridge(G, covered) == frozenset({3, 4, 5})
    covered[3] = covered[4] = covered[5] = 1
    assert select_bridge(G, covered) == frozenset({7, 8})


def test_terminal_bound():
    assert terminal_bound(3, 2) == 4 * (1 + 3 + 9)


def test_elimination_width():
    K4 = Graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert elimination_width(K4, range(4)) == 3
    assert elimination_width(Graph(4, [(0, 1), (1, 2), (2, 3)]), range(4)) == 1


@pytest.mark.parametrize("tau", [1, 2, 37])
def test_triangulation_is_six_blocking(tau):
    G, R = stacked_triangulation(500, 4)
    res = build_chordal_partition(R, tau)
    assert verify_ell_blocking(G, res.partition, 6).holds is True
    assert is_connected_partition(G, res.partition)


def test_grid_claims_counted():
    _, R, _ = grid(12, 12)
    res = build_chordal_partition(R, 1)
    for claim in ("Invariant(i)", "Invariant(ii)", "AttachmentsPerOuterTree", "TwoAdjacentEarlierTrees", "TerminalBound",
                  "FiBridgeIsBj", "FjBridgeInBj", "TiAdjacentToTj"):
        assert res.claims_checked.get(claim, 0) > 0, claim


def test_repeat_runs_identical():
    _, R = stacked_triangulation(200, 9)
    a = build_chordal_partition(R, 2).to_json()
    b = build_chordal_partition(R, 2).to_json()
    assert dumps(a) == dumps(b)


def test_claim_error_carries_witness():
    e = ClaimError("TwoAdjacentEarlierTrees", 3, [1, 2], "demo")
    assert (e.claim, e.step, e.witness) == ("TwoAdjacentEarlierTrees", 3, [1, 2])
    assert isinstance(e, AssertionError)


@settings(max_examples=30)
@given(st.integers(1, 150), st.integers(0, 10 ** 6), st.floats(0.0, 1.0), st.integers(1, 3))
def test_structure_on_random_plane_graphs(n, seed, keep, tau):
    G, R = sparse_plane_graph(n, seed, keep)
    res = build_chordal_partition(R, tau)
    P = res.partition
    assert is_connected_partition(G, P)
    Q = quotient(G, P)
    bound = terminal_bound(G.max_degree(), tau)
    for j, step in enumerate(res.steps):
        earlier = [i for i in Q.adj[j] if i < j]
        assert len(earlier) <= 2
        if len(earlier) == 2:
            assert Q.has_edge(*earlier)
        assert len(step.touched) <= 2 and len(step.outer_attachments) <= 4
        assert 1 <= len(step.terminals) <= bound
        assert set(step.terminals) <= step.core.vertices <= set(step.parent)
    assert elimination_width(Q, range(Q.n - 1, -1, -1)) <= 2
    assert verify_ell_blocking(G, P, 6).holds is True
