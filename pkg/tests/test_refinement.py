import math

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from blockpart.chordal import ChordalResult, ChordalStep, build_chordal_partition, terminal_bound
from blockpart.generators import grid, stacked_triangulation
from blockpart.graph import Graph, GraphError, Partition, edge_key, is_connected_partition
from blockpart.refinement import (RefinementParams, SelectAbort, assemble_R, build_M_family,
                                  is_independent, mixed_distance, refine, refined_width_bound,
                                  select_MP, steiner_path_decomposition, window_starts)
from blockpart.steiner import SteinerTree

PARAMS = RefinementParams(c=2, d_indep=8, n0=16, tau=2)


def tree_step(G, core_edges, terminals, interior=None, attachments=(), index=1):
    """A hand-built step whose padded tree is the core plus its interior neighbours."""
    interior = frozenset(range(G.n) if interior is None else interior)
    core = SteinerTree.from_edges(terminals, core_edges)
    root = min(terminals)
    adj = {v: set(a) for v, a in core.adj.items()}
    for v in sorted(core.vertices):
        for w in G.adj[v]:
            if w in interior and w not in adj:
                adj[w] = {v}
                adj[v].add(w)
    parent, order = {root: None}, [root]
    for v in order:
        for w in sorted(adj[v]):
            if w not in parent:
                parent[w] = v
                order.append(w)
    return ChordalStep(index, interior, frozenset(attachments), (), (), tuple(terminals), core,
                       parent, root, "exact")


def path_step(length):
    G = Graph(length + 1, [(i, i + 1) for i in range(length)])
    return G, tree_step(G, list(G.edges()), [0, length])


class TestParams:
    def test_window_constraint(self):
        with pytest.raises(GraphError):
            RefinementParams(c=2, d_indep=8, n0=11, tau=1)

    def test_positive(self):
        with pytest.raises(GraphError):
            RefinementParams(c=0, d_indep=8, n0=16, tau=1)

    def test_defaults_are_exact_integers(self):
        p = RefinementParams.proof_scale_defaults(3)
        assert p.c == 450 and p.tau == 37
        assert p.d_indep == 3612 * 3 ** 452
        assert p.n0 == 3 ** 40 * (p.d_indep + 900)


class TestWindows:
    def test_short_path_gets_no_cut(self):
        G, step = path_step(5 * 16 - 1)
        assert select_MP(G, list(range(80)), PARAMS, step, []) == []

    def test_first_edge_of_each_window(self):
        G, step = path_step(6 * 16)
        assert window_starts(96, PARAMS) == [16, 40, 64]
        M = select_MP(G, list(range(97)), PARAMS, step, [])
        assert M == [(16, 17), (40, 41), (64, 65)]

    def test_no_admissible_edge_aborts(self):
        G, step = path_step(6 * 16)
        with pytest.raises(SelectAbort) as info:
            select_MP(G, list(range(97)), PARAMS, step, [lambda e: 0])
        assert info.value.diagnostic["window"] == 0

    @given(st.integers(0, 2000), st.integers(1, 6), st.integers(1, 20), st.integers(0, 20))
    def test_window_layout(self, length, c, d, extra):
        p = RefinementParams(c=c, d_indep=d, n0=d + 2 * c + extra, tau=1)
        starts = window_starts(length, p)
        if length < 5 * p.n0:
            assert starts == []
            return
        assert starts and starts[0] == p.n0
        assert all(b - a == d + p.n0 for a, b in zip(starts, starts[1:]))
        assert starts[-1] + d <= length - p.n0
        # leftmost greedy: one more window would not fit
        assert starts[-1] + 2 * d + p.n0 > length - p.n0

    @given(st.integers(0, 3000), st.integers(12, 40))
    def test_more_spacing_never_adds_windows(self, length, n0):
        small = RefinementParams(c=2, d_indep=8, n0=n0, tau=1)
        big = RefinementParams(c=2, d_indep=8, n0=n0 + 1, tau=1)
        assert len(window_starts(length, big)) <= len(window_starts(length, small))


class TestPathDecomposition:
    def test_path(self):
        G, step = path_step(6)
        assert len(steiner_path_decomposition(G, step)) == 1

    def test_spider(self):
        G = Graph(7, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)])
        step = tree_step(G, list(G.edges()), [2, 4, 6])
        paths = steiner_path_decomposition(G, step)
        assert len(paths) == 3 and all(0 in (p[0], p[-1]) for p in paths)

    def test_non_geodesic_core_rejected(self):
        # core goes the long way round a 6-cycle
        G = Graph(6, [(i, (i + 1) % 6) for i in range(6)])
        step = tree_step(G, [(0, 1), (1, 2), (2, 3), (3, 4)], [0, 4])
        with pytest.raises(AssertionError):
            steiner_path_decomposition(G, step)


def mixed_instance():
    # core 0-1-2; padded 3 (at 2) and 5 (at 0); 4, 6 further inside; 7 an attachment
    G = Graph(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 6), (0, 5), (5, 6), (0, 7), (6, 7)])
    step = tree_step(G, [(0, 1), (1, 2)], [0, 2], interior=range(7), attachments=[7])
    return G, step


class TestMixedDistance:
    def test_matches_brute_force(self):
        G, step = mixed_instance()
        H = nx.Graph(list(G.edges()))
        inner = H.subgraph(step.interior)
        outside = H.subgraph((step.interior | step.attachments) - step.core.vertices)
        best = math.inf
        for v in set(step.parent) - step.core.vertices:
            leg1 = min(nx.shortest_path_length(inner, x, v) for x in (1, 2))
            leg2 = nx.shortest_path_length(outside, v, 6) if nx.has_path(outside, v, 6) else math.inf
            best = min(best, leg1 + leg2)
        assert mixed_distance(G, step, [(1, 2)], [6]) == best == 3

    def test_no_cuts(self):
        G, step = mixed_instance()
        assert mixed_distance(G, step, [], [6]) == math.inf

    def test_second_leg_zero(self):
        G, step = mixed_instance()
        assert mixed_distance(G, step, [(1, 2)], [3]) == 1

    def test_edges_as_targets(self):
        G, step = mixed_instance()
        assert mixed_distance(G, step, [(1, 2)], [(4, 6)]) == 2


class TestAssemble:
    def test_no_cuts_gives_trees(self):
        G, R = stacked_triangulation(60, 2)
        ch = build_chordal_partition(R, 2)
        fam = build_M_family(ch, RefinementParams(c=2, d_indep=8, n0=G.m + 1, tau=2))
        assert fam.total_cuts == 0
        assert assemble_R(ch, fam).part_of == ch.partition.canonical().part_of

    def test_path_with_one_cut(self):
        G, step = path_step(7)
        ch = ChordalResult(G, 1, [step], Partition((0,) * 8))
        fam = build_M_family(ch, RefinementParams(c=1, d_indep=1, n0=3, tau=1))
        fam.cuts = [[(3, 4)]]
        assert assemble_R(ch, fam).parts == ((0, 1, 2, 3), (4, 5, 6, 7))


def test_independence_check():
    G = Graph(12, [(i, i + 1) for i in range(11)])
    assert is_independent(G, range(12), [(0, 1), (6, 7)], 4) == (True, None)
    ok, wit = is_independent(G, range(12), [(0, 1), (4, 5)], 4)
    assert not ok and wit == ((0, 1), (4, 5))


def test_tau_mismatch():
    _, R = stacked_triangulation(20, 1)
    with pytest.raises(GraphError):
        build_M_family(build_chordal_partition(R, 1), PARAMS)


@pytest.mark.parametrize("side", [20, 30])
def test_grid_runs_pass_every_clause(side):
    G, R, _ = grid(side, side)
    ch = build_chordal_partition(R, 2)
    res = refine(ch, PARAMS)
    assert res.aborted is None
    assert res.family.failed_clauses() == []
    assert res.family.approx_geodesic.holds
    assert is_connected_partition(G, res.partition)
    B = terminal_bound(G.max_degree(), 2)
    assert res.partition.width <= refined_width_bound(G.max_degree(), B, PARAMS)


def test_clause_reports_match_direct_checks():
    # the 50x50 grid is the smallest square grid where cuts appear with these params
    G, R, _ = grid(50, 50)
    ch = build_chordal_partition(R, 2)
    res = refine(ch, PARAMS)
    fam = res.family
    assert res.aborted is None and fam.total_cuts > 0
    H = nx.Graph(list(G.edges()))
    B = fam.bound
    b_ok, a_ok = True, True
    for step, M in zip(ch.steps, fam.cuts):
        if not M:
            continue
        core = nx.Graph(step.core.edges())
        assert set(M) <= set(core.edges()) | {(v, u) for u, v in core.edges()}
        dist = nx.multi_source_dijkstra_path_length(core, set(step.terminals))
        if min(min(dist[u], dist[v]) for u, v in M) < 2 * B:
            b_ok = False
        inner = H.subgraph(step.interior)
        for i, e in enumerate(M):
            for f in M[i + 1:]:
                gap = min(nx.shortest_path_length(inner, x, y) for x in e for y in f)
                if gap <= PARAMS.independence:
                    a_ok = False
    assert fam.clauses["a"].holds == a_ok
    assert fam.clauses["b"].holds == b_ok
