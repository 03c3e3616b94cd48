"""Degree-bounded graph powers and rooted shallow models in products ``G ⊠ K_d``.

Host vertices are pairs ``(v, copy)`` with ``v`` a vertex of the base graph and
``0 <= copy < d``.  Products are never materialised: ``d`` grows very fast when
the step below is iterated, so adjacency is decided on demand.

A branch set is a subgraph of the host (vertex set, explicit edge set, root).
Degrees in the shallow condition are degrees inside that subgraph.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .decomposition import min_fill_decomposition
from .graph import Graph, GraphError, Partition, components, edge_key, quotient
from .rng import SplitMix64
from .treepart import two_blocking_bound, two_blocking_partition
from .verify import verify_ell_blocking


class ModelError(GraphError):
    """Structurally invalid model."""


@dataclass(frozen=True)
class ProductHost:
    base: Graph
    copies: int

    def has_vertex(self, a) -> bool:
        return 0 <= a[0] < self.base.n and 0 <= a[1] < self.copies

    def adjacent(self, a, b) -> bool:
        if a[0] == b[0]:
            return a[1] != b[1]
        return self.base.has_edge(a[0], b[0])


@dataclass(frozen=True)
class ShallowParams:
    r: int
    s: int

    def __post_init__(self):
        if self.r < 0 or self.s < 1:
            raise GraphError("need r >= 0 and s >= 1")


@dataclass
class BranchSet:
    root: tuple
    vertices: list
    edges: list

    def __post_init__(self):
        self.root = (int(self.root[0]), int(self.root[1]))
        self.vertices = sorted({(int(a), int(b)) for a, b in self.vertices})
        self.edges = sorted({tuple(sorted(((int(a[0]), int(a[1])), (int(b[0]), int(b[1])))))
                             for a, b in self.edges})

    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        return adj

    def to_json(self) -> dict:
        return {"root": list(self.root), "set": [list(v) for v in self.vertices],
                "edges": [[list(a), list(b)] for a, b in self.edges]}


@dataclass
class RootedModel:
    """Model of ``pattern`` in ``host``: branch set ``i`` belongs to pattern vertex ``i``."""

    pattern: Graph
    host: ProductHost
    branch_sets: list

    def check_structure(self) -> None:
        """Raise :class:`ModelError` unless this is a model of the pattern in the host."""
        if len(self.branch_sets) != self.pattern.n:
            raise ModelError("one branch set per pattern vertex required")
        owner = {}
        for x, bs in enumerate(self.branch_sets):
            if bs.root not in set(bs.vertices):
                raise ModelError(f"root of branch set {x} is not in it")
            for v in bs.vertices:
                if not self.host.has_vertex(v):
                    raise ModelError(f"branch set {x} holds non-host vertex {v}")
                if v in owner:
                    raise ModelError(f"host vertex {v} in branch sets {owner[v]} and {x}")
                owner[v] = x
            vs = set(bs.vertices)
            for a, b in bs.edges:
                if a not in vs or b not in vs:
                    raise ModelError(f"edge {a}-{b} of branch set {x} leaves it")
                if not self.host.adjacent(a, b):
                    raise ModelError(f"edge {a}-{b} of branch set {x} is not a host edge")
            if len(_bfs(bs.adjacency(), bs.root)) != len(vs):
                raise ModelError(f"branch set {x} is not connected")
        for x, y in self.pattern.edges():
            if not _realised(self.host, self.branch_sets[x], self.branch_sets[y]):
                raise ModelError(f"pattern edge ({x}, {y}) not realised")

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern.to_json(),
            "host": {"base": self.host.base.to_json(), "copies": self.host.copies},
            "branch_sets": {str(x): bs.to_json() for x, bs in enumerate(self.branch_sets)},
        }

    @classmethod
    def from_json(cls, data) -> "RootedModel":
        pattern = Graph.from_json(data["pattern"])
        host = ProductHost(Graph.from_json(data["host"]["base"]), int(data["host"]["copies"]))
        sets = []
        for x in range(pattern.n):
            b = data["branch_sets"][str(x)]
            verts = [tuple(v) for v in b["set"]]
            if "edges" in b:
                edges = [(tuple(a), tuple(c)) for a, c in b["edges"]]
            else:
                # no edge list: the induced subgraph
                edges = [(a, c) for i, a in enumerate(verts) for c in verts[i + 1:]
                         if host.adjacent(a, c)]
            sets.append(BranchSet(tuple(b["root"]), verts, edges))
        return cls(pattern, host, sets)


def _bfs(adj: dict, root) -> dict:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _realised(host: ProductHost, A: BranchSet, B: BranchSet) -> bool:
    base_b = {v for v, _ in B.vertices}
    for v, _ in A.vertices:
        if v in base_b:
            return True       # distinct copies of one base vertex are adjacent
        if any(w in base_b for w in host.base.adj[v]):
            return True
    return False


@dataclass
class ModelReport:
    valid: bool
    violations: list = field(default_factory=list)   # (pattern vertex, host vertex, kind, value)
    max_radius: int = 0
    max_degree: int = 0

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": [list(v) for v in self.violations],
                "max_radius": self.max_radius, "max_degree": self.max_degree}


def validate_shallow_model(M: RootedModel, p: ShallowParams) -> ModelReport:
    """Is ``M`` an ``(r, s)``-shallow model?  Raises on a structurally invalid model."""
    M.check_structure()
    rep = ModelReport(True)
    for x, bs in enumerate(M.branch_sets):
        adj = bs.adjacency()
        dist = _bfs(adj, bs.root)
        for u in bs.vertices:
            if u == bs.root:
                continue
            rep.max_radius = max(rep.max_radius, dist[u])
            rep.max_degree = max(rep.max_degree, len(adj[u]))
            if dist[u] > p.r:
                rep.violations.append((x, list(u), "radius", dist[u]))
            if len(adj[u]) > p.s:
                rep.violations.append((x, list(u), "degree", len(adj[u])))
    rep.valid = not rep.violations
    return rep


# -- degree-bounded powers

def power_graph_degree_bounded(G: Graph, k: int, d: int) -> Graph:
    """Edge ``vw`` iff some ``vw``-path of length <= k has all internal vertices of degree <= d."""
    if k < 1 or d < 1:
        raise GraphError("need k >= 1 and d >= 1")
    low = [G.degree(v) <= d for v in range(G.n)]
    es = []
    for v in range(G.n):
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            if dist[u] == k or (u != v and not low[u]):
                continue
            for w in G.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        es.extend((v, w) for w in dist if w > v)
    return Graph(G.n, es)


def power_graph_naive(G: Graph, k: int, d: int) -> Graph:
    """Reference version: enumerate every simple path of length <= k."""
    es = set()

    def walk(path):
        last = path[-1]
        if len(path) > 1:
            es.add(edge_key(path[0], last))
            if G.degree(last) > d:
                return
        if len(path) - 1 == k:
            return
        for w in G.adj[last]:
            if w not in path:
                walk(path + [w])

    for v in range(G.n):
        walk([v])
    return Graph(G.n, sorted(es))


def copies_needed(k: int, d: int) -> int:
    """Copies of each vertex used by :func:`model_power_in_product`.

    The count of branch sets through a vertex is at most ``1 + d + ... + d^h``
    with ``h = k // 2``; that is at most ``d^(h+1)`` once ``d >= 2``.  For ``d = 1``
    the sum ``h + 1`` is used instead."""
    h = k // 2
    return d ** (h + 1) if d >= 2 else h + 1


def model_power_in_product(G: Graph, k: int, d: int) -> RootedModel:
    """Rooted model of the degree-bounded power in ``G ⊠ K_c`` with ``c = copies_needed(k, d)``.

    Branch set of ``v``: all ``x`` reachable from ``v`` by a path of length <= k//2
    whose vertices other than ``v`` have degree <= d, with induced edges.  Each
    base vertex hands out copies in increasing order of ``v``."""
    h = k // 2
    pattern = power_graph_degree_bounded(G, k, d)
    c = copies_needed(k, d)
    host = ProductHost(G, c)
    low = [G.degree(v) <= d for v in range(G.n)]
    used = [0] * G.n
    sets = []
    for v in range(G.n):
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            if dist[u] == h:
                continue
            for w in G.adj[u]:
                if w not in dist and low[w]:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        copy = {}
        for x in sorted(dist):
            if used[x] >= c:
                raise AssertionError(f"copy budget {c} exceeded at vertex {x}")
            copy[x] = used[x]
            used[x] += 1
        verts = [(x, copy[x]) for x in sorted(dist)]
        edges = [((a, copy[a]), (b, copy[b])) for a in dist for b in G.adj[a] if a < b and b in dist]
        sets.append(BranchSet((v, copy[v]), verts, edges))
    return RootedModel(pattern, host, sets)


# -- one round of radius reduction

class BlockingProvider:
    """Supplies an ``ell``-blocking partition of a graph together with its claimed width bound."""

    ell = 0

    def width_bound(self, G0: Graph, max_degree: int) -> int:
        raise NotImplementedError

    def partition(self, G0: Graph) -> Partition:
        raise NotImplementedError


class TwoBlockingProvider(BlockingProvider):
    """The tree-partition 2-blocking construction on a min-fill decomposition.

    Its width bound depends on the decomposition width, which is computed per call
    and threaded through ``width_bound``."""

    ell = 2

    def __init__(self):
        self._td = {}

    def _decomposition(self, G0):
        key = (G0.n, tuple(G0.edges()))
        if key not in self._td:
            self._td[key] = min_fill_decomposition(G0)
        return self._td[key]

    def width_bound(self, G0, max_degree):
        return two_blocking_bound(self._decomposition(G0).width, max_degree)

    def partition(self, G0):
        return two_blocking_partition(G0, self._decomposition(G0))


@dataclass
class StepResult:
    graph: Graph                # the minor G' = G / R'
    model: RootedModel
    params: ShallowParams       # (r - 1, s')
    copies: int                 # d'
    width_bound: int            # f(ds)
    blocking_width: int
    parts: list                 # R' as lists of base vertices, indexed by G' vertex
    report: ModelReport

    def to_json(self) -> dict:
        return {"r": self.params.r, "s": str(self.params.s), "copies": str(self.copies),
                "width_bound": str(self.width_bound), "blocking_width": self.blocking_width,
                "graph": self.graph.to_json(), "parts": self.parts,
                "max_radius": self.report.max_radius, "max_degree": self.report.max_degree}


def shallow_minors_step(M: RootedModel, p: ShallowParams, provider: BlockingProvider,
                        verify_blocking: bool = False) -> StepResult:
    """Turn an ``(r, s)``-shallow model in ``G ⊠ K_d`` into an ``(r-1, (ds)^r)``-shallow
    model of the same pattern in ``G' ⊠ K_{d f(ds)}`` with ``G'`` a minor of ``G``."""
    ell = provider.ell
    if p.r <= ell + 2:
        raise GraphError(f"need r > ell + 2 = {ell + 2}")
    rep = validate_shallow_model(M, p)
    if not rep.valid:
        raise ModelError(f"input model is not ({p.r}, {p.s})-shallow: {rep.violations[:3]}")
    G = M.host.base
    d, s = M.host.copies, p.s

    # projections onto G, and G0 = union of projections minus their roots
    proj = []
    g0_vertices = set()
    g0_edges = set()
    for bs in M.branch_sets:
        root = bs.root[0]
        verts = sorted({v for v, _ in bs.vertices})
        edges = sorted({edge_key(a[0], b[0]) for a, b in bs.edges if a[0] != b[0]})
        proj.append((root, verts, edges))
        g0_vertices.update(v for v in verts if v != root)
        g0_edges.update(e for e in edges if root not in e)
    local = sorted(g0_vertices)
    index = {v: i for i, v in enumerate(local)}
    G0 = Graph(len(local), sorted(edge_key(index[a], index[b]) for a, b in g0_edges))
    ds = d * s
    if G0.max_degree() > ds:
        raise AssertionError(f"projected union has degree {G0.max_degree()} > ds = {ds}")

    bound = provider.width_bound(G0, ds) if G0.n else 1
    R = provider.partition(G0) if G0.n else Partition.from_parts(0, [])
    if R.width > bound:
        raise GraphError(f"provider partition width {R.width} exceeds its bound {bound}")
    if verify_blocking and G0.n:
        verdict = verify_ell_blocking(G0, R, ell)
        if verdict.holds is not True:
            raise AssertionError(f"provider partition is not {ell}-blocking")
    for part in R.parts:
        if len(components(G, [local[i] for i in part])) != 1:
            raise AssertionError("blocking part is disconnected in G")

    # R' = R plus singletons, G' = G / R'; vertex v of G becomes (part, slot) in G' ⊠ K_f
    parts = [sorted(local[i] for i in part) for part in R.parts]
    parts += [[v] for v in range(G.n) if v not in g0_vertices]
    parts.sort()
    Rp = Partition.from_parts(G.n, parts)
    Gp = quotient(G, Rp)
    place = {}
    for pi, part in enumerate(Rp.parts):
        for slot, v in enumerate(sorted(part)):
            place[v] = (pi, slot)
    fds = max(bound, Rp.width)
    mid = ProductHost(Gp, fds)

    # BFS tree of each projection, closed under host edges to descendants, then lifted
    used = {}
    sets = []
    for (root, verts, edges) in proj:
        adj = {v: [] for v in verts}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        parent = {root: None}
        depth = {root: 0}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in sorted(adj[u]):
                if w not in parent:
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    queue.append(w)
        tree_edges = set()
        for v in verts:
            a = parent[v]
            while a is not None:
                if mid.adjacent(place[a], place[v]):
                    tree_edges.add(edge_key(a, v))
                a = parent[a]
        copy = {}
        for v in verts:
            copy[v] = used.get(v, 0)
            if copy[v] >= d:
                raise AssertionError(f"more than d = {d} branch sets through {v}")
            used[v] = copy[v] + 1

        def lift(v):
            pi, slot = place[v]
            return (pi, slot * d + copy[v])

        sets.append(BranchSet(lift(root), [lift(v) for v in verts],
                              [(lift(a), lift(b)) for a, b in tree_edges]))
    new_host = ProductHost(Gp, d * fds)
    Mp = RootedModel(M.pattern, new_host, sets)
    new_p = ShallowParams(p.r - 1, ds ** p.r)
    out = validate_shallow_model(Mp, new_p)
    if not out.valid:
        raise AssertionError(f"step output not ({new_p.r}, s')-shallow: {out.violations[:3]}")
    return StepResult(Gp, Mp, new_p, d * fds, bound, R.width, [sorted(q) for q in Rp.parts], out)


def iterate_shallow_minors(M: RootedModel, p: ShallowParams, provider: BlockingProvider,
                           verify_blocking: bool = False) -> list:
    """Apply the step ``r - ell - 2`` times; every intermediate model is validated."""
    steps = []
    while p.r > provider.ell + 2:
        st = shallow_minors_step(M, p, provider, verify_blocking)
        steps.append(st)
        M, p = st.model, st.params
    return steps


def random_shallow_model(G: Graph, copies: int, r: int, s: int, count: int, seed: int) -> RootedModel:
    """Random ``(r, s)``-shallow model in ``G ⊠ K_copies``: ``count`` disjoint trees
    grown from random roots; the pattern is every pair of touching branch sets."""
    rng = SplitMix64(seed)
    host = ProductHost(G, copies)
    free = [(v, c) for v in range(G.n) for c in range(copies)]
    rng.shuffle(free)
    roots = sorted(free[:count])
    owner = {v: x for x, v in enumerate(roots)}
    depth = {v: 0 for v in roots}
    deg = {v: 0 for v in roots}
    tree = [[] for _ in roots]
    frontier = [[v] for v in roots]
    active = list(range(len(roots)))
    while active:
        x = active[rng.below(len(active))]
        grown = False
        order = list(frontier[x])
        rng.shuffle(order)
        for u in order:
            if depth[u] >= r or (depth[u] > 0 and deg[u] >= s):
                continue
            nb = [(w, c) for w in (u[0],) + G.adj[u[0]] for c in range(copies)
                  if (w, c) != u and (w, c) not in owner]
            if not nb:
                continue
            w = rng.choice(nb)
            owner[w] = x
            depth[w] = depth[u] + 1
            deg[u] += 1
            deg[w] = 1
            tree[x].append((u, w))
            frontier[x].append(w)
            grown = True
            break
        if not grown:
            active.remove(x)
    sets = []
    for x, root in enumerate(roots):
        verts = [root] + [w for _, w in tree[x]]
        sets.append(BranchSet(root, verts, tree[x]))
    es = []
    for x in range(len(roots)):
        for y in range(x + 1, len(roots)):
            if _realised(host, sets[x], sets[y]):
                es.append((x, y))
    return RootedModel(Graph(len(roots), es), host, sets)


# -- closed-form bounds

def tw_bound(ell: int, t: int) -> int:
    """Treewidth bound ``C(2 ell + 5 + t, t) - 1`` for the final product."""
    if ell < 1 or t < 1:
        raise GraphError("need ell >= 1 and t >= 1")
    return math.comb(2 * ell + 5 + t, t) - 1


def centred_colouring_bound(ell: int, p: int, t: int) -> int:
    """``ell (p + 1) C(p + t, t)``."""
    if ell < 1 or p < 1 or t < 1:
        raise GraphError("need positive arguments")
    return ell * (p + 1) * math.comb(p + t, t)
