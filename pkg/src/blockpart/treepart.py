"""Detached tree-partitions of bounded-treewidth, bounded-degree graphs, and the
2-blocking partitions built from them.

A rooted tree-partition is *detached* when every vertex of a child bag sees at
most one component of its parent bag.  :func:`heart` builds one recursively;
:func:`two_blocking_partition` colours the edges by bag level and takes the
components of the red edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .decomposition import DecompositionError, RootedTreePartition, TreeDecomposition
from .graph import Graph, GraphError, Partition, components
from .verify import verify_ell_blocking

WIDTH_FACTOR = 90
DEGREE_FACTOR = 15


class HeartError(AssertionError):
    def __init__(self, bullet: str, detail):
        self.bullet = bullet
        self.detail = detail
        super().__init__(f"{bullet}: {detail}")


# -- helpers ----------------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.up = {}

    def add(self, x):
        self.up.setdefault(x, x)

    def find(self, x):
        up = self.up
        root = x
        while up[root] != root:
            root = up[root]
        while up[x] != root:
            up[x], x = root, up[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.up[rb] = ra


def detach_expand(G: Graph, S, within=None) -> set[int]:
    """Grow ``S`` by the lowest-id vertex touching two of its components until
    no outside vertex (of ``G[within]``) touches two."""
    S = set(S)
    if not S:
        raise GraphError("S must be non-empty")
    inside = (lambda v: True) if within is None else within.__contains__
    X = set(S)
    uf = _UnionFind()
    for v in X:
        uf.add(v)
    for v in X:
        for w in G.adj[v]:
            if w in X:
                uf.union(v, w)
    while True:
        cand = sorted({w for v in X for w in G.adj[v] if w not in X and inside(w)})
        pick = None
        for w in cand:
            roots = {uf.find(x) for x in G.adj[w] if x in X}
            if len(roots) >= 2:
                pick = w
                break
        if pick is None:
            break
        X.add(pick)
        uf.add(pick)
        for x in G.adj[pick]:
            if x in X:
                uf.union(pick, x)
    if len(X) > 2 * len(S) - 1:
        raise AssertionError(f"expanded set has {len(X)} > 2|S|-1 vertices")
    return X


def balanced_separator(G: Graph, S, td: TreeDecomposition, within=None):
    """Vertex sets ``V1, V2`` of induced subgraphs with ``V1 | V2`` the whole vertex set,
    ``V1 & V2`` one bag, no edge between ``V1 - V2`` and ``V2 - V1``, and at most two
    thirds of ``S`` in each ``Vi - V(j)``.  When possible each whole side, shared bag
    included, holds at most two thirds of ``S`` (always the case in the heart's
    Case 3, which asserts it).

    The bag is a weighted centroid of the bag tree; the components around it go
    greedily (heaviest first) to the side with less of ``S`` so far."""
    S = set(S)
    verts = set(range(G.n)) if within is None else set(within)
    nb = len(td.bags)
    if nb == 0:
        raise DecompositionError("empty decomposition")
    # root the bag tree; the home of a vertex is its bag nearest the root
    order = [td.root]
    parent = [-1] * nb
    seen = [False] * nb
    seen[td.root] = True
    for x in order:
        for y in td.nbrs[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                order.append(y)
    home = {}
    for x in order:
        for v in td.bags[x]:
            if v in verts and v not in home:
                home[v] = x
    if set(home) != verts:
        raise DecompositionError("decomposition misses vertices")
    own = [0] * nb
    for v in S:
        own[home[v]] += 1
    sub = own[:]
    for x in reversed(order[1:]):
        sub[parent[x]] += sub[x]
    total = len(S)
    best, best_x = None, None
    for x in range(nb):
        bag_s = sum(1 for v in td.bags[x] if v in S)
        weights = [sub[y] for y in td.nbrs[x] if y != parent[x]]
        if parent[x] >= 0:
            weights.append(total - sub[x] - bag_s + own[x])
        heaviest = max(weights, default=0)
        if best is None or heaviest < best:
            best, best_x = heaviest, x
    x = best_x
    bag = {v for v in td.bags[x] if v in verts}
    # components of the bag tree minus x, each as a vertex set outside the bag
    comps = []
    for y in td.nbrs[x]:
        stack = [y]
        mark = {x, y}
        vs = set()
        while stack:
            z = stack.pop()
            vs.update(v for v in td.bags[z] if v in verts and v not in bag)
            for w in td.nbrs[z]:
                if w not in mark:
                    mark.add(w)
                    stack.append(w)
        if vs:
            comps.append((len(vs & S), min(vs), vs))
    comps.sort(key=lambda t: (-t[0], t[1]))
    side = [set(), set()]
    load = [0, 0]
    for w, _, vs in comps:
        i = 0 if load[0] <= load[1] else 1
        side[i] |= vs
        load[i] += w
    V1, V2 = side[0] | bag, side[1] | bag
    bag_s = len(bag & S)
    if 3 * (load[0] + bag_s) > 2 * total or 3 * (load[1] + bag_s) > 2 * total:
        exact = _exact_split(comps, bag, S, total)
        if exact is not None:
            V1, V2 = exact
    if 3 * max(len(S & (V1 - V2)), len(S & (V2 - V1))) > 2 * total:
        raise AssertionError("centroid bag leaves a side with more than two thirds of S")
    return frozenset(V1), frozenset(V2)


def _exact_split(comps, bag, S, total):
    """Subset-sum fallback over the component weights."""
    bag_s = len(bag & S)
    reach = {0: ()}
    for idx, (w, _, _) in enumerate(comps):
        for s, pick in list(reach.items()):
            if s + w not in reach:
                reach[s + w] = pick + (idx,)
    cap = (2 * total) // 3 - bag_s
    for s in sorted(reach, key=lambda s: abs(2 * s - (total - bag_s))):
        rest = total - bag_s - s
        if s <= cap and rest <= cap:
            pick = set(reach[s])
            V1 = set(bag)
            V2 = set(bag)
            for idx, (_, _, vs) in enumerate(comps):
                (V1 if idx in pick else V2).update(vs)
            return V1, V2
    return None


def _bag_components(G: Graph, bag) -> dict[int, int]:
    comp_of = {}
    for i, comp in enumerate(components(G, bag)):
        for v in comp:
            comp_of[v] = i
    return comp_of


def detached_pair_violation(G: Graph, parent_bag, child_bag):
    """A vertex of ``child_bag`` touching two components of ``G[parent_bag]``, or None."""
    comp_of = _bag_components(G, parent_bag)
    for v in sorted(child_bag):
        if len({comp_of[w] for w in G.adj[v] if w in comp_of}) >= 2:
            return v
    return None


def detached_violation(G: Graph, tp: RootedTreePartition):
    """Direct scan of every parent/child pair; returns ``(child node, vertex)`` or None."""
    for y, x in enumerate(tp.parent):
        if x is None:
            continue
        v = detached_pair_violation(G, tp.bags[x], tp.bags[y])
        if v is not None:
            return (y, v)
    return None


# -- the recursive construction ------------------------------------------------------------

@dataclass
class _Node:
    bag: frozenset
    children: list = field(default_factory=list)
    # aggregates over the subtree
    max_bag: int = 0
    max_deg_below: int = 0      # max tree degree over non-root nodes of the subtree
    size: int = 1

    @property
    def deg(self) -> int:
        return len(self.children)


@dataclass
class HeartStats:
    nodes: int = 0
    case1: int = 0
    case2: int = 0
    case3: int = 0
    padded: int = 0
    max_depth: int = 0
    checks: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _finish(node: _Node):
    node.max_bag = max([len(node.bag)] + [c.max_bag for c in node.children])
    node.max_deg_below = max([0] + [max(c.deg + 1, c.max_deg_below) for c in node.children])
    node.size = 1 + sum(c.size for c in node.children)


def _assert_bullets(G, node: _Node, verts, S, k, d, stats: HeartStats, case: str):
    """The five bullets for this node, plus detachedness and the tree-partition
    property for the pairs created here (deeper pairs were checked when built)."""
    stats.checks += 1
    tree_deg = max(node.deg, node.max_deg_below)
    if tree_deg > DEGREE_FACTOR * d:
        raise HeartError("max tree degree", (case, tree_deg, DEGREE_FACTOR * d))
    if node.max_bag > WIDTH_FACTOR * k * d:
        raise HeartError("bag size", (case, node.max_bag, WIDTH_FACTOR * k * d))
    if not S <= node.bag:
        raise HeartError("S inside root bag", (case, sorted(S - node.bag)[:5]))
    if len(node.bag) > 3 * len(S) - 5 * k:
        raise HeartError("root bag size", (case, len(node.bag), 3 * len(S) - 5 * k))
    if 2 * k * (node.deg + 1) > len(S):
        raise HeartError("root degree", (case, node.deg, len(S) / (2 * k) - 1))
    child_of = {}
    for i, c in enumerate(node.children):
        for v in c.bag:
            child_of[v] = i
    for v in node.bag:
        for w in G.adj[v]:
            if w in verts and w not in node.bag and w not in child_of:
                raise HeartError("tree-partition", (case, v, w))
    for c in node.children:
        bad = detached_pair_violation(G, node.bag, c.bag)
        if bad is not None:
            raise HeartError("detached", (case, bad))


def _heart_rec(G, verts, S, k, d, td, stats, depth, check):
    stats.max_depth = max(stats.max_depth, depth)
    if depth > G.n:
        raise HeartError("recursion depth", (depth, G.n))
    chain = []            # (root bag, S) of Case 2 steps, outermost first
    while True:
        if not (5 * k <= len(S) <= 30 * k * d):
            raise HeartError("precondition", (len(S), 5 * k, 30 * k * d))
        if len(verts) - len(S) <= WIDTH_FACTOR * k * d:
            stats.case1 += 1
            Bz = frozenset(detach_expand(G, S, verts))
            node = _Node(Bz, [_Node(frozenset(verts - Bz))])
            for c in node.children:
                _finish(c)
            _finish(node)
            if check:
                _assert_bullets(G, node, verts, S, k, d, stats, "case 1")
            break
        if len(S) <= 15 * k:
            stats.case2 += 1
            Bz = frozenset(detach_expand(G, S, verts))
            rest = verts - Bz
            S2 = {w for v in Bz for w in G.adj[v] if w in rest}
            if len(S2) < 5 * k:
                stats.padded += 1
                extra = sorted(v for v in rest if v not in S2)[:5 * k - len(S2)]
                S2.update(extra)
            chain.append((Bz, S, verts))
            verts, S = rest, S2
            stats.max_depth = max(stats.max_depth, depth + len(chain))
            if depth + len(chain) > G.n:
                raise HeartError("recursion depth", (depth + len(chain), G.n))
            continue
        stats.case3 += 1
        V1, V2 = balanced_separator(G, S, td, verts)
        shared = V1 & V2
        for Vi in (V1, V2):
            if 3 * len(S & Vi) > 2 * len(S):
                raise HeartError("separator balance", (len(S & Vi), len(S)))
        if len(shared) > k:
            raise HeartError("separator size", (len(shared), k))
        for v in V1 - V2:
            for w in G.adj[v]:
                if w in V2 and w not in V1:
                    raise HeartError("separator", (v, w))
        subs = []
        for Vi in (V1, V2):
            Si = (S & Vi) | shared
            subs.append(_heart_rec(G, set(Vi), Si, k, d, td.restrict(Vi), stats,
                                   depth + len(chain) + 1, check))
        node = _Node(subs[0].bag | subs[1].bag, subs[0].children + subs[1].children)
        _finish(node)
        if check:
            _assert_bullets(G, node, verts, S, k, d, stats, "case 3")
        break
    for Bz, S0, V0 in reversed(chain):
        node = _Node(Bz, [node])
        _finish(node)
        if check:
            _assert_bullets(G, node, V0, S0, k, d, stats, "case 2")
    return node


def _flatten(root: _Node) -> RootedTreePartition:
    bags, parent = [], []
    stack = [(root, None)]
    while stack:
        node, p = stack.pop()
        idx = len(bags)
        bags.append(set(node.bag))
        parent.append(p)
        for c in reversed(node.children):
            stack.append((c, idx))
    return RootedTreePartition(bags, parent, 0)


def heart(G: Graph, S, k: int, d: int, td: TreeDecomposition, check: bool = True,
          stats: HeartStats | None = None) -> RootedTreePartition:
    """Detached tree-partition of ``G`` whose root bag contains ``S``.

    Needs ``td`` of width at most ``k - 1``, maximum degree at most ``d`` and
    ``5k <= |S| <= 30kd``.  The five size/degree bullets, detachedness and the
    tree-partition property are asserted at every node as it is built."""
    if td.width > k - 1:
        raise GraphError(f"decomposition width {td.width} exceeds k - 1 = {k - 1}")
    if G.max_degree() > d:
        raise GraphError(f"maximum degree {G.max_degree()} exceeds d = {d}")
    stats = stats if stats is not None else HeartStats()
    root = _heart_rec(G, set(range(G.n)), set(S), k, d, td, stats, 0, check)
    stats.nodes = root.size
    return _flatten(root)


def improved_tree_partition(G: Graph, td: TreeDecomposition, check: bool = True,
                            stats: HeartStats | None = None) -> RootedTreePartition:
    """Detached tree-partition of width at most ``90 (w + 1) max(deg, 1)`` whose tree
    has maximum degree at most ``15 max(deg, 1)``, with ``w`` the supplied width."""
    k = td.width + 1
    d = max(G.max_degree(), 1)
    if G.n < 5 * k:
        tp = RootedTreePartition([set(range(G.n))], [None], 0)
    else:
        tp = heart(G, range(5 * k), k, d, td, check, stats)
    if check:
        tp.validate(G)
        if tp.width > WIDTH_FACTOR * k * d:
            raise HeartError("width", (tp.width, WIDTH_FACTOR * k * d))
        if tp.tree_max_degree() > DEGREE_FACTOR * d:
            raise HeartError("tree degree", (tp.tree_max_degree(), DEGREE_FACTOR * d))
        bad = detached_violation(G, tp)
        if bad is not None:
            raise HeartError("detached", bad)
    return tp


def two_blocking_bound(width: int, max_degree: int) -> int:
    return 1350 * (width + 1) * max(max_degree, 1) ** 2


def red_components(G: Graph, tp: RootedTreePartition) -> Partition:
    """Components of the red edges: inside a bag, or between levels ``i`` and ``i+1`` with ``i`` odd."""
    node = tp.node_of(G.n)
    lev = tp.levels()
    red = []
    for u, v in G.edges():
        a, b = node[u], node[v]
        if a == b or min(lev[a], lev[b]) % 2 == 1:
            red.append((u, v))
    parts = components(Graph(G.n, red))
    parts.sort(key=min)
    return Partition.from_parts(G.n, parts)


def two_blocking_partition(G: Graph, td: TreeDecomposition, check: bool = True,
                           budget: int = 10 ** 8) -> Partition:
    tp = improved_tree_partition(G, td, check)
    R = red_components(G, tp)
    if check:
        bound = two_blocking_bound(td.width, G.max_degree())
        if R.width > bound:
            raise AssertionError(f"2-blocking width {R.width} exceeds {bound}")
        _check_parts_local(G, tp, R)
        verdict = verify_ell_blocking(G, R, 2, budget)
        if verdict.holds is not True:
            raise AssertionError(f"not 2-blocking: {verdict.counterexample}")
    return R


def _check_parts_local(G, tp, R):
    """Every part lies in one bag plus the bags of that node's children."""
    node = tp.node_of(G.n)
    for part in R.parts:
        nodes = {node[v] for v in part}
        tops = {x for x in nodes if tp.parent[x] not in nodes}
        if len(tops) != 1:
            raise AssertionError(f"part {part[:5]} spans several bag families")
        top = next(iter(tops))
        if any(x != top and tp.parent[x] != top for x in nodes):
            raise AssertionError(f"part {part[:5]} reaches below the children of its top bag")


# -- lower bound -------------------------------------------------------------------------------

def exhaustive_tree_partitions(G: Graph, max_width: int):
    """Every connected partition of a tree ``G`` (one per subset of kept edges)
    whose width is at most ``max_width``."""
    edges = list(G.edges())
    m = len(edges)
    if m != G.n - 1 or len(components(G)) != 1:
        raise GraphError("exhaustive search needs a tree")
    for mask in range(1 << m):
        kept = [edges[i] for i in range(m) if mask >> i & 1]
        parts = components(Graph(G.n, kept))
        if max(len(p) for p in parts) <= max_width:
            yield mask, Partition.from_parts(G.n, parts)


def lower_bound_search(G: Graph, ell: int, max_width: int) -> dict:
    """Count ``ell``-blocking partitions of width at most ``max_width`` over all edge subsets."""
    total = 0
    narrow = 0
    blocking = []
    for mask, P in exhaustive_tree_partitions(G, max_width):
        narrow += 1
        v = verify_ell_blocking(G, P, ell)
        if v.holds:
            blocking.append(mask)
    total = 1 << (G.n - 1)
    return {"subsets": total, "narrow": narrow, "blocking_narrow": len(blocking),
            "examples": blocking[:5]}


def bfs_ball_partition(G: Graph, width: int = 3) -> Partition:
    """Connected partition into BFS balls of at most ``width`` vertices: the lowest
    unassigned vertex grows breadth-first through unassigned vertices."""
    from collections import deque

    if width < 1:
        raise GraphError("width must be positive")
    free = [True] * G.n
    parts = []
    for v in range(G.n):
        if not free[v]:
            continue
        ball = [v]
        free[v] = False
        queue = deque([v])
        while queue and len(ball) < width:
            x = queue.popleft()
            for w in G.adj[x]:
                if free[w] and len(ball) < width:
                    free[w] = False
                    ball.append(w)
                    queue.append(w)
        parts.append(sorted(ball))
    return Partition.from_parts(G.n, parts)
