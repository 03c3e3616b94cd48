"""Chordal partitions of plane graphs into trees.

The construction repeatedly takes the bridge (a component of the uncovered
vertices together with its attachments on earlier trees) that holds the
lowest uncovered vertex, and covers part of it with a new tree.  The new tree
is a Steiner tree through the bridge's vertices near the outer boundary,
padded with all of its neighbours in the bridge.

With ``check=True`` every structural claim that the construction relies on is
asserted while it runs; a failure raises :class:`ClaimError` carrying the
claim name, the step and a witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .embedding import RotationSystem, Subgraph, bridge_of_component
from .graph import Graph, GraphError, Partition, bfs_distances, components, edge_key, quotient
from .steiner import EXACT_MAX_TERMINALS, SteinerTree, steiner_tree


class ClaimError(AssertionError):
    def __init__(self, claim: str, step: int, witness, message: str = ""):
        self.claim = claim
        self.step = step
        self.witness = witness
        super().__init__(f"{claim} failed at step {step}: {message} witness={witness!r}")


@dataclass
class ChordalStep:
    """Everything recorded when the ``index``-th tree (1-based) is built."""

    index: int
    interior: frozenset          # vertices of the bridge that are not attachments
    attachments: frozenset
    touched: tuple               # indices of earlier trees carrying attachments
    outer_attachments: tuple
    terminals: tuple
    core: SteinerTree            # the Steiner tree through the terminals
    parent: dict                 # the padded tree: vertex -> parent (root -> None)
    root: int
    steiner_method: str

    @property
    def vertices(self) -> list[int]:
        return sorted(self.parent)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(edge_key(v, p) for v, p in self.parent.items() if p is not None)

    def subgraph(self) -> Subgraph:
        return Subgraph(self.parent, self.edges())

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "root": self.root,
            "vertices": self.vertices,
            "edges": [list(e) for e in self.edges()],
            "core_edges": [list(e) for e in self.core.edges()],
            "core_vertices": sorted(self.core.vertices),
            "terminals": list(self.terminals),
            "attachments": sorted(self.attachments),
            "outer_attachments": list(self.outer_attachments),
            "touched": list(self.touched),
            "steiner_method": self.steiner_method,
        }


@dataclass
class ChordalResult:
    graph: Graph
    tau: int
    steps: list
    partition: Partition
    claims_checked: dict = field(default_factory=dict)

    @property
    def num_trees(self) -> int:
        return len(self.steps)

    def tree_of(self) -> tuple[int, ...]:
        return self.partition.part_of

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "num_trees": self.num_trees,
            "partition": self.partition.to_json(),
            "trees": [s.to_json() for s in self.steps],
            "claims_checked": dict(sorted(self.claims_checked.items())),
        }


def terminal_bound(max_degree: int, tau: int) -> int:
    """Upper bound on the number of terminals of one step: 4 * sum_{t<=tau} deg^t."""
    return 4 * sum(max_degree ** t for t in range(tau + 1))


def select_bridge(G: Graph, covered: list[int]) -> frozenset:
    """Interior of the bridge holding the lowest uncovered vertex."""
    s = next(v for v in range(G.n) if covered[v] < 0)
    allowed = {v for v in range(G.n) if covered[v] < 0}
    return frozenset(bfs_distances(G, [s], allowed))


def build_T0(G: Graph, interior, terminals, exact_max: int = EXACT_MAX_TERMINALS):
    """Locally minimal Steiner tree for ``terminals`` inside ``G[interior]``."""
    return steiner_tree(G, interior, terminals, exact_max)


def pad_tree(G: Graph, interior, core: SteinerTree, root: int) -> dict:
    """Attach every neighbour of the core inside ``interior`` by one edge to its
    lowest-id core neighbour; return parent pointers rooted at ``root``."""
    cv = core.vertices
    adj = {v: set(a) for v, a in core.adj.items()}
    for v in sorted(cv):
        for w in G.adj[v]:
            if w in interior and w not in cv and w not in adj:
                adj[w] = set()
    for w in list(adj):
        if w not in cv:
            p = min(x for x in G.adj[w] if x in cv)
            adj[w].add(p)
            adj[p].add(w)
    parent = {root: None}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in sorted(adj[v]):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return parent


class _Checker:
    def __init__(self, R: RotationSystem, enabled: bool):
        self.R = R
        self.enabled = enabled
        self.counts: dict[str, int] = {}

    def ok(self, claim: str):
        self.counts[claim] = self.counts.get(claim, 0) + 1

    def require(self, cond: bool, claim: str, step: int, witness, msg: str = ""):
        if not cond:
            raise ClaimError(claim, step, witness, msg)
        self.ok(claim)


def build_chordal_partition(R: RotationSystem, tau: int = 1, check: bool = True,
                            exact_max: int = EXACT_MAX_TERMINALS) -> ChordalResult:
    if tau < 1:
        raise GraphError("tau must be at least 1")
    G = R.graph
    n = G.n
    if n == 0:
        return ChordalResult(G, tau, [], Partition(()), {})
    if len(components(G)) != 1:
        raise GraphError("graph must be connected")
    delta = G.max_degree()
    bound = terminal_bound(delta, tau)
    covered = [-1] * n            # tree index (0-based) of each covered vertex
    steps: list[ChordalStep] = []
    trees_sub: list[Subgraph] = []
    pending: dict[frozenset, int] = {}
    chk = _Checker(R, check)
    j = 0
    while len(steps) == 0 or any(c < 0 for c in covered):
        j += 1
        C = select_bridge(G, covered)
        if check and j > 1:
            chk.require(C in pending, "FiBridgeIsBj", j, min(C),
                        "selected bridge was not created as a bridge of an earlier step")
        pending.pop(C, None)
        B = bridge_of_component(G, C)
        A = B.attachments
        X = tuple(sorted({covered[a] for a in A}))
        if check:
            chk.require(len(X) <= 2, "Invariant(i)", j, X, "attachments on more than two trees")
        if A:
            J = B.subgraph()
            for i in X:
                J = J.union(trees_sub[i])
            walk = set(R.subgraph_outer_face(J))
            A_out = tuple(sorted(a for a in A if a in walk))
            if check:
                chk.require(0 < len(A_out) <= 4, "OuterAttachments", j, A_out)
                for i in X:
                    k = sum(1 for a in A_out if covered[a] == i)
                    chk.require(1 <= k <= 2, "AttachmentsPerOuterTree", j, (i + 1, k),
                                "tree does not have one or two attachments on the outer boundary")
            near = bfs_distances(G, A_out, limit=tau)
            D = tuple(sorted(x for x in near if x in C))
            if check:
                chk.require(len(D) <= bound, "TerminalBound", j, (len(D), bound))
        else:
            A_out = ()
            walk = R.subgraph_outer_face(B.subgraph())
            D = (min(x for x in walk if x in C),)
        if not D:
            raise ClaimError("TerminalsNonEmpty", j, A_out)
        core, method = build_T0(G, C, D, exact_max)
        root = D[0]
        parent = pad_tree(G, C, core, root)
        idx = len(steps)
        for v in parent:
            covered[v] = idx
        step = ChordalStep(j, C, A, X, A_out, D, core, parent, root, method)
        steps.append(step)
        trees_sub.append(step.subgraph())
        new_bridges = components(G, [v for v in C if covered[v] < 0])
        for K in new_bridges:
            pending[frozenset(K)] = j
        if check:
            _check_step(G, R, chk, steps, trees_sub, covered, step, new_bridges)
    if check:
        chk.require(not pending, "FiBridgeIsBj", j, sorted(min(k) for k in pending),
                    "bridges left over at the end")
        _check_quotient_claim(G, chk, steps, covered)
    P = Partition(tuple(covered))
    return ChordalResult(G, tau, steps, P, dict(chk.counts))


def _check_step(G, R, chk, steps, trees_sub, covered, step, new_bridges):
    j = step.index
    me = len(steps) - 1
    C = step.interior
    core_v = step.core.vertices
    T_j = steps[me]
    X = step.touched
    # the core separates the two touched trees inside T_i + T_i' + B_j
    if len(X) == 2:
        i, i2 = X
        start = set(steps[i].parent)
        target = set(steps[i2].parent)
        tree_adj = {}
        for t in (i, i2):
            for u, v in steps[t].edges():
                tree_adj.setdefault(u, []).append(v)
                tree_adj.setdefault(v, []).append(u)
        seen = set(start)
        queue = deque(start)
        hit = None
        while queue and hit is None:
            v = queue.popleft()
            nb = list(tree_adj.get(v, []))
            nb += [w for w in G.adj[v] if (v in C or w in C)]
            for w in nb:
                if w in core_v or w in seen:
                    continue
                if not (w in C or w in start or w in target):
                    continue
                if w in target:
                    hit = w
                    break
                seen.add(w)
                queue.append(w)
        chk.require(hit is None, "VTj0Separates", j, hit,
                    "a path avoids the core between the two touched trees")
    # each touched tree has an edge from its outer attachments to the terminals
    D = set(step.terminals)
    for i in X:
        found = any(w in D for a in step.outer_attachments if covered[a] == i for w in G.adj[a])
        chk.require(found, "TiAdjacentToTj", j, i + 1,
                    "no edge from an outer attachment of the tree to the terminals")
    # trivial bridges at the new tree lie in B_j
    for u in T_j.parent:
        for w in G.adj[u]:
            if covered[w] >= 0 and T_j.parent.get(u) != w and T_j.parent.get(w) != u:
                chk.require(u in C or w in C, "FjBridgeInBj", j, (u, w))
    # every new non-trivial bridge
    for K in new_bridges:
        Kset = set(K)
        att = {w for v in K for w in G.adj[v] if w not in Kset}
        chk.require(bool(att & set(T_j.parent)), "FjBridgeInBj", j, K[0],
                    "new bridge has no attachment on the new tree")
        chk.require(att <= (set(T_j.parent) | step.attachments), "FjBridgeInBj", j, K[0],
                    "new bridge leaves the selected bridge")
        bad = att & core_v
        chk.require(not bad, "NoAttachmentOnTj0", j, sorted(bad))
        Xb = sorted({covered[a] for a in att})
        chk.require(len(Xb) <= 2, "Invariant(i)", j, (K[0], Xb))
        es = {edge_key(v, w) for v in K for w in G.adj[v]}
        Bsub = Subgraph(Kset | att, es)
        for i in Xb:
            Ti = steps[i]
            leaves_ok = all(Ti.parent and (len(Ti.parent) == 1 or _tree_degree(Ti, a) <= 1)
                            for a in att if covered[a] == i)
            chk.require(leaves_ok, "Invariant(ii)", j, (K[0], i + 1), "attachment is not a leaf")
            chk.require(R.in_outer_closure(Bsub, trees_sub[i]), "Invariant(ii)", j, (K[0], i + 1),
                        "tree is not in the closure of the bridge's outer face")
        if len(Xb) == 2:
            a, b = Xb
            chk.require(R.in_outer_closure(Bsub.union(trees_sub[b]), trees_sub[a]),
                        "Invariant(iii)", j, (K[0], a + 1, b + 1))
            chk.require(R.in_outer_closure(Bsub.union(trees_sub[a]), trees_sub[b]),
                        "Invariant(iii)", j, (K[0], b + 1, a + 1))


def _tree_degree(step: ChordalStep, v: int) -> int:
    deg = 1 if step.parent[v] is not None else 0
    # children are vertices whose parent is v
    return deg + sum(1 for w, p in step.parent.items() if p == v)


def _check_quotient_claim(G, chk, steps, covered):
    Q = quotient(G, Partition(tuple(covered)))
    for j in range(len(steps)):
        earlier = [i for i in Q.adj[j] if i < j]
        chk.require(len(earlier) <= 2, "TwoAdjacentEarlierTrees", j + 1, earlier, "adjacent to more than two earlier trees")
        if len(earlier) == 2:
            chk.require(Q.has_edge(*earlier), "TwoAdjacentEarlierTrees", j + 1, earlier, "earlier neighbours not adjacent")


def elimination_width(Q: Graph, order) -> int:
    """Width of the elimination ordering ``order`` (eliminated first to last), with fill-in."""
    adj = [set(a) for a in Q.adj]
    gone = set()
    width = 0
    for v in order:
        nb = adj[v] - gone
        width = max(width, len(nb))
        for a in nb:
            adj[a] |= nb - {a}
        gone.add(v)
    return width
