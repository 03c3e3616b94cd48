"""Tree decompositions and rooted tree-partitions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .graph import Graph, GraphError, Partition, components


class DecompositionError(GraphError):
    pass


class TreeDecomposition:
    def __init__(self, bags: Sequence, tree_edges: Sequence = (), root: int = 0):
        self.bags = [frozenset(int(v) for v in b) for b in bags]
        self.tree_edges = [tuple(sorted((int(a), int(b)))) for a, b in tree_edges]
        self.root = int(root)
        self.nbrs: list[list[int]] = [[] for _ in self.bags]
        for a, b in self.tree_edges:
            self.nbrs[a].append(b)
            self.nbrs[b].append(a)
        for x in self.nbrs:
            x.sort()

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def validate(self, G: Graph) -> None:
        """Raise unless this is a tree decomposition of ``G``."""
        nb = len(self.bags)
        if nb == 0:
            if G.n:
                raise DecompositionError("no bags")
            return
        if len(self.tree_edges) != nb - 1:
            raise DecompositionError("bag tree has the wrong number of edges")
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y in self.nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != nb:
            raise DecompositionError("bag tree is not connected")
        holders: list[list[int]] = [[] for _ in range(G.n)]
        for i, b in enumerate(self.bags):
            for v in b:
                if not 0 <= v < G.n:
                    raise DecompositionError(f"bag {i} holds non-vertex {v}")
                holders[v].append(i)
        for v, hs in enumerate(holders):
            if not hs:
                raise DecompositionError(f"vertex {v} in no bag")
            hset = set(hs)
            sub = {hs[0]}
            queue = deque([hs[0]])
            while queue:
                x = queue.popleft()
                for y in self.nbrs[x]:
                    if y in hset and y not in sub:
                        sub.add(y)
                        queue.append(y)
            if len(sub) != len(hset):
                raise DecompositionError(f"bags holding {v} are not connected")
        for u, v in G.edges():
            if not set(holders[u]) & set(holders[v]):
                raise DecompositionError(f"edge ({u}, {v}) in no bag")

    def restrict(self, vertices) -> "TreeDecomposition":
        """Decomposition of the induced subgraph on ``vertices`` (same bag tree)."""
        keep = frozenset(vertices)
        return TreeDecomposition([b & keep for b in self.bags], self.tree_edges, self.root)

    def to_json(self) -> dict:
        return {
            "bags": [sorted(b) for b in self.bags],
            "tree_edges": [list(e) for e in self.tree_edges],
            "root": self.root,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TreeDecomposition":
        return cls(data["bags"], data["tree_edges"], data.get("root", 0))


@dataclass
class RootedTreePartition:
    """Bags indexed by tree nodes; ``parent[root] is None``.  Bags may be empty."""

    bags: list
    parent: list
    root: int = 0

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.bags]
        for x, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(x)
        return ch

    def levels(self) -> list[int]:
        ch = self.children()
        lev = [0] * len(self.bags)
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y in ch[x]:
                lev[y] = lev[x] + 1
                queue.append(y)
        return lev

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    def tree_max_degree(self) -> int:
        deg = [0] * len(self.bags)
        for x, p in enumerate(self.parent):
            if p is not None:
                deg[x] += 1
                deg[p] += 1
        return max(deg, default=0)

    def node_of(self, n: int) -> list[int]:
        node = [-1] * n
        for x, b in enumerate(self.bags):
            for v in b:
                node[v] = x
        return node

    def validate(self, G: Graph) -> None:
        """Bags partition V(G) and every edge joins equal or tree-adjacent bags."""
        node = self.node_of(G.n)
        total = sum(len(b) for b in self.bags)
        if total != G.n or -1 in node:
            raise DecompositionError("bags do not partition the vertex set")
        for u, v in G.edges():
            a, b = node[u], node[v]
            if a != b and self.parent[a] != b and self.parent[b] != a:
                raise DecompositionError(f"edge ({u}, {v}) joins non-adjacent bags")

    def to_partition(self, n: int) -> Partition:
        return Partition.from_parts(n, [sorted(b) for b in self.bags if b])

    def to_json(self) -> dict:
        return {"bags": [sorted(b) for b in self.bags], "parent": list(self.parent), "root": self.root}


def is_detached(G: Graph, vertices) -> bool:
    """No vertex outside the set has neighbours in two components of ``G[set]``."""
    X = set(vertices)
    comp_of = {}
    for i, comp in enumerate(components(G, X)):
        for v in comp:
            comp_of[v] = i
    for v in range(G.n):
        if v in X:
            continue
        seen = {comp_of[w] for w in G.adj[v] if w in X}
        if len(seen) >= 2:
            return False
    return True


def min_fill_decomposition(G: Graph) -> TreeDecomposition:
    """Heuristic tree decomposition (min-fill-in elimination, via networkx).

    No optimality claim; every bound downstream is stated in terms of the width
    of whatever decomposition is supplied."""
    import networkx as nx
    from networkx.algorithms.approximation import treewidth_min_fill_in

    if G.n == 0:
        return TreeDecomposition([], [], 0)
    H = nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.edges())
    _, T = treewidth_min_fill_in(H)
    nodes = sorted(T.nodes, key=lambda b: (sorted(b), len(b)))
    index = {b: i for i, b in enumerate(nodes)}
    edges = sorted(tuple(sorted((index[a], index[b]))) for a, b in T.edges)
    td = TreeDecomposition([sorted(b) for b in nodes], edges, 0)
    # networkx returns a forest of one tree per component; join the pieces
    if len(edges) != len(nodes) - 1:
        seen = [False] * len(nodes)
        roots = []
        for s in range(len(nodes)):
            if seen[s]:
                continue
            roots.append(s)
            seen[s] = True
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in td.nbrs[x]:
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
        edges = edges + [(roots[0], r) for r in roots[1:]]
        td = TreeDecomposition([sorted(b) for b in nodes], edges, 0)
    return td
