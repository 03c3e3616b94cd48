"""Core graph types: simple undirected graphs, partitions, BFS layerings.

Vertices are the integers ``0..n-1``.  Every tie is broken by the lowest
vertex id, so all results are deterministic.  Unreachable distances are
reported as :data:`INF`, never as a large integer.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

INF = math.inf

# Hard cap on the size of materialised strong products.
MAX_PRODUCT_VERTICES = 5_000_000


class GraphError(ValueError):
    """Malformed graph, partition or query."""


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph on ``range(n)``."""

    __slots__ = ("n", "adj", "_nbrs", "_m")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise GraphError("negative vertex count")
        adj: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if v in adj[u]:
                raise GraphError(f"parallel edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
            m += 1
        self.n = n
        self._nbrs = tuple(frozenset(a) for a in adj)
        self.adj = tuple(tuple(sorted(a)) for a in adj)
        self._m = m

    @property
    def m(self) -> int:
        return self._m

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._nbrs[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbrs[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, a in enumerate(self.adj):
            for v in a:
                if u < v:
                    yield (u, v)

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Return ``(H, old_ids)`` where vertex ``i`` of ``H`` is ``old_ids[i]``."""
        old = sorted(set(vertices))
        new = {v: i for i, v in enumerate(old)}
        es = []
        for v in old:
            for w in self.adj[v]:
                if v < w and w in new:
                    es.append((new[v], new[w]))
        return Graph(len(old), es), old

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        return cls(int(data["n"]), data["edges"])


def dumps(obj: dict) -> str:
    """Canonical JSON text used for every file the package writes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Partition:
    """Assignment of every vertex to a part id in ``0..num_parts-1``."""

    part_of: tuple[int, ...]
    parts: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pof = tuple(int(p) for p in self.part_of)
        object.__setattr__(self, "part_of", pof)
        k = max(pof) + 1 if pof else 0
        buckets: list[list[int]] = [[] for _ in range(k)]
        for v, p in enumerate(pof):
            if p < 0:
                raise GraphError(f"negative part id at vertex {v}")
            buckets[p].append(v)
        if any(not b for b in buckets):
            raise GraphError("part ids must be dense (no empty part)")
        object.__setattr__(self, "parts", tuple(tuple(b) for b in buckets))

    @classmethod
    def from_parts(cls, n: int, parts: Iterable[Iterable[int]]) -> "Partition":
        pof = [-1] * n
        for i, part in enumerate(parts):
            for v in part:
                if pof[v] != -1:
                    raise GraphError(f"vertex {v} in two parts")
                pof[v] = i
        if any(p == -1 for p in pof):
            raise GraphError("parts do not cover all vertices")
        return cls(tuple(pof))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.part_of)

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def width(self) -> int:
        return max((len(p) for p in self.parts), default=0)

    def canonical(self) -> "Partition":
        """Relabel parts in order of their lowest vertex."""
        order = sorted(range(len(self.parts)), key=lambda i: self.parts[i][0])
        rank = {old: new for new, old in enumerate(order)}
        return Partition(tuple(rank[p] for p in self.part_of))

    def to_json(self) -> dict:
        return {"part_of": list(self.part_of)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Partition":
        return cls(tuple(data["part_of"]))


@dataclass(frozen=True)
class Layering:
    root: int
    layer_of: tuple  # int, or None for vertices unreachable from the root

    def layer(self, i: int) -> list[int]:
        return [v for v, l in enumerate(self.layer_of) if l == i]

    @property
    def depth(self) -> int:
        return max((l for l in self.layer_of if l is not None), default=0)


class RootedTree:
    """A tree on a subset of the vertices, stored by parent pointers."""

    def __init__(self, root: int, parent: Mapping[int, int | None]):
        self.root = root
        self.parent = dict(parent)
        if self.parent.get(root, 0) is not None:
            raise GraphError("root must have parent None")
        self.children: dict[int, list[int]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                if p not in self.children:
                    raise GraphError(f"parent {p} of {v} not in tree")
                self.children[p].append(v)
        for c in self.children.values():
            c.sort()
        self.depth: dict[int, int] = {root: 0}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for c in self.children[v]:
                self.depth[c] = self.depth[v] + 1
                queue.append(c)
        if len(self.depth) != len(self.parent):
            raise GraphError("parent pointers do not form a tree")

    def __len__(self) -> int:
        return len(self.parent)

    def __contains__(self, v: int) -> bool:
        return v in self.parent

    @property
    def vertices(self) -> list[int]:
        return sorted(self.parent)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(edge_key(v, p) for v, p in self.parent.items() if p is not None)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (self.parent[v] is not None)

    def path(self, x: int, y: int) -> list[int]:
        """Vertices of the tree path from ``x`` to ``y``."""
        a, b = [x], [y]
        while self.depth[a[-1]] > self.depth[b[-1]]:
            a.append(self.parent[a[-1]])
        while self.depth[b[-1]] > self.depth[a[-1]]:
            b.append(self.parent[b[-1]])
        while a[-1] != b[-1]:
            a.append(self.parent[a[-1]])
            b.append(self.parent[b[-1]])
        return a + b[-2::-1]


def bfs_distances(G: Graph, sources: Iterable[int], allowed=None, limit=None) -> dict[int, int]:
    """Multi-source BFS.  ``allowed`` restricts the vertices that may be entered."""
    dist: dict[int, int] = {}
    queue = deque()
    for s in sorted(set(sources)):
        if allowed is None or s in allowed:
            dist[s] = 0
            queue.append(s)
    adj = G.adj
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if limit is not None and dv >= limit:
            continue
        for w in adj[v]:
            if w not in dist and (allowed is None or w in allowed):
                dist[w] = dv + 1
                queue.append(w)
    return dist


def bfs_layering(G: Graph, root: int) -> Layering:
    if not 0 <= root < G.n:
        raise GraphError(f"root {root} not a vertex")
    dist = bfs_distances(G, [root])
    return Layering(root, tuple(dist.get(v) for v in range(G.n)))


def bfs_spanning_tree(G: Graph, root) -> RootedTree:
    """BFS tree of the component of the root; each vertex takes its lowest-id parent.

    ``root`` is a vertex or a :class:`Layering` (whose root and layers are used)."""
    if isinstance(root, Layering):
        L, root = root, root.root
        if len(L.layer_of) != G.n:
            raise GraphError("layering does not match graph")
        dist = {v: d for v, d in enumerate(L.layer_of) if d is not None}
    else:
        if not 0 <= root < G.n:
            raise GraphError(f"root {root} not a vertex")
        dist = bfs_distances(G, [root])
    parent: dict[int, int | None] = {root: None}
    for v, d in dist.items():
        if v != root:
            parent[v] = min(w for w in G.adj[v] if dist.get(w) == d - 1)
    return RootedTree(root, parent)


def _as_vertices(x) -> set[int]:
    out: set[int] = set()
    for item in x:
        if isinstance(item, (tuple, list)):
            out.update(int(v) for v in item)
        else:
            out.add(int(item))
    return out


def distance(G: Graph, a, b):
    """Length of a shortest path between two vertex sets (edges count via endpoints).

    Each argument may be a vertex, an edge ``(u, v)`` or an iterable of either.
    """
    A = {a} if isinstance(a, int) else _as_vertices([a] if _is_edge(a) else a)
    B = {b} if isinstance(b, int) else _as_vertices([b] if _is_edge(b) else b)
    if not A or not B:
        raise GraphError("distance to an empty set is undefined")
    if A & B:
        return 0
    dist: dict[int, int] = {}
    queue = deque()
    for s in sorted(A):
        dist[s] = 0
        queue.append(s)
    while queue:
        v = queue.popleft()
        for w in G.adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                if w in B:
                    return dist[w]
                queue.append(w)
    return INF


def _is_edge(x) -> bool:
    return isinstance(x, tuple) and len(x) == 2 and all(isinstance(t, int) for t in x)


def components(G: Graph, vertices: Iterable[int] | None = None) -> list[list[int]]:
    """Connected components of ``G[vertices]``, each sorted, ordered by lowest vertex."""
    allowed = set(range(G.n)) if vertices is None else set(vertices)
    seen: set[int] = set()
    out = []
    for s in sorted(allowed):
        if s in seen:
            continue
        comp = list(bfs_distances(G, [s], allowed))
        seen.update(comp)
        out.append(sorted(comp))
    return out


def quotient(G: Graph, P: Partition) -> Graph:
    if P.n != G.n:
        raise GraphError("partition size does not match graph")
    es = set()
    pof = P.part_of
    for u, v in G.edges():
        a, b = pof[u], pof[v]
        if a != b:
            es.add(edge_key(a, b))
    return Graph(len(P.parts), sorted(es))


def strong_product(A: Graph, B: Graph) -> Graph:
    """Strong product; vertex ``(a, b)`` has id ``a * B.n + b``."""
    if A.n * B.n > MAX_PRODUCT_VERTICES:
        raise GraphError("strong product too large to materialise")
    nb = B.n
    es = []
    bedges = list(B.edges())
    for a in range(A.n):
        for x, y in bedges:
            es.append((a * nb + x, a * nb + y))
    for a, c in A.edges():
        for x in range(nb):
            es.append((a * nb + x, c * nb + x))
            for y in B.adj[x]:
                es.append((a * nb + x, c * nb + y))
    return Graph(A.n * nb, es)


def is_connected_partition(G: Graph, P: Partition) -> bool:
    if P.n != G.n:
        return False
    for part in P.parts:
        if len(components(G, part)) != 1:
            return False
    return True


def h_partition_width_check(G: Graph, P: Partition, H: Graph, p: int) -> bool:
    """Is ``P`` an ``H``-partition of width at most ``p``?  Part ``i`` is labelled by
    vertex ``i`` of ``H``; no search over other labellings is made."""
    if P.n != G.n:
        raise GraphError("partition does not match graph")
    if len(P.parts) > H.n:
        raise GraphError("more parts than vertices of H to label them")
    if P.width > p:
        return False
    return all(H.has_edge(a, b) for a, b in quotient(G, P).edges())
