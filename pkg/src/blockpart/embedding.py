"""Combinatorial plane embeddings (rotation systems) and bridges.

Faces are traced with the rule ``next(u -> v) = (v -> w)`` where ``w`` follows
``u`` in the cyclic rotation at ``v``.  The outer face of the embedded graph is
fixed by one dart on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .graph import Graph, GraphError, bfs_spanning_tree, components, edge_key


class EmbeddingError(GraphError):
    pass


class Subgraph:
    """A vertex set together with an edge set (edges stored as sorted pairs)."""

    __slots__ = ("vertices", "edges")

    def __init__(self, vertices: Iterable[int], edges: Iterable[Sequence[int]] = ()):
        self.vertices = frozenset(vertices)
        self.edges = frozenset(edge_key(u, v) for u, v in edges)

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def union(self, other: "Subgraph") -> "Subgraph":
        s = Subgraph(())
        s.vertices = self.vertices | other.vertices
        s.edges = self.edges | other.edges
        return s

    def __repr__(self) -> str:
        return f"Subgraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"


class RotationSystem:
    """Cyclic neighbour orders for a connected plane graph plus an outer-face dart."""

    def __init__(self, rotation: Sequence[Sequence[int]], outer_dart: tuple[int, int]):
        n = len(rotation)
        edges = set()
        for v, rot in enumerate(rotation):
            if len(set(rot)) != len(rot):
                raise EmbeddingError(f"repeated neighbour in rotation at {v}")
            for w in rot:
                if not 0 <= w < n or w == v:
                    raise EmbeddingError(f"bad neighbour {w} at {v}")
                edges.add(edge_key(v, w))
        for u, v in edges:
            if u not in rotation[v] or v not in rotation[u]:
                raise EmbeddingError(f"edge ({u}, {v}) listed on one side only")
        self.graph = Graph(n, sorted(edges))
        self.rotation = tuple(tuple(int(w) for w in rot) for rot in rotation)
        self._pos = tuple({w: i for i, w in enumerate(rot)} for rot in self.rotation)
        u, v = outer_dart
        if n > 1 and v not in self._pos[u]:
            raise EmbeddingError("outer dart is not an edge")
        self.outer_dart = (int(u), int(v))
        self._locator = None

    @property
    def n(self) -> int:
        return self.graph.n

    def succ(self, v: int, u: int) -> int:
        rot = self.rotation[v]
        return rot[(self._pos[v][u] + 1) % len(rot)]

    def face_of_dart(self, u: int, v: int) -> list[tuple[int, int]]:
        darts = [(u, v)]
        a, b = v, self.succ(v, u)
        while (a, b) != (u, v):
            darts.append((a, b))
            a, b = b, self.succ(b, a)
        return darts

    def faces(self) -> list[list[tuple[int, int]]]:
        seen = set()
        out = []
        for v in range(self.n):
            for w in self.rotation[v]:
                if (v, w) not in seen:
                    f = self.face_of_dart(v, w)
                    seen.update(f)
                    out.append(f)
        return out

    def euler_check(self) -> bool:
        """True iff the rotation system is planar (V - E + F = 2 for connected G)."""
        G = self.graph
        if G.n == 0:
            return True
        if len(components(G)) != 1:
            raise EmbeddingError("euler check needs a connected graph")
        if G.m == 0:
            return True
        return G.n - G.m + len(self.faces()) == 2

    def outer_face(self) -> list[tuple[int, int]]:
        if self.graph.m == 0:
            return []
        return self.face_of_dart(*self.outer_dart)

    # -- serialisation -------------------------------------------------
    def to_json(self) -> dict:
        u, v = self.outer_dart
        lo, hi = edge_key(u, v)
        return {
            "rotation": [list(r) for r in self.rotation],
            "outer_face_edge": [lo, hi],
            "outer_face_side": 0 if (u, v) == (lo, hi) else 1,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RotationSystem":
        lo, hi = data["outer_face_edge"]
        dart = (lo, hi) if int(data.get("outer_face_side", 0)) == 0 else (hi, lo)
        return cls(data["rotation"], dart)

    # -- locating subgraph faces ----------------------------------------
    def _outer_anchor(self):
        """Root of a BFS tree grown from a vertex on the outer face."""
        if self._locator is None:
            if self.graph.m == 0:
                root, corner = 0, None
            else:
                walk = self.outer_face()
                root = min(d[0] for d in walk)
                # corner of the outer face at root: (u -> root -> w)
                for i, (a, b) in enumerate(walk):
                    if b == root:
                        corner = a
                        break
            tree = bfs_spanning_tree(self.graph, root)
            self._locator = (root, corner, tree)
        return self._locator

    def _h_pred(self, H: Subgraph, v: int, start: int, inclusive: bool):
        """Nearest H-neighbour of ``v`` at or before ``start`` in rotation order."""
        rot = self.rotation[v]
        k = len(rot)
        i = self._pos[v][start]
        for step in range(0 if inclusive else 1, k + 1):
            w = rot[(i - step) % k]
            if edge_key(v, w) in H.edges:
                return w
        return None

    def _h_succ(self, H: Subgraph, v: int, u: int) -> int:
        rot = self.rotation[v]
        k = len(rot)
        i = self._pos[v][u]
        for step in range(1, k + 1):
            w = rot[(i + step) % k]
            if edge_key(v, w) in H.edges:
                return w
        raise EmbeddingError("dart not in subgraph")

    def h_face(self, H: Subgraph, u: int, v: int) -> list[tuple[int, int]]:
        """Face of the embedded subgraph ``H`` containing the dart ``u -> v``."""
        darts = [(u, v)]
        a, b = v, self._h_succ(H, v, u)
        while (a, b) != (u, v):
            darts.append((a, b))
            a, b = b, self._h_succ(H, b, a)
        return darts

    def corner_dart(self, H: Subgraph, v: int, w: int, inclusive: bool = False):
        """Dart of ``H`` entering ``v`` whose face holds the edge ``v-w`` near ``v``.

        Returns ``None`` when ``v`` has no incident edge in ``H``.
        """
        h = self._h_pred(H, v, w, inclusive)
        return None if h is None else (h, v)

    def outer_corner(self, H: Subgraph):
        """A dart of ``H`` on the face of ``H`` containing the outer face of G.

        Returns ``("vertex", v)`` when that face is bounded by an isolated vertex.
        """
        if not H.vertices:
            raise EmbeddingError("empty subgraph")
        root, corner, tree = self._outer_anchor()
        if root in H.vertices:
            v, w, inclusive = root, corner, True
            if w is None:
                return ("vertex", root)
        else:
            depth = tree.depth
            v = min(H.vertices, key=lambda x: (depth.get(x, 1 << 60), x))
            if v not in depth:
                raise EmbeddingError("subgraph not in the component of the outer face")
            w, inclusive = tree.parent[v], False
        d = self.corner_dart(H, v, w, inclusive)
        return ("vertex", v) if d is None else ("dart", d)

    def subgraph_outer_face(self, H: Subgraph) -> list[int]:
        """Boundary walk (vertex sequence) of the face of H that contains G's outer face."""
        kind, x = self.outer_corner(H)
        if kind == "vertex":
            return [x]
        return [a for a, _ in self.h_face(H, *x)]

    def subgraph_outer_darts(self, H: Subgraph):
        kind, x = self.outer_corner(H)
        if kind == "vertex":
            return kind, x
        return kind, frozenset(self.h_face(H, *x))

    def in_outer_closure(self, H: Subgraph, T: Subgraph) -> bool:
        """Is the connected subgraph ``T`` inside the closure of H's outer face?

        ``T`` may share vertices with ``H`` but no edges.
        """
        kind, outer = self.subgraph_outer_darts(H)
        shared = T.vertices & H.vertices
        if kind == "vertex":
            # H is a single vertex: everything lies in its only face.
            return True
        outer_vs = {a for a, _ in outer}
        if not shared:
            return self._locate_isolated(H, min(T.vertices), outer)
        for v in shared:
            inc = [w for w in self.rotation[v] if edge_key(v, w) in T.edges]
            if not inc:
                if v not in outer_vs:
                    return False
            for w in inc:
                d = self.corner_dart(H, v, w)
                if d is None or d not in outer:
                    return False
        return True

    def _locate_isolated(self, H: Subgraph, x: int, outer) -> bool:
        """Is vertex ``x`` (not in H) inside H's outer face?"""
        root, _, tree = self._outer_anchor()
        path = [x]
        while path[-1] != root:
            p = tree.parent[path[-1]]
            if p in H.vertices:
                d = self.corner_dart(H, p, path[-1])
                return d is not None and d in outer
            path.append(p)
        return True


@dataclass(frozen=True)
class Bridge:
    vertices: frozenset
    edges: frozenset
    attachments: frozenset
    trivial: bool

    def subgraph(self) -> Subgraph:
        s = Subgraph(())
        s.vertices = self.vertices
        s.edges = self.edges
        return s

    @property
    def interior(self) -> frozenset:
        return self.vertices - self.attachments


def bridge_of_component(G: Graph, comp: Iterable[int]) -> Bridge:
    """Non-trivial bridge formed by a component and its neighbourhood."""
    C = frozenset(comp)
    att = set()
    es = set()
    for v in C:
        for w in G.adj[v]:
            es.add(edge_key(v, w))
            if w not in C:
                att.add(w)
    return Bridge(C | att, frozenset(es), frozenset(att), False)


def bridges(G: Graph, F: Subgraph) -> list[Bridge]:
    """All F-bridges: trivial ones first (sorted), then non-trivial by lowest vertex."""
    out = []
    for u, v in G.edges():
        if u in F.vertices and v in F.vertices and (u, v) not in F.edges:
            out.append(Bridge(frozenset((u, v)), frozenset([(u, v)]), frozenset((u, v)), True))
    rest = [v for v in range(G.n) if v not in F.vertices]
    for comp in components(G, rest):
        out.append(bridge_of_component(G, comp))
    return out


def boundary_attachments(R: RotationSystem, J: Subgraph, A: Iterable[int]) -> list[int]:
    """Vertices of ``A`` on the boundary of the outer face of ``J``."""
    walk = set(R.subgraph_outer_face(J))
    return sorted(a for a in A if a in walk)
