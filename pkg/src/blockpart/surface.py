"""Partitioning the non-planar part of a graph of bounded Euler genus.

The input is a BFS layering and a tree made of at most ``2g`` vertical paths
whose removal leaves a planar graph.  The tree is cut into slabs of layers;
inside each slab the components are merged along short connecting paths until
no short path joins two of them.  The resulting parts have the property that a
short path clean with respect to them meets at most three parts, which lets a
blocking partition of the planar remainder be extended to the whole graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Graph, GraphError, Layering, Partition, bfs_distances, components
from .verify import verify_ell_blocking, verify_z_property


@dataclass
class VerticalPathTree:
    paths: list

    def __post_init__(self):
        self.paths = [list(map(int, p)) for p in self.paths]

    @property
    def vertices(self) -> set[int]:
        return {v for p in self.paths for v in p}

    def edges(self) -> set[tuple[int, int]]:
        return {tuple(sorted((a, b))) for p in self.paths for a, b in zip(p, p[1:])}

    def validate(self, G: Graph, L: Layering, g: int) -> None:
        if len(self.paths) > 2 * g:
            raise GraphError(f"{len(self.paths)} paths exceed 2g = {2 * g}")
        for p in self.paths:
            layers = [L.layer_of[v] for v in p]
            if len(set(layers)) != len(layers):
                raise GraphError("path meets a layer twice")
            for a, b in zip(p, p[1:]):
                if not G.has_edge(a, b):
                    raise GraphError(f"path uses non-edge ({a}, {b})")
        if self.paths:
            tree = Graph(G.n, sorted(self.edges()))
            verts = self.vertices
            if len(components(tree, verts)) != 1 or tree.m != len(verts) - 1:
                raise GraphError("paths do not form a tree")

    def to_json(self) -> dict:
        return {"paths": self.paths}


def z_width_bound(g: int, ell: int) -> int:
    return 2 * g * ((5 * g + 1) * ell + 3)


@dataclass
class GenusZStep:
    index: int
    x: int
    absorbed: list                  # connecting paths merged in this step
    parts: list                     # the new parts (sorted vertex lists)

    def to_json(self) -> dict:
        return {"index": self.index, "x": self.x, "absorbed": self.absorbed, "parts": self.parts}


@dataclass
class GenusZResult:
    g: int
    ell: int
    parts: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    property_checks: dict = field(default_factory=dict)
    property8: dict = field(default_factory=dict)

    @property
    def vertices(self) -> set[int]:
        return {v for p in self.parts for v in p}

    @property
    def width(self) -> int:
        return max((len(p) for p in self.parts), default=0)

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "ell": self.ell,
            "width": self.width,
            "parts": self.parts,
            "steps": [s.to_json() for s in self.steps],
            "property_checks": dict(sorted(self.property_checks.items())),
            "property8": self.property8,
        }


class GenusZError(AssertionError):
    def __init__(self, prop: str, step: int, detail):
        self.prop = prop
        self.step = step
        super().__init__(f"property {prop} failed at step {step}: {detail}")


def _shortest_connector(G: Graph, allowed: set, comp_of: dict, ell: int):
    """Lexicographically least shortest path of length <= ``ell`` inside ``allowed``
    joining two components (``comp_of`` maps vertex -> component), or None."""
    comps = sorted(set(comp_of.values()))
    if len(comps) < 2:
        return None
    best_d = None
    fields = {}
    for c in comps:
        others = [v for v, k in comp_of.items() if k != c]
        dist = bfs_distances(G, others, allowed, ell)
        fields[c] = dist
        for v, k in comp_of.items():
            if k == c and v in dist and (best_d is None or dist[v] < best_d):
                best_d = dist[v]
    if best_d is None:
        return None
    start = min(v for v, k in comp_of.items() if fields[k].get(v) == best_d)
    dist = fields[comp_of[start]]
    path = [start]
    while dist[path[-1]] > 0:
        cur = path[-1]
        path.append(min(w for w in G.adj[cur] if dist.get(w) == dist[cur] - 1))
    return path


def genus_z_partition(G: Graph, L: Layering, T: VerticalPathTree, g: int, ell: int,
                      z_budget: int = 10 ** 6, exhaustive_ell: int = 6,
                      samples: int = 200, seed: int = 0) -> GenusZResult:
    """Slab-by-slab construction of the parts, checking properties (1)-(8) at every step.

    Property (7) (no path of length <= ell outside the earlier parts meets two new
    parts) is checked exactly by pairwise distances; property (8) by the bounded
    clean-path search, exhaustive when ``ell <= exhaustive_ell`` and otherwise from
    ``samples`` seeded start vertices with ``z_budget`` nodes each (a partial check
    is recorded as such, never as a pass)."""
    if g < 1 or ell < 1:
        raise GraphError("need g >= 1 and ell >= 1")
    T.validate(G, L, g)
    res = GenusZResult(g, ell)
    tv = T.vertices
    if not tv:
        res.property8 = {"holds": True, "exhausted": True, "mode": "exhaustive"}
        return res
    lay = L.layer_of
    W = z_width_bound(g, ell)
    checks = res.property_checks

    def ok(name):
        checks[name] = checks.get(name, 0) + 1

    r = L.root
    xs = [0]
    Z = {r}
    parts = [[r]]
    res.steps.append(GenusZStep(0, 0, [], [[r]]))
    i = 0
    while not tv <= Z:
        i += 1
        x_prev = xs[-1]
        x = x_prev + 3 * g * ell + 1
        allowed = {v for v in range(G.n) if v not in Z}
        X = {v for v in tv if x_prev + 1 <= lay[v] <= x}
        absorbed = []
        while True:
            comp_of = {}
            for k, comp in enumerate(components(G, X)):
                for v in comp:
                    comp_of[v] = k
            P = _shortest_connector(G, allowed, comp_of, ell)
            if P is None:
                break
            absorbed.append(P)
            if len(absorbed) > 2 * g - 1:
                raise GenusZError("absorptions", i, len(absorbed))
            x = max(x, max(lay[v] for v in P))
            X = {v for v in tv if x_prev + 1 <= lay[v] <= x} | {v for Q in absorbed for v in Q}
        xs.append(x)
        Xparts = sorted((sorted(c) for c in components(G, X)), key=lambda p: p[0])
        prev_Z = Z
        Z = Z | X
        # (1)
        if not (x_prev + 3 * g * ell + 1 <= x <= x_prev + 5 * g * ell + 1):
            raise GenusZError("1", i, (x_prev, x))
        ok("1")
        # (2)
        lo = xs[-3] + ell + 1 if i >= 2 else 1
        slab = {v for v in tv if x_prev + 1 <= lay[v] <= x}
        if not slab <= X or any(not (lo <= lay[v] <= x) for v in X):
            raise GenusZError("2", i, (lo, x))
        ok("2")
        # (3)
        if not {v for v in tv if lay[v] <= x} <= Z or any(lay[v] > x for v in Z):
            raise GenusZError("3", i, x)
        ok("3")
        # (4)
        if X & prev_Z:
            raise GenusZError("4", i, sorted(X & prev_Z)[:5])
        ok("4")
        # (5) and (6)
        for p in Xparts:
            if len(p) > W or len(components(G, p)) != 1:
                raise GenusZError("5", i, (len(p), W))
        ok("5")
        parts = parts + Xparts
        if sum(len(p) for p in parts) != len(Z) or max(len(p) for p in parts) > W:
            raise GenusZError("6", i, len(Z))
        ok("6")
        # (7): parts of X pairwise more than ell apart outside the previous Z
        for a in range(len(Xparts)):
            dist = bfs_distances(G, Xparts[a], allowed, ell)
            for b in range(len(Xparts)):
                if b != a and any(v in dist for v in Xparts[b]):
                    raise GenusZError("7", i, (Xparts[a][0], Xparts[b][0]))
        ok("7")
        res.steps.append(GenusZStep(i, x, absorbed, Xparts))
    res.parts = parts
    # (8) on the final partition
    if ell <= exhaustive_ell:
        holds, wit, exhausted = verify_z_property(G, parts, ell, 3, 10 ** 12)
        mode = "exhaustive"
    else:
        holds, wit, exhausted = verify_z_property(G, parts, ell, 3, z_budget, samples, seed)
        mode = f"sampled:{samples}"
    if holds is False:
        raise GenusZError("8", i, wit)
    res.property8 = {"holds": holds, "exhausted": exhausted, "mode": mode}
    ok("8")
    return res


def blocking_genus_combine(G: Graph, zres: GenusZResult, R_prime: Partition, ids: list,
                           ell_P: int, ell_Z: int, budget: int = 10 ** 8) -> Partition:
    """Union of the ``Z`` parts and an ``ell_P``-blocking partition ``R_prime`` of
    ``G - V(Z)`` (vertex ``i`` of which is ``ids[i]`` in ``G``).  The result is
    checked to be ``(4 ell_P + 6)``-blocking."""
    if ell_Z < 4 * ell_P + 7:
        raise GraphError(f"need ell_Z >= 4 ell_P + 7 = {4 * ell_P + 7}")
    if zres.ell < ell_Z:
        raise GraphError(f"Z was built for paths of length {zres.ell} < ell_Z = {ell_Z}")
    zv = zres.vertices
    rest = [v for v in range(G.n) if v not in zv]
    if sorted(ids) != rest:
        raise GraphError("R_prime must partition exactly the vertices outside Z")
    H, _ = G.induced_subgraph(rest)
    pre = verify_ell_blocking(H, R_prime, ell_P, budget)
    if pre.holds is not True:
        raise GraphError(f"R_prime is not verified {ell_P}-blocking")
    parts = [list(p) for p in zres.parts] + [[ids[v] for v in p] for p in R_prime.parts]
    parts.sort(key=min)
    R = Partition.from_parts(G.n, parts)
    bound = 4 * ell_P + 6
    post = verify_ell_blocking(G, R, bound, budget)
    if post.holds is not True:
        raise AssertionError(f"combined partition not verified {bound}-blocking: {post.counterexample}")
    return R
