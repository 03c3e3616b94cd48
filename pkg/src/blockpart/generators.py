"""Seeded instance generators.  All randomness comes from :class:`SplitMix64`."""

from __future__ import annotations

import hashlib
import itertools
from collections import deque
from pathlib import Path

from .decomposition import TreeDecomposition
from .embedding import RotationSystem
from .graph import Graph, GraphError, bfs_layering, bfs_spanning_tree, dumps, edge_key
from .rng import SplitMix64


class GenerationError(GraphError):
    pass


def _pick_outer(rotation) -> tuple[int, int]:
    """Use the longest face (lowest starting dart on ties) as the outer face."""
    R = RotationSystem(rotation, (0, rotation[0][0]) if rotation and rotation[0] else (0, 0))
    if R.graph.m == 0:
        return (0, 0)
    best = max(R.faces(), key=lambda f: (len(f), [-x for x in min(f)]))
    return min(best)


def grid(m: int, n: int):
    """The ``m x n`` grid with its plane embedding and a width-``min(m, n)`` decomposition.

    Vertex ``(r, c)`` has id ``r * n + c``.
    """
    if m < 1 or n < 1:
        raise GenerationError("grid sides must be positive")
    vid = lambda r, c: r * n + c
    rotation = []
    for r in range(m):
        for c in range(n):
            rot = []
            for dr, dc in ((0, 1), (-1, 0), (0, -1), (1, 0)):
                if 0 <= r + dr < m and 0 <= c + dc < n:
                    rot.append(vid(r + dr, c + dc))
            rotation.append(rot)
    R = RotationSystem(rotation, _pick_outer(rotation))
    # Staircase decomposition along the longer side.
    if m <= n:
        order = [vid(r, c) for c in range(n) for r in range(m)]
        s = m
    else:
        order = [vid(r, c) for r in range(m) for c in range(n)]
        s = n
    N = m * n
    if N <= s + 1:
        bags = [order]
    else:
        bags = [order[t:t + s + 1] for t in range(N - s)]
    td = TreeDecomposition(bags, [(t, t + 1) for t in range(len(bags) - 1)], 0)
    return R.graph, R, td


def complete_kary_tree(b: int, h: int):
    """Complete ``b``-ary tree of height ``h`` in BFS order (children of v: bv+1..bv+b)."""
    if b < 1 or h < 0:
        raise GenerationError("need b >= 1 and h >= 0")
    count = sum(b ** i for i in range(h + 1))
    parent = [None] + [(v - 1) // b for v in range(1, count)]
    rotation = []
    for v in range(count):
        rot = [] if parent[v] is None else [parent[v]]
        rot += [c for c in range(b * v + 1, b * v + b + 1) if c < count]
        rotation.append(rot)
    R = RotationSystem(rotation, (0, 1) if count > 1 else (0, 0))
    if count == 1:
        td = TreeDecomposition([[0]], [], 0)
    else:
        td = TreeDecomposition([[v, parent[v]] for v in range(1, count)],
                               [(v - 1, parent[v] - 1) for v in range(2, count) if parent[v] > 0]
                               + [(v - 1, 0) for v in range(2, count) if parent[v] == 0 and v != 1], 0)
    return R.graph, R, td


def stacked_triangulation(n: int, seed: int):
    """Random stacked triangulation: repeatedly insert a vertex into an inner face.

    The face ``1 -> 0 -> 2`` of the starting triangle is the outer face.
    """
    if n < 1:
        raise GenerationError("need n >= 1")
    if n <= 3:
        rotation = {1: [[]], 2: [[1], [0]], 3: [[1, 2], [2, 0], [0, 1]]}[n]
        R = RotationSystem(rotation, (1, 0) if n > 1 else (0, 0))
        return R.graph, R
    rng = SplitMix64(seed)
    rot = [[1, 2], [2, 0], [0, 1]]
    inner = [(0, 1, 2)]
    for x in range(3, n):
        i = rng.below(len(inner))
        a, b, c = inner[i]
        for v, after in ((b, a), (c, b), (a, c)):
            r = rot[v]
            r.insert(r.index(after) + 1, x)
        rot.append([b, a, c])
        inner[i] = (a, b, x)
        inner.append((b, c, x))
        inner.append((c, a, x))
    R = RotationSystem(rot, (1, 0))
    if not R.euler_check():
        raise GenerationError("internal error: stacked triangulation not planar")
    return R.graph, R


def sparse_plane_graph(n: int, seed: int, keep: float = 0.5):
    """A stacked triangulation thinned out: a BFS spanning tree from vertex 0 is
    kept, every other edge survives with probability ``keep``.  Still connected
    and plane, with many faces of length greater than three."""
    G, R = stacked_triangulation(n, seed)
    if n <= 3:
        return G, R
    rng = SplitMix64(seed ^ 0x5EED)
    tree = bfs_spanning_tree(G, 0)
    kept = {edge_key(v, p) for v, p in tree.parent.items() if p is not None}
    scale = 1 << 53
    for e in G.edges():
        if e not in kept and rng.below(scale) < keep * scale:
            kept.add(e)
    rotation = [[w for w in R.rotation[v] if edge_key(v, w) in kept] for v in range(n)]
    R2 = RotationSystem(rotation, (1, 0))
    return R2.graph, R2


def partial_ktree(n: int, k: int, max_degree: int, seed: int, drop: float = 0.25):
    """Random partial ``k``-tree with maximum degree at most ``max_degree``.

    A ``k``-tree is grown by attaching each new vertex to a random ``k``-clique
    that still has a vertex of spare degree; edges into saturated vertices are
    skipped, and other edges are dropped with probability ``drop``.  Each new
    vertex keeps at least one edge, so the result is connected.  Returns
    ``(G, td)`` where ``td`` has width at most ``k``.
    """
    if k < 1 or n < k + 1 or max_degree < max(2, k + 1):
        raise GenerationError("need n > k >= 1 and max_degree > max(1, k)")
    rng = SplitMix64(seed)
    threshold = int(drop * (1 << 64))
    deg = [0] * n
    edges = []

    def add(u, v):
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1

    first = list(range(k + 1))
    for v in range(1, k + 1):
        add(v - 1, v)
    for u, v in itertools.combinations(first, 2):
        if v != u + 1 and deg[u] < max_degree and deg[v] < max_degree and rng.next_u64() >= threshold:
            add(u, v)
    bags = [first]
    tree_edges = []
    cliques = [(tuple(sorted(c)), 0) for c in itertools.combinations(first, k)]
    open_ = list(range(len(cliques)))   # candidates; saturated ones are dropped lazily
    for x in range(k + 1, n):
        while True:
            if not open_:
                raise GenerationError("no clique with spare degree left")
            i = rng.below(len(open_))
            cl, home = cliques[open_[i]]
            if any(deg[v] < max_degree for v in cl):
                break
            open_[i] = open_[-1]
            open_.pop()
        anchor = min((v for v in cl if deg[v] < max_degree), key=lambda v: (deg[v], v))
        add(anchor, x)
        for v in cl:
            if v != anchor and deg[v] < max_degree and deg[x] < max_degree and rng.next_u64() >= threshold:
                add(v, x)
        bags.append(list(cl) + [x])
        tree_edges.append((home, len(bags) - 1))
        for v in cl:
            open_.append(len(cliques))
            cliques.append((tuple(sorted((set(cl) - {v}) | {x})), len(bags) - 1))
    return Graph(n, edges), TreeDecomposition(bags, tree_edges, 0)


# -- high-girth regular graphs ------------------------------------------------

def girth(G: Graph) -> float:
    """Exact girth by BFS from every vertex (``inf`` for forests)."""
    best = float("inf")
    for s in range(G.n):
        dist = {s: 0}
        par = {s: -1}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            if 2 * dist[v] + 1 >= best:
                break
            for w in G.adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    par[w] = v
                    queue.append(w)
                elif par[v] != w:
                    best = min(best, dist[v] + dist[w] + 1)
    return best


def _closed_walk_forms(k, edges, cotree, max_len):
    """Voltage sums (over cotree edges) of short closed non-backtracking walks."""
    darts = [[] for _ in range(k)]
    for i, (u, v) in enumerate(edges):
        darts[u].append((v, i, 1))
        darts[v].append((u, i, -1))
    col = {e: j for j, e in enumerate(cotree)}
    out = set()
    zero = (0,) * len(cotree)

    def walk(s, v, first, last, depth, vec):
        for w, i, sg in darts[v]:
            if i == last:
                continue
            nv = vec
            if i in col:
                nv = list(vec)
                nv[col[i]] += sg
                nv = tuple(nv)
            if w == s and i != first and depth + 1 >= 3:
                out.add(max(nv, tuple(-c for c in nv)))
            if depth + 1 < max_len:
                walk(s, w, first if depth else i, i, depth + 1, nv)

    for s in range(k):
        walk(s, s, None, None, 0, zero)
    return sorted(out)


def _cyclic_lift(k, edges, m, g, rng, budget):
    tree, seen, queue = [], {0}, deque([0])
    inc = [[] for _ in range(k)]
    for i, (u, v) in enumerate(edges):
        inc[u].append((v, i))
        inc[v].append((u, i))
    while queue:
        u = queue.popleft()
        for v, i in inc[u]:
            if v not in seen:
                seen.add(v)
                tree.append(i)
                queue.append(v)
    cotree = [i for i in range(len(edges)) if i not in set(tree)]
    forms = _closed_walk_forms(k, edges, cotree, g - 1)
    if any(not any(f) for f in forms):
        return None
    by_last = [[] for _ in cotree]
    for f in forms:
        by_last[max(j for j, c in enumerate(f) if c)].append(f)
    orders = []
    for _ in cotree:
        vals = list(range(m))
        rng.shuffle(vals)
        orders.append(vals)
    x = [0] * len(cotree)
    nodes = 0
    # iterative backtracking over cotree voltages
    pos = [0] * len(cotree)
    j = 0
    while 0 <= j < len(cotree):
        if pos[j] == m:
            pos[j] = 0
            j -= 1
            continue
        x[j] = orders[j][pos[j]]
        pos[j] += 1
        nodes += 1
        if nodes > budget:
            return None
        if all(sum(c * x[t] for t, c in enumerate(f)) % m for f in by_last[j]):
            j += 1
    if j < 0:
        return None
    volt = [0] * len(edges)
    for t, e in enumerate(cotree):
        volt[e] = x[t]
    es = []
    for (u, v), a in zip(edges, volt):
        for i in range(m):
            es.append((u * m + i, v * m + (i + a) % m))
    return Graph(k * m, es)


def regular_high_girth(n: int, g: int, seed: int, d: int = 4, budget: int = 2_000_000) -> Graph:
    """Random ``d``-regular graph on ``n`` vertices with girth at least ``g``.

    Sampled as a cyclic lift of ``K_{d+1}`` or ``K_{d,d}`` (whichever divides
    ``n``) with seeded random voltages; short closed walks in the base graph
    become linear constraints solved by backtracking.  The girth of the
    result is verified exactly.
    """
    rng = SplitMix64(seed)
    bases = []
    if n % (d + 1) == 0:
        bases.append((d + 1, list(itertools.combinations(range(d + 1), 2))))
    if n % (2 * d) == 0:
        bases.append((2 * d, [(a, b) for a in range(d) for b in range(d, 2 * d)]))
    for b in (budget // 100, budget // 10, budget):
        for k, edges in bases:
            G = _cyclic_lift(k, edges, n // k, g, rng, b)
            if G is not None and girth(G) >= g:
                return G
    raise GenerationError(f"no {d}-regular lift with n={n}, girth>={g} found within budget")


# -- layered instances with a few non-planar handles -----------------------------

def layered_genus_instance(g: int, ell: int, seed: int, rows: int | None = None, cols: int = 10):
    """Layered graph with a tree of ``2g`` vertical paths carrying random handles.

    A root ``0`` is joined to every vertex of the first grid row, so the BFS
    layering from the root is the row index plus one.  The tree ``T`` is the
    union of ``2g`` root-to-bottom columns.  Extra edges join vertices of
    different tree columns in equal or consecutive rows; deleting the tree
    leaves a planar grid remnant.  Returns ``(G, layering, paths)``.
    """
    if g < 0 or ell < 1:
        raise GenerationError("need g >= 0 and ell >= 1")
    rng = SplitMix64(seed)
    if rows is None:
        rows = 3 * max(1, (5 * g + 1) * ell + 2)
    cols = max(cols, 2 * g)
    vid = lambda r, c: 1 + r * cols + c
    edges = [(0, vid(0, c)) for c in range(cols)]
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    chosen = list(range(cols))
    rng.shuffle(chosen)
    chosen = sorted(chosen[:2 * g])
    paths = [[0] + [vid(r, c) for r in range(rows)] for c in chosen]
    existing = {tuple(sorted(e)) for e in edges}
    handles = 0
    for a, b in itertools.combinations(chosen, 2):
        for _ in range(1 + rng.below(3)):
            r = rng.below(rows)
            r2 = min(rows - 1, r + rng.below(2))
            e = tuple(sorted((vid(r, a), vid(r2, b))))
            if e not in existing:
                existing.add(e)
                edges.append(e)
                handles += 1
    G = Graph(1 + rows * cols, sorted(existing))
    L = bfs_layering(G, 0)
    for p in paths:
        for x, y in zip(p, p[1:]):
            if L.layer_of[y] != L.layer_of[x] + 1:
                raise GenerationError("generated path is not vertical")
    return G, L, paths


# -- corpus ---------------------------------------------------------------------

def instance_hash(obj: dict) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


def write_corpus(out_dir, kind: str, seeds, **params) -> dict:
    """Write one JSON file per seed plus ``manifest.json`` listing sha256 hashes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for seed in seeds:
        obj = generate(kind, seed=seed, **params)
        name = f"{kind}_{seed}.json"
        text = dumps(obj)
        (out / name).write_text(text)
        entries.append({"file": name, "seed": seed, "sha256": hashlib.sha256(text.encode()).hexdigest()})
    manifest = {"kind": kind, "params": params, "instances": entries}
    (out / "manifest.json").write_text(dumps(manifest))
    return manifest


def generate(kind: str, seed: int = 0, **p) -> dict:
    """Instance as a JSON-ready dict (graph plus whatever structure comes with it)."""
    if kind == "grid":
        G, R, td = grid(int(p["m"]), int(p["n"]))
        return {"graph": G.to_json(), "embedding": R.to_json(), "decomposition": td.to_json()}
    if kind == "triangulation":
        G, R = stacked_triangulation(int(p["n"]), seed)
        return {"graph": G.to_json(), "embedding": R.to_json()}
    if kind == "plane":
        G, R = sparse_plane_graph(int(p["n"]), seed, float(p.get("keep", 0.5)))
        return {"graph": G.to_json(), "embedding": R.to_json()}
    if kind == "tree":
        G, R, td = complete_kary_tree(int(p["b"]), int(p["h"]))
        return {"graph": G.to_json(), "embedding": R.to_json(), "decomposition": td.to_json()}
    if kind == "ktree":
        G, td = partial_ktree(int(p["n"]), int(p["k"]), int(p.get("max_degree", 8)), seed)
        return {"graph": G.to_json(), "decomposition": td.to_json()}
    if kind == "girth":
        G = regular_high_girth(int(p["n"]), int(p["g"]), seed, int(p.get("d", 4)))
        return {"graph": G.to_json()}
    if kind == "genus":
        G, L, paths = layered_genus_instance(int(p["g"]), int(p["ell"]), seed)
        return {"graph": G.to_json(), "root": L.root, "paths": {"paths": paths}}
    raise GenerationError(f"unknown instance kind {kind!r}")
