"""Steiner trees inside an induced subgraph.

Small terminal sets are solved exactly by the Dreyfus-Wagner subset dynamic
programme.  Larger ones start from the shortest-path heuristic.  Every tree
is then driven to a local minimum where

* every leaf is a terminal,
* every key path (a maximal path whose inner vertices have degree two and
  are not terminals) is a shortest path in the host, and
* no segment of a key path can be swapped for a strictly shorter path that
  avoids the rest of the tree.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from numba import njit

from .graph import Graph, GraphError, edge_key

EXACT_MAX_TERMINALS = 12
# Work cap (3^k * |V|) for the exact programme; above it the heuristic is used.
# It admits every terminal set of size <= 12 in hosts of up to ~2000 vertices.
EXACT_WORK_LIMIT = 11 * 10 ** 8


class SteinerTree:
    """Tree stored as an adjacency dict on its vertex set."""

    def __init__(self, adj: dict[int, set[int]]):
        self.adj = adj

    @classmethod
    def from_edges(cls, vertices, edges) -> "SteinerTree":
        adj = {v: set() for v in vertices}
        for u, v in edges:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return cls(adj)

    @property
    def vertices(self) -> set[int]:
        return set(self.adj)

    def edges(self) -> list[tuple[int, int]]:
        return sorted({edge_key(u, v) for u in self.adj for v in self.adj[u]})

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj.values()) // 2

    def copy(self) -> "SteinerTree":
        return SteinerTree({v: set(a) for v, a in self.adj.items()})

    def is_tree(self) -> bool:
        if not self.adj:
            return False
        s = min(self.adj)
        seen = {s}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.adj) and self.num_edges == len(self.adj) - 1


class Host:
    """The graph ``G[allowed]`` seen through the adjacency of ``G``."""

    def __init__(self, G: Graph, allowed):
        self.G = G
        self.allowed = allowed if isinstance(allowed, (set, frozenset)) else set(allowed)

    def nbrs(self, v):
        a = self.allowed
        return [w for w in self.G.adj[v] if w in a]

    def bfs(self, sources, avoid=frozenset(), limit=None):
        dist = {}
        par = {}
        queue = deque()
        for s in sorted(sources):
            dist[s] = 0
            par[s] = None
            queue.append(s)
        a = self.allowed
        adj = self.G.adj
        while queue:
            v = queue.popleft()
            if limit is not None and dist[v] >= limit:
                continue
            for w in adj[v]:
                if w in a and w not in dist and w not in avoid:
                    dist[w] = dist[v] + 1
                    par[w] = v
                    queue.append(w)
        return dist, par


# -- exact ----------------------------------------------------------------------------

@njit(cache=True)
def _dreyfus_wagner(indptr, indices, terms):
    n = indptr.shape[0] - 1
    k = terms.shape[0]
    full = (1 << k) - 1
    INFV = 1 << 30
    dp = np.full((full + 1, n), INFV, np.int32)
    split = np.zeros((full + 1, n), np.int32)   # sub-mask used at a merge, 0 if none
    par = np.full((full + 1, n), -1, np.int32)  # predecessor after relaxation
    order = np.empty(n, np.int64)
    okey = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    cnt = np.zeros(2 * n + 2, np.int64)   # merged labels are below 2n
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            for i in range(k):
                if mask == 1 << i:
                    dp[mask, terms[i]] = 0
        else:
            low = mask & (-mask)
            sub = (mask - 1) & mask
            while sub > 0:
                if sub & low:
                    other = mask ^ sub
                    if other:
                        for v in range(n):
                            c = dp[sub, v] + dp[other, v]
                            if c < dp[mask, v]:
                                dp[mask, v] = c
                                split[mask, v] = sub
                sub = (sub - 1) & mask
        # unit-weight relaxation: vertices sorted by label, merged with a FIFO;
        # an entry of the sorted list is stale once its vertex was improved
        top = 0
        m = 0
        for v in range(n):
            if dp[mask, v] < INFV:
                m += 1
                if dp[mask, v] + 1 > top:
                    top = dp[mask, v] + 1
        for t in range(top + 1):
            cnt[t] = 0
        for v in range(n):
            if dp[mask, v] < INFV:
                cnt[dp[mask, v] + 1] += 1
        for t in range(1, top + 1):
            cnt[t] += cnt[t - 1]
        for v in range(n):
            if dp[mask, v] < INFV:
                order[cnt[dp[mask, v]]] = v
                okey[cnt[dp[mask, v]]] = dp[mask, v]
                cnt[dp[mask, v]] += 1
        i = 0
        qh = 0
        qt = 0
        while i < m or qh < qt:
            if i < m and okey[i] != dp[mask, order[i]]:
                i += 1
                continue
            if qh < qt and (i >= m or dp[mask, queue[qh]] < okey[i]):
                v = queue[qh]
                qh += 1
            else:
                v = order[i]
                i += 1
            dv = dp[mask, v]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dv + 1 < dp[mask, w]:
                    dp[mask, w] = dv + 1
                    par[mask, w] = v
                    split[mask, w] = 0
                    queue[qt] = w
                    qt += 1
    return dp, split, par


def steiner_exact(host: Host, terminals) -> SteinerTree:
    terms = sorted(set(terminals))
    if len(terms) == 1:
        return SteinerTree({terms[0]: set()})
    verts = sorted(host.allowed)
    idx = {v: i for i, v in enumerate(verts)}
    indptr = np.zeros(len(verts) + 1, np.int64)
    flat = []
    for i, v in enumerate(verts):
        nb = [idx[w] for w in host.G.adj[v] if w in idx]
        flat.extend(nb)
        indptr[i + 1] = indptr[i] + len(nb)
    indices = np.asarray(flat, dtype=np.int64)
    t_arr = np.asarray([idx[t] for t in terms], dtype=np.int64)
    dp, split, par = _dreyfus_wagner(indptr, indices, t_arr)
    full = (1 << len(terms)) - 1
    if dp[full, t_arr[0]] >= 1 << 30:
        raise GraphError("terminals are not connected in the host")
    edges = set()
    stack = [(full, int(t_arr[0]))]
    while stack:
        mask, v = stack.pop()
        if par[mask, v] >= 0:
            p = int(par[mask, v])
            edges.add(edge_key(verts[v], verts[p]))
            stack.append((mask, p))
        elif split[mask, v]:
            sub = int(split[mask, v])
            stack.append((sub, v))
            stack.append((mask ^ sub, v))
    tree = SteinerTree.from_edges(terms, edges)
    if tree.num_edges != int(dp[full, t_arr[0]]) or not tree.is_tree():
        raise GraphError("internal error: Steiner reconstruction is not an optimal tree")
    return tree


# -- heuristic + local improvement ----------------------------------------------------

def steiner_heuristic(host: Host, terminals) -> SteinerTree:
    """Grow from the lowest terminal, each time joining the nearest remaining terminal."""
    terms = sorted(set(terminals))
    tree = SteinerTree({terms[0]: set()})
    remaining = set(terms[1:])
    while remaining:
        dist, par = host.bfs(tree.vertices)
        reach = [t for t in remaining if t in dist]
        if len(reach) < len(remaining):
            raise GraphError("terminals are not connected in the host")
        t = min(reach, key=lambda x: (dist[x], x))
        v = t
        while par[v] is not None:
            p = par[v]
            tree.adj.setdefault(v, set()).add(p)
            tree.adj.setdefault(p, set()).add(v)
            v = p
        tree.adj.setdefault(t, set())
        remaining -= tree.vertices
    return tree


def prune_leaves(tree: SteinerTree, keep) -> bool:
    changed = False
    stack = [v for v, a in tree.adj.items() if len(a) <= 1 and v not in keep]
    while stack and len(tree.adj) > 1:
        v = stack.pop()
        if v not in tree.adj or v in keep or len(tree.adj[v]) > 1:
            continue
        for w in tree.adj.pop(v):
            tree.adj[w].discard(v)
            if len(tree.adj[w]) <= 1 and w not in keep:
                stack.append(w)
        changed = True
    return changed


def key_paths(tree: SteinerTree, terminals) -> list[list[int]]:
    """Maximal paths whose inner vertices have degree 2 and are not terminals."""
    term = set(terminals)
    adj = tree.adj
    key = {v for v, a in adj.items() if v in term or len(a) != 2}
    out = []
    seen = set()
    for s in sorted(key):
        for w in sorted(adj[s]):
            if edge_key(s, w) in seen:
                continue
            path = [s, w]
            while path[-1] not in key:
                a, b = adj[path[-1]]
                path.append(a if a != path[-2] else b)
            for x, y in zip(path, path[1:]):
                seen.add(edge_key(x, y))
            out.append(path)
    if not out and len(adj) == 1:
        return []
    return out


def _side(tree: SteinerTree, start: int, cut: set) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in tree.adj[v]:
            if w not in seen and w not in cut:
                seen.add(w)
                queue.append(w)
    return seen


def _find_exchange(host: Host, tree: SteinerTree, K: list[int]):
    """A path ``P`` avoiding the tree between two positions of ``K`` that is shorter
    than the key-path segment it would replace, or None."""
    p = len(K) - 1
    if p <= 1:
        return None
    inner = set(K[1:-1])
    L = _side(tree, K[0], inner)
    Rs = _side(tree, K[-1], inner)
    pos = {v: 0 for v in L}
    pos.update({v: p for v in Rs})
    for a in range(1, p):
        pos[K[a]] = a
    # sources lie on the smaller side; measure positions from that side
    flip = len(Rs) < len(L)
    src_side = Rs if flip else L
    label = (lambda v: p - pos[v]) if flip else (lambda v: pos[v])
    sources = list(src_side) + K[1:-1]
    tverts = tree.adj
    allowed = host.allowed
    adj = host.G.adj
    # Dial's algorithm over non-tree vertices; labels are small integers.
    val: dict[int, int] = {}
    via: dict[int, int] = {}
    buckets: list[list[int]] = [[] for _ in range(p + 1)]
    for x in sources:
        buckets[label(x)].append(x)
    best = None
    for b in range(p + 1):
        bucket = buckets[b]
        i = 0
        while i < len(bucket):
            v = bucket[i]
            i += 1
            is_src = v in tverts
            if not is_src and val.get(v, p + 1) < b:
                continue
            for w in adj[v]:
                if w not in allowed:
                    continue
                if w in tverts:
                    # reaching the tree: compare with the position of w
                    if is_src and w in tree.adj[v]:
                        continue
                    if w == v:
                        continue
                    lw = label(w)
                    if b + 1 < lw and (best is None or lw - (b + 1) > best[0]):
                        best = (lw - (b + 1), v, w)
                elif b + 1 <= p and b + 1 < val.get(w, p + 1):
                    val[w] = b + 1
                    via[w] = v
                    if b + 1 <= p:
                        buckets[b + 1].append(w)
        if best is not None:
            break
    if best is None:
        return None
    _, v, w = best
    path = [w, v]
    while path[-1] not in tverts:
        path.append(via[path[-1]])
    # path runs from the target side back to a source; orient by position
    x, y = path[-1], path[0]
    if pos[x] > pos[y]:
        path.reverse()
        x, y = y, x
    return pos[x], pos[y], path


def _apply_exchange(tree: SteinerTree, K, a, b, path):
    """Drop the key-path segment between positions a < b and add ``path``."""
    for t in range(a, b):
        u, v = K[t], K[t + 1]
        tree.adj[u].discard(v)
        tree.adj[v].discard(u)
    for t in range(a + 1, b):
        if not tree.adj[K[t]]:
            del tree.adj[K[t]]
    for u, v in zip(path, path[1:]):
        tree.adj.setdefault(u, set()).add(v)
        tree.adj.setdefault(v, set()).add(u)


def _respan(host: Host, tree: SteinerTree, extra_edges, root):
    """Spanning tree (BFS, lowest-id parents) of the tree plus extra edges."""
    adj = {v: set(a) for v, a in tree.adj.items()}
    for u, v in extra_edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in sorted(adj[v]):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    out = {v: set() for v in dist}
    for v in dist:
        if v != root:
            p = min(w for w in adj[v] if dist.get(w) == dist[v] - 1)
            out[v].add(p)
            out[p].add(v)
    return SteinerTree(out)


def improve(host: Host, tree: SteinerTree, terminals, max_rounds: int = 100000) -> SteinerTree:
    """Local search until leaves, key paths and exchanges are all minimal."""
    term = set(terminals)
    root = min(term)
    tree = tree.copy()
    prune_leaves(tree, term)
    for _ in range(max_rounds):
        changed = False
        for K in key_paths(tree, term):
            p = len(K) - 1
            dist, par = host.bfs([K[0]], limit=p)
            if dist.get(K[-1], p + 1) < p:
                q = [K[-1]]
                while par[q[-1]] is not None:
                    q.append(par[q[-1]])
                for v in K[1:-1]:
                    for w in list(tree.adj[v]):
                        tree.adj[w].discard(v)
                    del tree.adj[v]
                tree = _respan(host, tree, list(zip(q, q[1:])), root)
                prune_leaves(tree, term)
                changed = True
                break
            ex = _find_exchange(host, tree, K)
            if ex is not None:
                a, b, path = ex
                before = tree.num_edges
                _apply_exchange(tree, K, a, b, path)
                prune_leaves(tree, term)
                if tree.num_edges >= before or not tree.is_tree():
                    raise GraphError("internal error: exchange did not shrink the tree")
                changed = True
                break
        if not changed:
            return tree
    raise GraphError("local improvement did not converge")


def check_local_minimum(host: Host, tree: SteinerTree, terminals) -> list[str]:
    """Violations of the three local-minimality conditions (empty when minimal)."""
    term = set(terminals)
    bad = []
    if not term <= tree.vertices:
        bad.append("terminal missing")
    if not tree.is_tree():
        bad.append("not a tree")
    if len(tree.adj) > 1:
        for v, a in tree.adj.items():
            if len(a) <= 1 and v not in term:
                bad.append(f"non-terminal leaf {v}")
    for K in key_paths(tree, term):
        p = len(K) - 1
        dist, _ = host.bfs([K[0]], limit=p)
        if dist.get(K[-1], p + 1) < p:
            bad.append(f"key path {K[0]}..{K[-1]} is not geodesic")
        if _find_exchange(host, tree, K) is not None:
            bad.append(f"key path {K[0]}..{K[-1]} admits a shorter exchange")
    return bad


def steiner_tree(G: Graph, allowed, terminals, exact_max: int = EXACT_MAX_TERMINALS):
    """Locally minimal Steiner tree for ``terminals`` in ``G[allowed]``.

    Returns ``(tree, method)`` with method ``"exact"`` or ``"heuristic"``.
    """
    host = Host(G, allowed)
    terms = set(terminals)
    if not terms:
        raise GraphError("no terminals")
    if not terms <= host.allowed:
        raise GraphError("terminal outside the host")
    k = len(terms)
    if k <= exact_max and (3 ** k) * len(host.allowed) <= EXACT_WORK_LIMIT:
        tree = steiner_exact(host, terms)
        method = "exact"
    else:
        tree = steiner_heuristic(host, terms)
        method = "heuristic"
    tree = improve(host, tree, terms)
    return tree, method
