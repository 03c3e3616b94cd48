"""Clean paths and blocking numbers.

A path is clean for a partition when it meets every part at most once.  The
blocking number is the length of a longest clean path.  The search below
enumerates clean paths anchored at their lowest-id vertex and grows them at
both ends, never entering a part that the path already meets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .rng import SplitMix64
from .graph import Graph, GraphError, Partition, is_connected_partition

DEFAULT_BUDGET = 10 ** 8


@dataclass
class CleanPathReport:
    max_length_found: int
    witness: list = field(default_factory=list)
    exhausted: bool = True  # True when the whole search space was explored
    nodes_expanded: int = 0

    def to_json(self) -> dict:
        return {
            "max_length_found": self.max_length_found,
            "witness": list(self.witness),
            "exhausted": self.exhausted,
            "nodes_expanded": self.nodes_expanded,
        }


@dataclass
class BlockingVerdict:
    holds: bool | None  # None when the budget ran out first
    counterexample: list | None
    report: CleanPathReport


def csr(G: Graph):
    indptr = np.zeros(G.n + 1, dtype=np.int64)
    for v in range(G.n):
        indptr[v + 1] = indptr[v] + len(G.adj[v])
    indices = np.fromiter((w for a in G.adj for w in a), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def is_clean(G: Graph, P: Partition, path) -> bool:
    """Does the path meet every part at most once?  Raises if ``path`` is not a path of ``G``."""
    path = list(path)
    if not path or len(set(path)) != len(path):
        raise GraphError("not a path: empty or repeats a vertex")
    for a, b in zip(path, path[1:]):
        if not G.has_edge(a, b):
            raise GraphError(f"not a path: ({a}, {b}) is not an edge")
    parts = [P.part_of[v] for v in path]
    return len(set(parts)) == len(parts)


@njit(cache=True, nogil=True)
def _clean_search(indptr, indices, part, nparts, limit, budget, s_lo, s_hi):
    """Longest clean path of length <= limit (stop early on reaching ``limit``)
    among paths whose lowest vertex lies in ``[s_lo, s_hi)``.

    Returns (best_length, witness_array, nodes, completed).
    """
    n = indptr.shape[0] - 1
    used = np.zeros(nparts, np.bool_)
    rpath = np.empty(n + 1, np.int64)
    rptr = np.empty(n + 1, np.int64)
    lpath = np.empty(n + 1, np.int64)
    lptr = np.empty(n + 1, np.int64)
    best = -1
    wit = np.empty(n + 1, np.int64)
    wlen = 0
    nodes = 0
    for s in range(s_lo, s_hi):
        used[part[s]] = True
        rpath[0] = s
        rptr[0] = indptr[s]
        rd = 0
        while rd >= 0:
            # left phase for the current right extension
            lpath[0] = s
            lptr[0] = indptr[s]
            ld = 0
            while ld >= 0:
                nodes += 1
                total = rd + ld
                if total > best:
                    best = total
                    wlen = 0
                    for t in range(ld, 0, -1):
                        wit[wlen] = lpath[t]
                        wlen += 1
                    for t in range(rd + 1):
                        wit[wlen] = rpath[t]
                        wlen += 1
                    if best >= limit:
                        return best, wit[:wlen].copy(), nodes, False
                if nodes > budget:
                    return best, wit[:wlen].copy(), nodes, False
                # advance the left end
                v = lpath[ld]
                moved = False
                if total < limit:
                    while lptr[ld] < indptr[v + 1]:
                        w = indices[lptr[ld]]
                        lptr[ld] += 1
                        if w > s and not used[part[w]]:
                            used[part[w]] = True
                            ld += 1
                            lpath[ld] = w
                            lptr[ld] = indptr[w]
                            moved = True
                            break
                if not moved:
                    # pop until some frame can advance
                    while True:
                        if ld == 0:
                            ld = -1
                            break
                        used[part[lpath[ld]]] = False
                        ld -= 1
                        v = lpath[ld]
                        found = False
                        while lptr[ld] < indptr[v + 1]:
                            w = indices[lptr[ld]]
                            lptr[ld] += 1
                            if w > s and not used[part[w]]:
                                used[part[w]] = True
                                ld += 1
                                lpath[ld] = w
                                lptr[ld] = indptr[w]
                                found = True
                                break
                        if found:
                            break
                # ``while ld >= 0`` re-visits the new left state
            # advance the right end
            moved = False
            while True:
                v = rpath[rd]
                if rd < limit:
                    while rptr[rd] < indptr[v + 1]:
                        w = indices[rptr[rd]]
                        rptr[rd] += 1
                        if w > s and not used[part[w]]:
                            used[part[w]] = True
                            rd += 1
                            rpath[rd] = w
                            rptr[rd] = indptr[w]
                            moved = True
                            break
                if moved:
                    break
                if rd == 0:
                    rd = -1
                    break
                used[part[rpath[rd]]] = False
                rd -= 1
        used[part[s]] = False
    return best, wit[:wlen].copy(), nodes, True


def _run(G: Graph, P: Partition, limit: int, budget: int, workers: int = 1) -> CleanPathReport:
    if P.n != G.n:
        raise GraphError("partition does not match graph")
    if G.n == 0:
        return CleanPathReport(-1, [], True, 0)
    if not is_connected_partition(G, P):
        raise GraphError("partition has a disconnected part")
    indptr, indices = csr(G)
    part = np.asarray(P.part_of, dtype=np.int64)
    nparts = len(P.parts)
    if workers <= 1:
        best, wit, nodes, completed = _clean_search(indptr, indices, part, nparts, limit, budget, 0, G.n)
        return CleanPathReport(int(best), [int(v) for v in wit], bool(completed), int(nodes))
    # anchors split into fixed chunks, each with its own budget; merged in chunk order
    nchunks = 4 * workers
    bounds = [G.n * i // nchunks for i in range(nchunks + 1)]
    jobs = [(bounds[i], bounds[i + 1]) for i in range(nchunks) if bounds[i] < bounds[i + 1]]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outs = list(pool.map(
            lambda se: _clean_search(indptr, indices, part, nparts, limit, budget, se[0], se[1]), jobs))
    best, wit = -1, []
    for b, w, _, _ in outs:
        if b > best:
            best, wit = int(b), [int(v) for v in w]
    completed = all(c for _, _, _, c in outs)
    return CleanPathReport(best, wit, bool(completed), int(sum(o[2] for o in outs)))


def blocking_number(G: Graph, P: Partition, budget: int = DEFAULT_BUDGET, workers: int = 1) -> CleanPathReport:
    """Length of a longest clean path; ``exhausted`` is False if the budget ran out."""
    return _run(G, P, G.n, budget, workers)


def verify_ell_blocking(G: Graph, P: Partition, ell: int, budget: int = DEFAULT_BUDGET,
                        workers: int = 1) -> BlockingVerdict:
    """Is every clean path of length at most ``ell``?  Searches to depth ``ell + 1``."""
    if ell < 0:
        raise GraphError("ell must be non-negative")
    rep = _run(G, P, ell + 1, budget, workers)
    if rep.max_length_found > ell:
        return BlockingVerdict(False, rep.witness, rep)
    if not rep.exhausted:
        return BlockingVerdict(None, None, rep)
    return BlockingVerdict(True, None, rep)


# -- subgraph variant -----------------------------------------------------------

@njit(cache=True)
def _z_search(indptr, indices, part, nparts, starts, ell, k, budget):
    """Look for a path of length <= ell meeting each Z-part at most once and > k parts.

    Paths start at one of ``starts`` (Z vertices) and grow in one direction; any
    bad path has such a subpath, from its first Z vertex to its last.  ``budget``
    caps the nodes expanded per start.  Returns (witness, nodes, all starts completed).
    """
    n = indptr.shape[0] - 1
    used = np.zeros(nparts, np.bool_)
    onpath = np.zeros(n, np.bool_)
    path = np.empty(ell + 2, np.int64)
    ptr = np.empty(ell + 2, np.int64)
    nodes = 0
    complete = True
    for si in range(starts.shape[0]):
        s = starts[si]
        used[part[s]] = True
        onpath[s] = True
        path[0] = s
        ptr[0] = indptr[s]
        depth = 0
        count = 1
        local = 0
        while depth >= 0:
            nodes += 1
            local += 1
            if local > budget:
                complete = False
                for t in range(depth + 1):
                    onpath[path[t]] = False
                    if part[path[t]] >= 0:
                        used[part[path[t]]] = False
                break
            v = path[depth]
            moved = False
            if depth < ell:
                while ptr[depth] < indptr[v + 1]:
                    w = indices[ptr[depth]]
                    ptr[depth] += 1
                    if onpath[w]:
                        continue
                    p = part[w]
                    if p >= 0 and used[p]:
                        continue
                    onpath[w] = True
                    if p >= 0:
                        used[p] = True
                        count += 1
                    depth += 1
                    path[depth] = w
                    ptr[depth] = indptr[w]
                    moved = True
                    if count > k:
                        return path[:depth + 1].copy(), nodes, complete
                    break
            if not moved:
                w = path[depth]
                onpath[w] = False
                if part[w] >= 0:
                    used[part[w]] = False
                    count -= 1
                depth -= 1
    return path[:0].copy(), nodes, complete


def verify_z_property(G: Graph, z_parts, ell: int, k: int, budget: int = DEFAULT_BUDGET,
                      sample: int | None = None, seed: int = 0):
    """Does every clean path of length <= ell meet at most ``k`` of the given parts?

    ``z_parts`` is a list of disjoint vertex sets (a partition of a subgraph).
    With ``sample`` set, only that many seeded random Z vertices are used as path
    starts (a partial check).  ``budget`` caps the search per start.
    Returns ``(holds, witness, exhausted)``; ``holds`` is None when the search was
    cut short (budget or sampling) without finding a counterexample.
    """
    part = np.full(G.n, -1, dtype=np.int64)
    for i, p in enumerate(z_parts):
        for v in p:
            if part[v] != -1:
                raise GraphError(f"vertex {v} in two Z-parts")
            part[v] = i
    if G.n == 0 or not z_parts:
        return True, None, True
    zs = sorted(v for p in z_parts for v in p)
    partial = False
    if sample is not None and sample < len(zs):
        rng = SplitMix64(seed)
        rng.shuffle(zs)
        zs = sorted(zs[:sample])
        partial = True
    indptr, indices = csr(G)
    starts = np.asarray(zs, dtype=np.int64)
    wit, nodes, completed = _z_search(indptr, indices, part, len(z_parts), starts, ell, k, budget)
    if len(wit):
        if not _z_witness_ok(G, part, [int(v) for v in wit], ell, k):
            raise AssertionError("search returned an invalid witness")
        return False, [int(v) for v in wit], True
    if partial or not completed:
        return None, None, False
    return True, None, True


def _z_witness_ok(G, part, path, ell, k) -> bool:
    if len(path) - 1 > ell or len(set(path)) != len(path):
        return False
    if any(not G.has_edge(a, b) for a, b in zip(path, path[1:])):
        return False
    hit = [int(part[v]) for v in path if part[v] >= 0]
    return len(hit) == len(set(hit)) and len(hit) > k


# -- high-girth demonstration ------------------------------------------------------

def find_long_clean_path_high_girth(G: Graph, P: Partition, c: int, ell: int) -> list[int]:
    """Clean path of length exactly ``ell + 1`` in a 4-regular graph of large girth.

    Edges inside parts are fewer than ``n``, so the edges between parts contain a
    cycle; that cycle is longer than ``ell + 1`` and any ``ell + 1`` consecutive
    edges of it form a clean path.
    """
    from .generators import girth

    if any(G.degree(v) != 4 for v in range(G.n)):
        raise GraphError("graph is not 4-regular")
    if P.width > c:
        raise GraphError(f"partition width {P.width} exceeds {c}")
    if girth(G) < c + ell + 2:
        raise GraphError("girth too small")
    pof = P.part_of
    blue = [[w for w in G.adj[v] if pof[w] != pof[v]] for v in range(G.n)]
    cycle = _find_cycle(blue)
    if cycle is None:
        raise GraphError("no cycle among edges between parts")
    path = cycle[: ell + 2]
    if len(path) < ell + 2 or not is_clean(G, P, path):
        raise GraphError("cycle segment is not a clean path")
    return path


def _find_cycle(adj):
    n = len(adj)
    state = [0] * n
    parent = [-1] * n
    for s in range(n):
        if state[s]:
            continue
        stack = [(s, iter(adj[s]))]
        state[s] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if w == parent[v]:
                    continue
                if state[w] == 1:
                    cyc = [v]
                    while cyc[-1] != w:
                        cyc.append(parent[cyc[-1]])
                    return cyc
                if state[w] == 0:
                    state[w] = 1
                    parent[w] = v
                    stack.append((w, iter(adj[w])))
                    break
            else:
                state[v] = 2
                stack.pop()
    return None
