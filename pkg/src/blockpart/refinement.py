"""Cutting the chordal trees into bounded pieces.

For every tree of a chordal partition a set of cut edges is chosen on its
Steiner core.  Cuts are spread out (pairwise far apart inside the bridge),
kept away from the cuts of the trees the bridge touches (measured by the
mixed distance), and dense enough that every piece of the core stays small.
The final partition consists of the components of all trees minus their cuts.

All sizes are free parameters; :meth:`RefinementParams.proof_scale_defaults` gives
the astronomically large values under which every property is guaranteed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .chordal import ChordalResult, ChordalStep, terminal_bound
from .graph import INF, Graph, GraphError, Partition, bfs_distances, components, edge_key
from .rng import SplitMix64
from .steiner import key_paths

CLAUSES = ("a", "b", "c", "d", "e")


class SelectAbort(RuntimeError):
    """No admissible cut edge in some window.  A legal outcome for small parameters."""

    def __init__(self, diagnostic: dict):
        self.diagnostic = diagnostic
        super().__init__(f"no admissible edge in window: {diagnostic}")


@dataclass(frozen=True)
class RefinementParams:
    c: int
    d_indep: int
    n0: int
    tau: int

    def __post_init__(self):
        for name in ("c", "d_indep", "n0", "tau"):
            if int(getattr(self, name)) < 1:
                raise GraphError(f"{name} must be a positive integer")
        if self.n0 < self.d_indep + 2 * self.c:
            raise GraphError("need n0 >= d_indep + 2c")

    @property
    def independence(self) -> int:
        return self.d_indep + 2 * self.c

    @classmethod
    def proof_scale_defaults(cls, max_degree: int, ell: int = 222) -> "RefinementParams":
        """Exact (big-integer) parameters for which every property is proven."""
        c = 2 * ell + 6
        d = (8 * c + 12) * max_degree ** (c + 2)
        n0 = max_degree ** 40 * (d + 2 * c)
        return cls(c=c, d_indep=d, n0=n0, tau=37)

    def to_json(self) -> dict:
        return {"c": self.c, "d_indep": self.d_indep, "n0": self.n0, "tau": self.tau}


# -- graphs around one bridge ------------------------------------------------------

def _bfs_inner(G: Graph, step: ChordalStep, sources, limit=None) -> dict[int, int]:
    """BFS in the bridge minus its attachments, i.e. in ``G[interior]``."""
    return bfs_distances(G, sources, step.interior, limit)


def _bfs_outside_core(G: Graph, step: ChordalStep, sources, limit=None) -> dict[int, int]:
    """BFS in the bridge minus the core vertices.  Bridge edges have an interior end."""
    C = step.interior
    core = step.core.vertices
    dist: dict[int, int] = {}
    queue = deque()
    for s in sorted(set(sources)):
        if (s in C or s in step.attachments) and s not in core:
            dist[s] = 0
            queue.append(s)
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if limit is not None and dv >= limit:
            continue
        for w in G.adj[v]:
            if w in dist or w in core:
                continue
            if w in C or (v in C and w in step.attachments):
                dist[w] = dv + 1
                queue.append(w)
    return dist


def _ends(S) -> list[int]:
    out = set()
    for x in S:
        if isinstance(x, tuple):
            out.update(x)
        else:
            out.add(x)
    return sorted(out)


def mixed_distance(G: Graph, step: ChordalStep, cuts, S) -> float:
    """Smallest ``d_inner(cuts, v) + d_outside_core(v, S)`` over padded vertices ``v``.

    ``S`` is a collection of vertices or edges (pairs).  One BFS per leg."""
    if not cuts:
        return INF
    leg1 = _bfs_inner(G, step, _ends(cuts))
    leg2 = _bfs_outside_core(G, step, _ends(S))
    core = step.core.vertices
    best = INF
    for v in step.parent:
        if v not in core and v in leg1 and v in leg2:
            best = min(best, leg1[v] + leg2[v])
    return best


class MixedDistanceField:
    """The mixed distance from one tree's cuts to every vertex, up to ``cap``.

    Seeds every padded vertex with its inner distance to the cuts and runs a
    bucketed BFS outside the core, so each query is a dictionary lookup."""

    def __init__(self, G: Graph, step: ChordalStep, cuts, cap: int):
        self.cap = cap
        self.value: dict[int, int] = {}
        if not cuts:
            return
        leg1 = _bfs_inner(G, step, _ends(cuts), cap)
        core = step.core.vertices
        C = step.interior
        buckets = [[] for _ in range(cap + 1)]
        for v in step.parent:
            if v not in core and v in leg1:
                buckets[leg1[v]].append(v)
        val = self.value
        for t in range(cap + 1):
            for v in buckets[t]:
                if v in val:
                    continue
                val[v] = t
                if t == cap:
                    continue
                for w in G.adj[v]:
                    if w in val or w in core:
                        continue
                    if w in C or (v in C and w in step.attachments):
                        buckets[t + 1].append(w)

    def __call__(self, S) -> float:
        return min((self.value.get(v, INF) for v in _ends(S)), default=INF)


# -- paths and windows ---------------------------------------------------------------

def steiner_path_decomposition(G: Graph, step: ChordalStep) -> list[list[int]]:
    """Split the core into maximal paths with inner vertices of degree two outside
    the terminals.  Checks the count bound and that every path is geodesic."""
    tree = step.core
    D = set(step.terminals)
    leaves = [v for v, a in tree.adj.items() if len(a) <= 1]
    if len(tree.adj) > 1 and any(v not in D for v in leaves):
        raise GraphError("core has a leaf outside the terminals")
    paths = key_paths(tree, D)
    if len(paths) > max(2 * len(D), 0):
        raise AssertionError(f"{len(paths)} paths exceed 2|D| = {2 * len(D)} at step {step.index}")
    for p in paths:
        d = _bfs_inner(G, step, [p[0]], len(p) - 1)
        if d.get(p[-1]) != len(p) - 1:
            raise AssertionError(f"core path {p[0]}..{p[-1]} at step {step.index} is not geodesic")
    return paths


def window_starts(length: int, params: RefinementParams) -> list[int]:
    """Leftmost-greedy window positions (vertex offsets) on a path with ``length`` edges."""
    n0, d = params.n0, params.d_indep
    if length < 5 * n0:
        return []
    starts = []
    s = n0
    while s + d <= length - n0:
        starts.append(s)
        s += d + n0
    return starts


def is_independent(G: Graph, allowed, edges, d: int):
    """``(True, None)`` if the edges are pairwise more than ``d`` apart in ``G[allowed]``,
    else ``(False, (e1, e2))``."""
    edges = sorted(edge_key(*e) for e in edges)
    owner = {}
    for e in edges:
        for x in e:
            owner.setdefault(x, []).append(e)
    for e in edges:
        dist = bfs_distances(G, e, allowed, d)
        for x in dist:
            for f in owner.get(x, ()):
                if f != e:
                    return False, (e, f)
    return True, None


def select_MP(G: Graph, path: list[int], params: RefinementParams, step: ChordalStep, fields) -> list:
    """Cut edges for one core path: the first admissible edge in each window."""
    L = len(path) - 1
    starts = window_starts(L, params)
    chosen = []
    for w, s in enumerate(starts):
        pick = None
        for t in range(s, s + params.d_indep):
            e = edge_key(path[t], path[t + 1])
            if all(f(e) > params.c for f in fields):
                pick = t
                break
        if pick is None:
            raise SelectAbort({"step": step.index, "path_ends": [path[0], path[-1]],
                               "path_length": L, "window": w, "window_start": s})
        chosen.append(pick)
    # piece lengths along the path
    lens = []
    prev = 0
    for t in chosen:
        lens.append(t - prev)
        prev = t + 1
    lens.append(L - prev)
    if chosen:
        lo = min(params.n0, L)
        if any(x < lo or x >= 5 * params.n0 for x in lens):
            raise AssertionError(f"piece lengths {lens} outside [{lo}, {5 * params.n0})")
    M = [edge_key(path[t], path[t + 1]) for t in chosen]
    ok, wit = is_independent(G, step.interior, M, params.independence)
    if not ok:
        raise AssertionError(f"cuts {wit} on one path are not independent")
    return M


# -- the family ---------------------------------------------------------------------

@dataclass
class ClauseOutcome:
    holds: bool = True
    checked: int = 0
    violations: int = 0
    witness: object = None
    mode: str = "exhaustive"

    def fail(self, witness):
        if self.holds:
            self.witness = witness
        self.holds = False
        self.violations += 1

    def to_json(self) -> dict:
        return {"holds": self.holds, "checked": self.checked, "violations": self.violations,
                "witness": _jsonable(self.witness), "mode": self.mode}


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, float) and x == INF:
        return "inf"
    return x


@dataclass
class EdgeCutFamily:
    cuts: list                      # per tree (0-based), sorted edge list
    params: RefinementParams
    bound: int                      # terminal bound B for this graph and tau
    clauses: dict = field(default_factory=dict)
    paths_per_tree: list = field(default_factory=list)
    approx_geodesic: ClauseOutcome = field(default_factory=ClauseOutcome)

    @property
    def total_cuts(self) -> int:
        return sum(len(m) for m in self.cuts)

    def failed_clauses(self) -> list[str]:
        return [k for k in CLAUSES if not self.clauses[k].holds]

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "terminal_bound": self.bound,
            "cuts": [[list(e) for e in m] for m in self.cuts],
            "total_cuts": self.total_cuts,
            "clauses": {k: self.clauses[k].to_json() for k in CLAUSES},
            "approx_geodesic": self.approx_geodesic.to_json(),
        }


def component_bound(bound: int, params: RefinementParams) -> int:
    """Largest allowed piece of a core: ``10 B^2 (d + 2c)``."""
    return 10 * bound * bound * params.independence


def refined_width_bound(max_degree: int, bound: int, params: RefinementParams) -> int:
    return (max_degree + 1) * component_bound(bound, params)


def build_M_family(chordal: ChordalResult, params: RefinementParams,
                   exhaustive_limit: int = 300, samples: int = 1000, seed: int = 0) -> EdgeCutFamily:
    """Cut sets for all trees in construction order, with every clause evaluated.

    Clause (e) is enumerated exactly around each cut edge (only pairs whose tree
    path crosses a cut are constrained); ``exhaustive_limit`` and ``samples``
    control the extra random pairs used for the approximate-geodesicity check."""
    if params.tau != chordal.tau:
        raise GraphError("params.tau differs from the chordal partition's tau")
    G = chordal.graph
    B = terminal_bound(G.max_degree(), chordal.tau)
    steps = chordal.steps
    fam = EdgeCutFamily([], params, B, {k: ClauseOutcome() for k in CLAUSES})
    fields_cache: dict[int, MixedDistanceField] = {}
    for j, step in enumerate(steps):
        paths = steiner_path_decomposition(G, step)
        fam.paths_per_tree.append(len(paths))
        fields = []
        for i in step.touched:
            if i not in fields_cache:
                fields_cache[i] = MixedDistanceField(G, steps[i], fam.cuts[i], params.c + 1)
            fields.append(fields_cache[i])
        M = []
        for p in paths:
            M.extend(select_MP(G, p, params, step, fields))
        fam.cuts.append(sorted(M))
        _check_clauses(G, chordal, j, fam, B)
    _check_approx_geodesic(G, chordal, fam, B, exhaustive_limit, samples, seed)
    return fam


def _tree_dist(tree_adj, sources, limit=None) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        if limit is not None and dist[v] >= limit:
            continue
        for w in tree_adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _check_clauses(G, chordal, j, fam: EdgeCutFamily, B):
    step = chordal.steps[j]
    params = fam.params
    M = fam.cuts[j]
    cl = fam.clauses
    core = step.core
    # (a) independence inside the bridge
    ok, wit = is_independent(G, step.interior, M, params.independence)
    cl["a"].checked += 1
    if not ok:
        cl["a"].fail({"tree": j + 1, "edges": wit})
    # (b) distance in the core from the terminals to the cuts
    cl["b"].checked += 1
    if M:
        dist = _tree_dist(core.adj, step.terminals)
        got = min(min(dist[u], dist[v]) for u, v in M)
        if got < 2 * B:
            cl["b"].fail({"tree": j + 1, "distance": got, "required": 2 * B})
    # (c) mixed distance from every touched tree's cuts
    for i in step.touched:
        cl["c"].checked += 1
        if M:
            md = mixed_distance(G, chordal.steps[i], fam.cuts[i], M)
            if not md > params.c:
                cl["c"].fail({"tree": j + 1, "touched": i + 1, "mdist": md, "c": params.c})
    # (d) piece sizes of the core
    cl["d"].checked += 1
    cut = set(M)
    seen = set()
    limit = component_bound(B, params)
    for s in sorted(core.adj):
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        k = 0
        while k < len(comp):
            v = comp[k]
            k += 1
            for w in core.adj[v]:
                if w not in seen and edge_key(v, w) not in cut:
                    seen.add(w)
                    comp.append(w)
        if len(comp) > limit:
            cl["d"].fail({"tree": j + 1, "size": len(comp), "bound": limit})
    # (e) pairs close in the bridge whose core path crosses a cut are core-geodesic
    D = params.independence
    for a, b in M:
        side_a = _side_without(core.adj, a, (a, b))
        ball_a = _bfs_inner(G, step, [a], D)
        ball_b = _bfs_inner(G, step, [b], D)
        xs = [x for x in ball_a if x in side_a]
        ys = [y for y in ball_b if y in core.adj and y not in side_a]
        for x in sorted(xs):
            dx = _bfs_inner(G, step, [x], D)
            tx = None
            for y in sorted(ys):
                if y not in dx:
                    continue
                if tx is None:
                    tx = _tree_dist(core.adj, [x])
                cl["e"].checked += 1
                if tx[y] != dx[y]:
                    cl["e"].fail({"tree": j + 1, "pair": [x, y], "core": tx[y], "bridge": dx[y]})


def _side_without(tree_adj, start, edge) -> set[int]:
    seen = {start}
    stack = [start]
    e = edge_key(*edge)
    while stack:
        v = stack.pop()
        for w in tree_adj[v]:
            if w not in seen and edge_key(v, w) != e:
                seen.add(w)
                stack.append(w)
    return seen


def _check_approx_geodesic(G, chordal, fam, B, exhaustive_limit, samples, seed):
    """Core distance is less than ``B`` times bridge distance, over core vertex pairs."""
    out = fam.approx_geodesic
    rng = SplitMix64(seed)
    exhaustive = G.n <= exhaustive_limit
    out.mode = "exhaustive" if exhaustive else "sampled"
    per_tree = max(1, samples // max(1, len(chordal.steps)))
    for j, step in enumerate(chordal.steps):
        verts = sorted(step.core.adj)
        if len(verts) < 2:
            continue
        if exhaustive:
            sources = verts
        else:
            sources = [verts[rng.below(len(verts))] for _ in range(min(per_tree, len(verts)))]
        for x in sources:
            db = _bfs_inner(G, step, [x])
            dt = _tree_dist(step.core.adj, [x])
            targets = verts if exhaustive else [verts[rng.below(len(verts))]]
            for y in targets:
                if y == x:
                    continue
                out.checked += 1
                if not dt[y] < B * db[y]:
                    out.fail({"tree": j + 1, "pair": [x, y], "core": dt[y], "bridge": db[y]})


def assemble_R(chordal: ChordalResult, family: EdgeCutFamily) -> Partition:
    """Components of all trees minus their cut edges, numbered by lowest vertex."""
    G = chordal.graph
    cut = set()
    for m in family.cuts:
        cut.update(m)
    forest = Graph(G.n, [e for s in chordal.steps for e in s.edges() if e not in cut])
    parts = components(forest)
    parts.sort(key=min)
    return Partition.from_parts(G.n, parts)


@dataclass
class RefinementResult:
    family: EdgeCutFamily | None
    partition: Partition | None
    aborted: dict | None = None

    def to_json(self) -> dict:
        out = {"aborted": self.aborted}
        if self.family is not None:
            out["family"] = self.family.to_json()
        if self.partition is not None:
            out["width"] = self.partition.width
            out["num_parts"] = len(self.partition)
            out["partition"] = self.partition.to_json()
        return out


def refine(chordal: ChordalResult, params: RefinementParams, **kw) -> RefinementResult:
    """build_M_family + assemble_R, turning a window abort into a reported outcome."""
    try:
        fam = build_M_family(chordal, params, **kw)
    except SelectAbort as e:
        return RefinementResult(None, None, e.diagnostic)
    return RefinementResult(fam, assemble_R(chordal, fam))
