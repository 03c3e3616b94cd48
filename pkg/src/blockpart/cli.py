"""Command line entry point.  Every subcommand prints one JSON report on stdout.

Exit codes: 0 ok, 1 usage or bad input, 2 counterexample found, 3 search budget
exhausted, 4 an asserted property failed (the report names it).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from .graph import Graph, GraphError, Partition, bfs_layering, dumps

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_COUNTEREXAMPLE, EXIT_BUDGET, EXIT_ASSERTION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# (flag, type, default, help); defaults live here so a config file can sit between them and the flags
INSTANCE_OPTS = [
    ("kind", str, None, "instance kind for a generated input"),
    ("m", int, None, "grid rows"),
    ("n", int, None, "vertex count, or grid columns"),
    ("b", int, None, "tree branching"),
    ("h", int, None, "tree height"),
    ("k", int, None, "partial k-tree width, or power exponent"),
    ("max-degree", int, None, "degree cap for partial k-trees"),
    ("keep", float, None, "edge keep probability for sparse plane graphs"),
    ("g", int, None, "genus parameter, or girth for --kind girth"),
]

COMMANDS = {
    "gen": ("generate an instance", [], {"kind": "triangulation", "n": 200}),
    "chordal": ("chordal partition of a plane graph",
                [("tau", int, 1, "terminal radius")], {"kind": "triangulation", "n": 200}),
    "refine": ("refined partition (cut edge family)",
               [("tau", int, 2, "terminal radius"), ("c", int, 2, "window slack"),
                ("d-indep", int, 8, "independence distance"), ("n0", int, 16, "window length"),
                ("samples", int, 1000, "sampled pairs for large graphs")],
               {"kind": "grid", "m": 20, "n": 20}),
    "treepart": ("detached tree-partition", [], {"kind": "grid", "m": 4, "n": 50}),
    "block2": ("2-blocking partition", [("budget", int, 10 ** 8, "verifier node budget")],
               {"kind": "grid", "m": 4, "n": 50}),
    "verify": ("check a partition for the ell-blocking property",
               [("ell", int, None, "path length bound (omit for the blocking number)"),
                ("budget", int, 10 ** 8, "search node budget (per worker)"),
                ("workers", int, 1, "verifier threads")], {}),
    "power": ("degree-bounded power and its shallow model",
              [("d", int, 2, "degree bound")], {"kind": "grid", "m": 6, "n": 6, "k": 2}),
    "step": ("iterate the radius-reduction step on a random model",
             [("copies", int, 1, "copies of each host vertex"), ("r", int, 5, "model radius"),
              ("s", int, 2, "model degree"), ("count", int, 6, "branch sets")],
             {"kind": "grid", "m": 8, "n": 8}),
    "genusz": ("non-planar part partition on a layered genus instance",
               [("ell", int, 3, "path length"), ("combine", bool, False, "also combine with a 2-blocking remainder"),
                ("samples", int, 200, "start vertices when the Z check is sampled")],
               {"g": 1}),
    "bounds": ("closed-form bound tables",
               [("ell", int, None, "blocking length"), ("t", int, None, "treewidth of H"),
                ("p", int, None, "colouring parameter")], {}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockpart", description="Blocking partitions toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (helptext, opts, _) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON file of option values (flags win)")
        p.add_argument("--input", help="JSON instance or report; '-' reads stdin")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--timing", action="store_true", help="add wall time (breaks byte-identity)")
        if name not in ("verify", "bounds"):
            for flag, typ, _, h in INSTANCE_OPTS:
                p.add_argument(f"--{flag}", type=typ, default=None, help=h)
        for flag, typ, _, h in opts:
            if typ is bool:
                p.add_argument(f"--{flag}", action="store_true", default=None, help=h)
            else:
                p.add_argument(f"--{flag}", type=typ, default=None, help=h)
    return parser


def resolve_params(args) -> dict:
    """Hard defaults, then the config file, then explicit flags."""
    _, opts, inst_defaults = COMMANDS[args.command]
    params = {"seed": 0}
    if args.command not in ("verify", "bounds"):
        params.update({f.replace("-", "_"): None for f, *_ in INSTANCE_OPTS})
        params.update(inst_defaults)
    params.update({f.replace("-", "_"): d for f, _, d, _ in opts})
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(params)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        params.update(cfg)
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    return params


def _read_input(path):
    if path is None:
        return None
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def instance_from(params, data) -> dict:
    from .generators import generate

    if data is not None:
        return data.get("instance", data)
    keys = {"grid": ("m", "n"), "triangulation": ("n",), "plane": ("n", "keep"), "tree": ("b", "h"),
            "ktree": ("n", "k", "max_degree"), "girth": ("n", "g"), "genus": ("g", "ell")}
    kind = params.get("kind")
    if kind not in keys:
        raise UsageError(f"--kind must be one of {sorted(keys)}")
    p = {k: params[k] for k in keys[kind] if params.get(k) is not None}
    missing = [k for k in keys[kind] if k not in p and k not in ("keep", "max_degree")]
    if missing:
        raise UsageError(f"--kind {kind} needs --{', --'.join(m.replace('_', '-') for m in missing)}")
    inst = generate(kind, seed=params["seed"], **p)
    inst["kind"] = kind
    return inst


def _decomposition(inst, G):
    from .decomposition import TreeDecomposition, min_fill_decomposition

    if "decomposition" in inst:
        td = TreeDecomposition.from_json(inst["decomposition"])
        td.validate(G)
        return td, "supplied"
    return min_fill_decomposition(G), "min-fill"


# -- subcommands: each returns (result dict, claims dict, exit code)

def cmd_gen(params, inst):
    G = Graph.from_json(inst["graph"])
    return {"n": G.n, "m": G.m, "max_degree": G.max_degree()}, {}, EXIT_OK


def cmd_chordal(params, inst):
    from .chordal import build_chordal_partition, elimination_width
    from .embedding import RotationSystem
    from .graph import quotient

    if "embedding" not in inst:
        raise UsageError("chordal needs an instance with an embedding")
    R = RotationSystem.from_json(inst["embedding"])
    res = build_chordal_partition(R, params["tau"])
    Q = quotient(res.graph, res.partition)
    out = res.to_json()
    out["quotient_width"] = elimination_width(Q, range(Q.n - 1, -1, -1)) if Q.n else 0
    out["width"] = res.partition.width
    claims = {k: "pass" for k in res.claims_checked}
    return out, claims, EXIT_OK


def cmd_refine(params, inst):
    from .chordal import build_chordal_partition
    from .embedding import RotationSystem
    from .refinement import RefinementParams, refine, refined_width_bound

    if "embedding" not in inst:
        raise UsageError("refine needs an instance with an embedding")
    R = RotationSystem.from_json(inst["embedding"])
    rp = RefinementParams(c=params["c"], d_indep=params["d_indep"], n0=params["n0"], tau=params["tau"])
    ch = build_chordal_partition(R, rp.tau)
    res = refine(ch, rp, samples=params["samples"], seed=params["seed"])
    out = res.to_json()
    claims = {f"chordal:{k}": "pass" for k in ch.claims_checked}
    code = EXIT_OK
    if res.family is not None:
        for k, c in res.family.clauses.items():
            claims[f"clause:{k}"] = "pass" if c.holds else "fail"
        claims["approx_geodesic"] = "pass" if res.family.approx_geodesic.holds else "fail"
        bound = refined_width_bound(ch.graph.max_degree(), res.family.bound, rp)
        out["width_bound"] = bound
        claims["width"] = "pass" if res.partition.width <= bound else "fail"
        if "fail" in claims.values():
            code = EXIT_ASSERTION
    return out, claims, code


def cmd_treepart(params, inst):
    from .treepart import DEGREE_FACTOR, WIDTH_FACTOR, HeartStats, improved_tree_partition

    G = Graph.from_json(inst["graph"])
    td, source = _decomposition(inst, G)
    stats = HeartStats()
    tp = improved_tree_partition(G, td, True, stats)
    k, d = td.width + 1, max(G.max_degree(), 1)
    out = {"tree_partition": tp.to_json(), "width": tp.width, "tree_max_degree": tp.tree_max_degree(),
           "width_bound": WIDTH_FACTOR * k * d, "degree_bound": DEGREE_FACTOR * d,
           "decomposition": source, "decomposition_width": td.width, "heart": stats.to_json()}
    claims = {"width": "pass", "tree degree": "pass", "detached": "pass", "bullets": "pass"}
    return out, claims, EXIT_OK


def cmd_block2(params, inst):
    from .treepart import two_blocking_bound, two_blocking_partition
    from .verify import verify_ell_blocking

    G = Graph.from_json(inst["graph"])
    td, source = _decomposition(inst, G)
    R = two_blocking_partition(G, td, True, params["budget"])
    v = verify_ell_blocking(G, R, 2, params["budget"])
    out = {"partition": R.to_json(), "width": R.width, "num_parts": len(R),
           "width_bound": two_blocking_bound(td.width, G.max_degree()),
           "decomposition": source, "decomposition_width": td.width,
           "blocking": {"ell": 2, "holds": v.holds, "exact": v.report.exhausted}}
    return out, {"width": "pass", "2-blocking": "pass"}, EXIT_OK


def _find_partition(data):
    for holder in (data, data.get("result", {})):
        if "partition" in holder:
            return Partition.from_json(holder["partition"])
    raise UsageError("input has no partition")


def cmd_verify(params, data):
    from .verify import blocking_number, verify_ell_blocking

    if data is None:
        raise UsageError("verify needs --input (a report or {graph, partition})")
    inst = data.get("instance", data)
    G = Graph.from_json(inst["graph"])
    P = _find_partition(data)
    if P.n != G.n:
        raise UsageError("partition does not cover the graph")
    if params["ell"] is None:
        rep = blocking_number(G, P, params["budget"], params["workers"])
        out = {"blocking_number": rep.max_length_found, "exact": rep.exhausted, "search": rep.to_json()}
        return out, {}, EXIT_OK if rep.exhausted else EXIT_BUDGET
    v = verify_ell_blocking(G, P, params["ell"], params["budget"], params["workers"])
    out = {"ell": params["ell"], "holds": v.holds, "counterexample": v.counterexample, "search": v.report.to_json()}
    if v.holds is False:
        return out, {"blocking": "fail"}, EXIT_COUNTEREXAMPLE
    if v.holds is None:
        return out, {}, EXIT_BUDGET
    return out, {"blocking": "pass"}, EXIT_OK


def cmd_power(params, inst):
    from .shallow import ShallowParams, model_power_in_product, validate_shallow_model

    G = Graph.from_json(inst["graph"])
    k = params["k"] if params["k"] is not None else 2
    M = model_power_in_product(G, k, params["d"])
    rep = validate_shallow_model(M, ShallowParams(k // 2, params["d"]))
    out = {"k": k, "d": params["d"], "power": M.pattern.to_json(), "power_edges": M.pattern.m,
           "copies": M.host.copies, "model": rep.to_json()}
    return out, {"shallow": "pass" if rep.valid else "fail"}, EXIT_OK if rep.valid else EXIT_ASSERTION


def cmd_step(params, inst):
    from .shallow import (ShallowParams, TwoBlockingProvider, iterate_shallow_minors,
                          random_shallow_model, validate_shallow_model)

    G = Graph.from_json(inst["graph"])
    p = ShallowParams(params["r"], params["s"])
    M = random_shallow_model(G, params["copies"], p.r, p.s, params["count"], params["seed"])
    start = validate_shallow_model(M, p)
    steps = iterate_shallow_minors(M, p, TwoBlockingProvider())
    out = {"pattern": M.pattern.to_json(), "start": start.to_json(), "steps": [s.to_json() for s in steps]}
    claims = {f"step{i + 1}:valid": "pass" for i in range(len(steps))}
    return out, claims, EXIT_OK


def cmd_genusz(params, inst):
    from .decomposition import min_fill_decomposition
    from .surface import VerticalPathTree, blocking_genus_combine, genus_z_partition, z_width_bound
    from .treepart import two_blocking_partition

    G = Graph.from_json(inst["graph"])
    L = bfs_layering(G, int(inst.get("root", 0)))
    T = VerticalPathTree(inst["paths"]["paths"])
    g, ell = params["g"], params["ell"]
    res = genus_z_partition(G, L, T, g, ell, samples=params["samples"], seed=params["seed"])
    out = res.to_json()
    out["width_bound"] = z_width_bound(g, ell)
    claims = {f"property:{k}": "pass" for k in res.property_checks}
    if res.property8.get("holds") is None:
        claims["property:8"] = "partial"
    if params["combine"]:
        ell_p = 2
        if ell < 4 * ell_p + 7:
            raise UsageError(f"--combine needs --ell >= {4 * ell_p + 7}")
        rest = [v for v in range(G.n) if v not in res.vertices]
        H, ids = G.induced_subgraph(rest)
        Rp = two_blocking_partition(H, min_fill_decomposition(H))
        R = blocking_genus_combine(G, res, Rp, ids, ell_p, ell)
        out["combined"] = {"partition": R.to_json(), "width": R.width, "ell": 4 * ell_p + 6}
        claims["combined-blocking"] = "pass"
    return out, claims, EXIT_OK


def cmd_bounds(params, inst):
    from .shallow import centred_colouring_bound, tw_bound

    ell, t, p = params["ell"], params["t"], params["p"]
    if ell is not None and t is not None:
        if p is not None:
            return centred_colouring_bound(ell, p, t), {}, EXIT_OK
        return tw_bound(ell, t), {}, EXIT_OK
    ells = [ell] if ell is not None else [1, 2, 4, 222, 894]
    ts = [t] if t is not None else [1, 2, 3]
    table = {"tw_bound": [{"ell": a, "t": b, "value": tw_bound(a, b)} for a in ells for b in ts],
             "centred_colouring_bound": [{"ell": a, "p": q, "t": b, "value": centred_colouring_bound(a, q, b)}
                                         for a in ells for q in ([p] if p else [1, 2, 3]) for b in ts]}
    return table, {}, EXIT_OK


HANDLERS = {"gen": cmd_gen, "chordal": cmd_chordal, "refine": cmd_refine, "treepart": cmd_treepart,
            "block2": cmd_block2, "verify": cmd_verify, "power": cmd_power, "step": cmd_step,
            "genusz": cmd_genusz, "bounds": cmd_bounds}


def _claim_of(exc) -> str:
    for attr in ("claim", "bullet", "prop"):
        if hasattr(exc, attr):
            return str(getattr(exc, attr))
    return type(exc).__name__


def run(argv=None) -> tuple[int, object]:
    """Parse, execute and return ``(exit code, report)``."""
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        params = resolve_params(args)
        data = _read_input(args.input)
        if args.command == "genusz" and data is None:
            params["kind"] = "genus"
            inst = instance_from(params, None)
        elif args.command in ("verify", "bounds"):
            inst = data
        else:
            inst = instance_from(params, data)
    except (UsageError, GraphError, OSError, json.JSONDecodeError, KeyError) as e:
        return EXIT_USAGE, {"schema_version": SCHEMA_VERSION, "error": str(e)}
    if args.command == "bounds":
        result, _, code = cmd_bounds(params, None)
        return code, result
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "params": params}
    if inst is not None:
        report["input_sha256"] = hashlib.sha256(dumps(inst).encode()).hexdigest()
    try:
        result, claims, code = HANDLERS[args.command](params, inst)
    except (UsageError, GraphError) as e:
        return EXIT_USAGE, {**report, "error": str(e)}
    except AssertionError as e:
        claim = _claim_of(e)
        return EXIT_ASSERTION, {**report, "claims": {claim: "fail"}, "failed_claim": claim, "error": str(e)}
    report["result"] = result
    report["claims"] = claims
    if args.command != "verify":
        report["instance"] = inst
        if "partition" in result:
            report["partition"] = result["partition"]
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - t0, 6)
    return code, report


def main(argv=None) -> int:
    code, report = run(argv)
    out = sys.stdout if code != EXIT_USAGE else sys.stderr
    print(dumps(report) if isinstance(report, dict) else json.dumps(report), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())
