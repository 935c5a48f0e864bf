"""Command line interface.

Graph arguments are files (edge list, or adjacency JSON when the name ends
in ``.json``) or generator specs such as ``gen:path-power:300:2`` and
``gen:random-min-degree:300:0.7667``.  Random generators take the global
``--seed`` unless the spec ends in ``:seed=S``.

Reports are JSON with sorted keys and no timing fields, so two runs with
the same seed produce identical bytes.  Timings go to stderr with
``--verbose``.

Exit codes: 0 success, 2 stage failure (a randomized stage ran out of
attempts), 3 precondition or invariant error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .backbone import (
    augment_reduced_graph,
    build_Bkr,
    build_Cmr,
    build_Kkr,
    build_Pmr,
    build_Rkr_path_augmented,
    surface_constants,
)
from .colouring import balance_colouring, colour_along_labelling, colour_report
from .embedder import augment_G_prime, compute_image_restrictions
from .errors import ArrangeableError, InvariantError, PreconditionError, StageFailure
from .graph import Graph, Labelling, dumps_edge_list, equitable_grid, generate, load_graph
from .partition_h import homomorphism_to_cycle_power, partition_H
from .pipeline import (
    PracticalParams,
    derive_constant_chain,
    run_bandwidth_pipeline,
    run_ramsey_pipeline,
)
from .regularity import build_host_partition
from .structure import (
    arrangeability_of_order,
    bandwidth_of_labelling,
    heuristic_arrangeability,
    heuristic_bandwidth_labelling,
    min_arrangeability_exact,
)

EXIT_OK, EXIT_STAGE, EXIT_PRECONDITION = 0, 2, 3
_RANDOM_GENERATORS = {"random-min-degree", "random-bandwidth"}


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_graph(spec: str, seed) -> Graph:
    """Load a graph from a file name or a ``gen:kind:arg:...`` spec."""
    if spec.startswith("gen:"):
        parts = spec[4:].split(":")
        kind, rest = parts[0], parts[1:]
        kwargs = {}
        args = []
        for p in rest:
            if p.startswith("seed="):
                kwargs["seed"] = int(p[5:])
            else:
                args.append(_number(p))
        if kind in _RANDOM_GENERATORS:
            kwargs.setdefault("seed", seed)
        return generate(kind, *args, **kwargs)
    fmt = "adjacency-json" if spec.endswith(".json") else "edge-list"
    return load_graph(spec, fmt)


def _labelling(H: Graph, how: str, seed) -> Labelling:
    if how == "identity":
        return Labelling.identity(H.n)
    if how == "heuristic":
        return heuristic_bandwidth_labelling(H, seed=seed).labelling
    # best: the identity unless the heuristic is strictly narrower
    ident = Labelling.identity(H.n)
    cert = heuristic_bandwidth_labelling(H, seed=seed)
    return cert.labelling if cert.b < bandwidth_of_labelling(H, ident).b else ident


def _params(args) -> PracticalParams:
    fields = {}
    for name in ("eps", "delta", "xi", "beta", "k", "restarts", "swap_budget"):
        val = getattr(args, name, None)
        if val is not None:
            fields[name] = val
    if getattr(args, "regularity", None):
        fields["mode"] = args.regularity
    if getattr(args, "strict", False):
        fields["strict"] = True
    return PracticalParams(**fields)


# --------------------------------------------------------------------------
# subcommands; each returns a JSON-serializable report


def cmd_arrange(args):
    G = read_graph(args.graph, args.seed)
    if args.exact:
        cert = min_arrangeability_exact(G, cap=args.cap)
    elif args.strategy == "identity":
        cert = arrangeability_of_order(G, Labelling.identity(G.n))
    else:
        cert = heuristic_arrangeability(G, args.strategy)
    return {"command": "arrange", "n": G.n, "certificate": cert.to_json()}


def cmd_bandwidth(args):
    G = read_graph(args.graph, args.seed)
    cert = heuristic_bandwidth_labelling(G, seed=args.seed, starts=args.starts)
    return {"command": "bandwidth", "n": G.n, "certificate": cert.to_json()}


def cmd_colour(args):
    H = read_graph(args.graph, args.seed)
    L = _labelling(H, args.labelling, args.seed)
    b = bandwidth_of_labelling(H, L).b
    beta = args.beta if args.beta is not None else max(b, 1) / H.n
    sigma = colour_along_labelling(H, L, args.r)
    out = {"command": "colour", "n": H.n, "bandwidth": b, "beta": beta}
    if args.balance:
        sigma, rep = balance_colouring(H, L, sigma, args.r, args.ell, beta, strict=False, return_report=True)
        out["balance"] = rep.to_json()
    out["colouring"] = [int(c) for c in sigma]
    out["report"] = colour_report(H, L, sigma, args.r, beta, args.ell)
    return out


def cmd_partition_h(args):
    H = read_graph(args.graph, args.seed)
    L = _labelling(H, args.labelling, args.seed)
    b = bandwidth_of_labelling(H, L).b
    beta = args.beta if args.beta is not None else max(b, 1) / H.n
    if args.m is not None:
        hm = homomorphism_to_cycle_power(H, L, args.r, args.m, args.xi, beta=beta, route=args.route)
    else:
        R = build_Rkr_path_augmented(args.k, args.r)
        sigma = colour_along_labelling(H, L, args.r)
        hm = partition_H(H, L, sigma, R, equitable_grid(H.n, args.k, args.r), beta, args.xi, strict=args.strict)
    return {"command": "partition-h", "n": H.n, "beta": beta, "map": hm.to_json()}


def _targets(args, n):
    if args.targets:
        t = [int(x) for x in args.targets.split(",")]
        if len(t) != args.k * args.r:
            raise PreconditionError(f"need {args.k * args.r} targets, got {len(t)}")
        return np.array(t)
    return equitable_grid(n, args.k, args.r).flat()


def _host_partition(args, G):
    R = build_Rkr_path_augmented(args.k, args.r)
    K = build_Kkr(args.k, args.r)
    return build_host_partition(G, _targets(args, G.n), R.graph, K.graph, args.eps, args.delta,
                                seed=args.seed, budget=args.swap_budget, mode=args.regularity)


def cmd_partition_g(args):
    G = read_graph(args.host, args.seed)
    part = _host_partition(args, G)
    return {"command": "partition-g", "n": G.n, "partition": part.to_json()}


def cmd_restrict(args):
    G = read_graph(args.host, args.seed)
    part = _host_partition(args, G)
    U = compute_image_restrictions(part, G, args.delta, args.eps)
    _, aug = augment_G_prime(G, part, args.delta, args.eps, seed=args.seed, restrictions=U)
    return {"command": "restrict", "n": G.n, "certified": part.certified,
            "restrictions": U.to_json(), "augmentation": aug}


def _paper_mode(H: Graph, r: int, gamma: float, n: int, command: str):
    a = heuristic_arrangeability(H).a
    chain = derive_constant_chain(r, a, gamma, n=n)
    return {"command": command, "mode": "paper", "arrangeability": a, "chain": chain.to_json(),
            "feasible": False,
            "reason": "constants of the cited lemmas are not numeric; run with --mode practical"}


def cmd_pipeline(args, embed_only=False):
    H = read_graph(args.guest, args.seed)
    G = read_graph(args.host, args.seed)
    name = "embed" if embed_only else "pipeline"
    if args.mode == "paper":
        return _paper_mode(H, args.r, args.gamma, G.n, name)
    rep = run_bandwidth_pipeline(H, G, args.r, args.gamma, _params(args), seed=args.seed,
                                 labelling=None if args.labelling == "best" else _labelling(H, args.labelling, args.seed))
    args._timings = rep.timings
    if embed_only:
        return {"command": "embed", "phi": rep.to_json()["phi"], "audit": rep.stages["embed"],
                "certification": rep.certification}
    return {"command": "pipeline", "report": rep.to_json()}


def cmd_ramsey(args):
    H = read_graph(args.guest, args.seed)
    colouring = read_graph(args.colouring, args.seed) if args.colouring else None
    if args.mode == "paper":
        return {"command": "ramsey", "mode": "paper", "feasible": False,
                "reason": "blow-up constants are not numeric; run with --mode practical"}
    params = _params(args)
    if args.eps is None:
        params.eps = 0.3
    rep = run_ramsey_pipeline(H, args.r, colouring=colouring, N=args.N, params=params, seed=args.seed,
                              labelling=None if args.labelling == "best" else _labelling(H, args.labelling, args.seed))
    args._timings = rep.timings
    return {"command": "ramsey", "report": rep.to_json()}


def cmd_constants(args):
    overrides = {}
    for item in args.set or []:
        key, _, val = item.partition("=")
        if not _:
            raise PreconditionError(f"--set expects name=value, got {item!r}")
        overrides[key] = float(val)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        chain = derive_constant_chain(args.r, args.a, args.gamma, overrides, n=args.n)
    return {"command": "constants", "chain": chain.to_json()}


def cmd_backbone(args):
    kind = args.kind
    if kind == "surface":
        return {"command": "backbone", "surface": surface_constants(args.genus, args.n, args.Delta).to_json()}
    if kind in ("P", "C"):
        g = build_Pmr(args.m, args.r) if kind == "P" else build_Cmr(args.m, args.r)
        return {"command": "backbone", "kind": kind, "edge_list": dumps_edge_list(g)}
    if kind == "B":
        grid = build_Bkr(args.k, args.r)
    elif kind == "K":
        grid = build_Kkr(args.k, args.r)
    elif kind == "R":
        grid = build_Rkr_path_augmented(args.k, args.r)
    else:  # augment the path-augmented grid, the only reduced graph available without a host
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            grid = augment_reduced_graph(build_Rkr_path_augmented(args.k, args.r), args.gamma, check_degree=False)
    return {"command": "backbone", "kind": kind, "grid": grid.to_json(), "edge_list": grid.dumps(),
            "info": grid.info}


# --------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--mode", choices=("paper", "practical"), default="practical")
    p.add_argument("--json", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--verbose", action="store_true", help="print timings and warnings to stderr")
    return p


def _practical(p: argparse.ArgumentParser, eps=0.2, delta=0.3) -> None:
    p.add_argument("--epsilon", dest="eps", type=float, default=None if eps is None else eps)
    p.add_argument("--delta", type=float, default=delta)
    p.add_argument("--regularity", choices=("exact", "codegree", "sampled"), default="codegree",
                   help="regularity check mode")
    p.add_argument("--swap-budget", dest="swap_budget", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="arrangeable", description=__doc__.split("\n\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("arrange", parents=[common], help="arrangeability certificate")
    p.add_argument("graph")
    p.add_argument("--exact", action="store_true", help="exhaustive minimum (n <= cap)")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--strategy", choices=("min-back-degree-last", "degeneracy-order", "identity"),
                   default="min-back-degree-last")
    p.set_defaults(func=cmd_arrange)

    p = sub.add_parser("bandwidth", parents=[common], help="low-bandwidth labelling")
    p.add_argument("graph")
    p.add_argument("--starts", type=int, default=4)
    p.set_defaults(func=cmd_bandwidth)

    labelling_choices = ("best", "identity", "heuristic")
    p = sub.add_parser("colour", parents=[common], help="colouring along a bandwidth labelling")
    p.add_argument("graph")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--ell", type=int, default=100)
    p.add_argument("--balance", action="store_true")
    p.add_argument("--labelling", choices=labelling_choices, default="best")
    p.set_defaults(func=cmd_colour)

    p = sub.add_parser("partition-h", parents=[common], help="guest grid map or cycle-power homomorphism")
    p.add_argument("graph")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, help="map onto C_m^r instead of the grid")
    p.add_argument("--route", choices=("auto", "lemma", "bandwidth"), default="auto")
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--beta", type=float)
    p.add_argument("--strict", action="store_true", help="enforce beta <= xi^2/(1200 r)")
    p.add_argument("--labelling", choices=labelling_choices, default="best")
    p.set_defaults(func=cmd_partition_h)

    for name, func, helptext in (("partition-g", cmd_partition_g, "host cluster partition"),
                                 ("restrict", cmd_restrict, "image restrictions and host augmentation")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--host", required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--targets", help="comma separated cluster sizes, row major")
        _practical(p)
        p.set_defaults(func=func)

    for name, embed_only, helptext in (("embed", True, "embed a guest into a host"),
                                       ("pipeline", False, "full bandwidth pipeline report")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--host", required=True)
        p.add_argument("--guest", required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--gamma", type=float, required=True)
        p.add_argument("--xi", type=float, default=0.1)
        p.add_argument("--beta", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--restarts", type=int, default=20)
        p.add_argument("--strict", action="store_true")
        p.add_argument("--labelling", choices=labelling_choices, default="best")
        _practical(p)
        p.set_defaults(func=lambda a, e=embed_only: cmd_pipeline(a, e))

    p = sub.add_parser("ramsey", parents=[common], help="monochromatic copy in a 2-coloured K_N")
    p.add_argument("--guest", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--N", type=int, help="size of the random colouring (default (2r+4)n)")
    p.add_argument("--colouring", help="red graph of the colouring (file or spec)")
    p.add_argument("--k", type=int)
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--labelling", choices=labelling_choices, default="best")
    _practical(p, eps=None, delta=0.25)
    p.set_defaults(func=cmd_ramsey)

    p = sub.add_parser("constants", parents=[common], help="constant chain")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override an opaque constant")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("backbone", parents=[common], help="template graphs")
    p.add_argument("kind", choices=("B", "K", "R", "augment", "P", "C", "surface"))
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--Delta", type=int, default=3)
    p.set_defaults(func=cmd_backbone)
    return parser


def _emit(report: dict, args) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    if args.json:
        Path(args.json).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        if not args.verbose:
            warnings.simplefilter("ignore")
        try:
            report = args.func(args)
        except StageFailure as exc:
            failure = {"command": args.command, "success": False, "error": type(exc).__name__,
                       "stage": getattr(exc, "stage", None), "message": str(exc), "report": exc.report}
            _emit(failure, args)
            print(f"stage failure: {exc}", file=sys.stderr)
            return EXIT_STAGE
        except (PreconditionError, InvariantError, ArrangeableError, OSError, ValueError) as exc:
            stage = getattr(exc, "stage", None)
            where = f" [{stage}]" if stage else ""
            print(f"error{where}: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
    if args.command == "backbone" and "edge_list" in report and not args.json:
        sys.stdout.write(report["edge_list"])
    else:
        _emit(report, args)
    if args.verbose:
        timings = getattr(args, "_timings", {})
        for name, secs in timings.items():
            print(f"{name:>14s} {secs:8.3f}s", file=sys.stderr)
        print(f"{'total':>14s} {time.perf_counter() - t0:8.3f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
