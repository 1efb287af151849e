"""Command line: gen, build, query, maxdepth, bench, render, verify.

Exit codes: 0 ok, 1 usage, 2 validation, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bench
from .geometry import DomainError, ParameterError, ValidationError
from .maxdepth import grid_centers
from .scenes import (FAMILIES, PROFILES, dumps_scene, generate_scene, read_queries, read_scene,
                     results_csv)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text, path, binary=False):
    if path in (None, "-"):
        if binary:
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
    else:
        with open(path, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8",
                                                                        "newline": ""})) as f:
            f.write(text)


def _load(args):
    if not args.input:
        raise UsageError("--input is required")
    try:
        return read_scene(args.input)
    except OSError as exc:
        raise ValidationError(f"cannot read scene: {exc}") from None


def _kind(args, scene):
    return args.structure or bench.DEFAULT_STRUCTURE[scene.family]


def _queries(args, scene):
    d = scene.dimension
    if args.queries and args.grid_eps:
        raise UsageError("give either --queries or --grid-eps")
    if args.grid_eps:
        return np.vstack(list(grid_centers(args.grid_eps, d)))
    if args.queries:
        try:
            return read_queries(args.queries, d)
        except OSError as exc:
            raise ValidationError(f"cannot read queries: {exc}") from None
    rng = np.random.default_rng(args.seed)
    return rng.uniform(0.0, 1.0, (args.m, d))


def cmd_gen(args):
    scene = generate_scene(args.family, args.n, seed=args.seed, profile=args.profile,
                           dim=args.dim)
    _emit(dumps_scene(scene), args.output)
    return EXIT_OK


def cmd_build(args):
    scene = _load(args)
    kind = _kind(args, scene)
    t0 = time.perf_counter()
    st = bench.build_structure(scene, kind, args.epsilon, args.m, args.tune_factor)
    dt = time.perf_counter() - t0
    d1, d2 = bench.structure_params(st)
    pn, dn = bench.node_counts(st)
    info = {"structure": kind, "n": len(scene), "m": args.m, "epsilon": args.epsilon,
            "delta1": d1, "delta2": d2, "build_time": dt, "primal_nodes": pn, "dual_nodes": dn}
    _emit(json.dumps(info, indent=1) + "\n", args.output)
    return EXIT_OK


def _verify_report(v):
    for msg in v.messages:
        print(msg, file=sys.stderr)
    print(f"verified {v.checked} queries: {v.violations} sandwich violations, "
          f"{v.strong_violations} per-object violations", file=sys.stderr)
    return EXIT_OK if v.ok else EXIT_VERIFY


def cmd_query(args):
    scene = _load(args)
    Q = _queries(args, scene)
    lo, hi, bounds, v = bench.run_queries(scene, _kind(args, scene), args.epsilon, Q,
                                          verify=args.verify, tune_factor=args.tune_factor,
                                          m=max(len(Q), 1))
    _emit(results_csv(Q, lo, hi, scene.dimension, bounds), args.output)
    return _verify_report(v) if args.verify else EXIT_OK


def cmd_verify(args):
    args.verify = True
    scene = _load(args)
    Q = _queries(args, scene)
    _, _, _, v = bench.run_queries(scene, _kind(args, scene), args.epsilon, Q, verify=True,
                                   tune_factor=args.tune_factor, m=max(len(Q), 1))
    return _verify_report(v)


def cmd_maxdepth(args):
    scene = _load(args)
    rec, _ = bench.run_maxdepth(scene, _kind(args, scene), args.epsilon, args.tune_factor)
    _emit(bench.records_csv([rec]), args.output)
    return EXIT_OK


def cmd_bench(args):
    if not args.values:
        raise UsageError("--values is required")
    vals = [float(v) for v in args.values.split(",")]
    recs = bench.run_bench(family=args.family, structure=args.structure, vary=args.vary,
                           values=vals, n=args.n, m=args.m, eps=args.epsilon, repeat=args.repeat,
                           seed=args.seed, profile=args.profile, mode=args.mode, dim=args.dim,
                           tune_factor=args.tune_factor)
    _emit(bench.records_csv(recs), args.output)
    return EXIT_OK


def cmd_render(args):
    from .render import render_depth_map

    scene = _load(args)
    data = render_depth_map(scene, args.epsilon, args.resolution, structure=args.structure,
                            markers=not args.no_markers)
    _emit(data, args.output, binary=True)
    return EXIT_OK


def make_parser():
    p = Parser(prog="approxdepth", description="Approximate depth in arrangements.")
    sub = p.add_subparsers(dest="verb", parser_class=Parser)

    def common(sp, scene=True):
        sp.add_argument("--output", "-o", default=None)
        sp.add_argument("--epsilon", type=float, default=0.01)
        sp.add_argument("--tune-factor", type=float, default=1.0)
        sp.add_argument("--seed", type=int, default=0)
        if scene:
            sp.add_argument("--input", "-i", default=None)
            sp.add_argument("--structure", choices=bench.STRUCTURES, default=None)

    g = sub.add_parser("gen", help="generate a seeded random scene")
    g.add_argument("--family", choices=FAMILIES, default="halfplanes")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--dim", type=int, default=None)
    g.add_argument("--profile", choices=PROFILES, default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", "-o", default=None)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a structure and report its size")
    common(b)
    b.add_argument("--m", type=int, default=1000, help="expected number of queries")
    b.set_defaults(func=cmd_build)

    for name, func, hlp in (("query", cmd_query, "answer queries"),
                            ("verify", cmd_verify, "answer queries and check them")):
        q = sub.add_parser(name, help=hlp)
        common(q)
        q.add_argument("--queries", default=None, help="query CSV file")
        q.add_argument("--grid-eps", type=float, default=None)
        q.add_argument("--m", type=int, default=200, help="random queries if no file is given")
        q.add_argument("--verify", action="store_true")
        q.set_defaults(func=func)

    md = sub.add_parser("maxdepth", help="approximate maximum depth on the grid")
    common(md)
    md.set_defaults(func=cmd_maxdepth)

    be = sub.add_parser("bench", help="benchmark sweep")
    common(be, scene=False)
    be.add_argument("--structure", choices=bench.STRUCTURES, default=None)
    be.add_argument("--family", choices=FAMILIES, default="halfplanes")
    be.add_argument("--profile", choices=PROFILES, default="peak-noise")
    be.add_argument("--dim", type=int, default=None)
    be.add_argument("--vary", choices=("n", "m", "eps"), default="n")
    be.add_argument("--values", default=None, help="comma-separated sweep values")
    be.add_argument("--n", type=int, default=1000)
    be.add_argument("--m", type=int, default=1000)
    be.add_argument("--mode", choices=("queries", "maxdepth"), default="queries")
    be.add_argument("--repeat", type=int, default=3)
    be.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="render a depth map as PPM")
    common(r)
    r.add_argument("--resolution", type=int, default=256)
    r.add_argument("--no-markers", action="store_true")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "verb", None):
            raise UsageError("a command is required")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
