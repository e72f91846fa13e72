"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 a negative verdict where
membership/copositivity/validity was asked for, 3 solver unknown, 4 resource
cap exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .bounds import DEFAULT_T_TOL, BoundError, compute_bound
from .certificates import verify
from .cones import membership
from .copositivity import brute_oracle, cop4_test, cop5_test, cop_inner_test
from .graphs import ResourceCapError, generate_family, max_stable_set
from .ranks import rank_lower_search, rank_upper_search

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_CAP = 0, 1, 2, 3, 4

log = logging.getLogger("copos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(obj, out: str | None = None) -> None:
    text = io.dumps(obj)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _verdict_code(status: str, positive: str) -> int:
    if status == positive:
        return EXIT_OK
    if status == "unknown":
        return EXIT_UNKNOWN
    return EXIT_NEGATIVE


# subcommands


def cmd_gen(args) -> int:
    if args.family == "disjoint_union":
        if len(args.params) != 2:
            raise UsageError("disjoint_union takes two graph files")
        g = generate_family("disjoint_union", io.read_graph(args.params[0]), io.read_graph(args.params[1]))
    else:
        try:
            params = [int(p) for p in args.params]
        except ValueError:
            raise UsageError(f"family parameters must be integers: {args.params}") from None
        try:
            g = generate_family(args.family, *params)
        except TypeError as exc:
            raise UsageError(f"wrong parameters for {args.family}: {exc}") from None
    if args.output:
        io.write_graph(g, args.output)
    else:
        print(io.dumps(io.graph_to_json(g)))
    return EXIT_OK


def cmd_alpha(args) -> int:
    g = io.read_graph(args.graph)
    best = max_stable_set(g)
    _emit({"n": g.n, "alpha": len(best), "stable_set": sorted(best)})
    return EXIT_OK


def cmd_bound(args) -> int:
    g = io.read_graph(args.graph)
    try:
        res = compute_bound(g, args.hierarchy, args.r, args.t_tol)
    except BoundError as exc:
        _emit({"error": str(exc), "trace": exc.trace})
        return EXIT_UNKNOWN
    _emit(res.to_json(with_certificate=args.certificate))
    return EXIT_OK if res.verified else EXIT_UNKNOWN


def cmd_membership(args) -> int:
    m = io.read_matrix(args.matrix)
    v = membership(args.cone, m, args.r, args.margin)
    _emit(v.to_json())
    if args.certificate_out and v.certificate is not None:
        io.write_certificate(v.certificate, args.certificate_out)
    return _verdict_code(v.status, "member")


def cmd_rank(args) -> int:
    g = io.read_graph(args.graph)
    rep = rank_lower_search(g, args.size_cap) if args.lower else rank_upper_search(g, args.max_r)
    _emit(rep.to_json())
    return EXIT_OK


def cmd_cop5(args) -> int:
    m = io.read_matrix(args.matrix)
    if m.shape != (5, 5):
        raise UsageError(f"cop5 needs a 5x5 matrix, got {m.shape[0]}x{m.shape[1]}")
    verdict = cop5_test(m, args.margin)
    _emit({"status": verdict, "method": "qtilde1", "margin": args.margin})
    return _verdict_code(verdict, "copositive")


def cmd_copositive(args) -> int:
    m = io.read_matrix(args.matrix)
    n = m.shape[0]
    if args.r is not None:
        verdict, method, extra = cop_inner_test(m, args.r, args.margin), f"qtilde{args.r}", {}
    elif n <= 4:
        verdict, method, extra = cop4_test(m, args.margin), "psd_plus_nonneg", {}
    elif n == 5:
        verdict, method, extra = cop5_test(m, args.margin), "qtilde1", {}
    else:
        res = brute_oracle(m, args.max_depth)
        verdict, method, extra = res.status, "simplex_oracle", res.to_json()
    out = {"status": verdict, "method": method, "n": n}
    out.update({k: v for k, v in extra.items() if k != "status"})
    _emit(out)
    return _verdict_code(verdict, "copositive")


def cmd_verify(args) -> int:
    m = io.read_matrix(args.matrix)
    cert = io.read_certificate(args.certificate)
    try:
        rep = verify(m, cert, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(rep.to_json())
    return EXIT_OK if rep.passed else EXIT_NEGATIVE


def cmd_reproduce(args) -> int:
    from .experiments import run_experiment

    name, *params = args.experiment
    try:
        rep = run_experiment(name, *params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = "-".join([name, *params])
    (outdir / f"{stem}.json").write_text(io.dumps(rep.to_json()) + "\n")
    md = rep.to_markdown()
    (outdir / f"{stem}.md").write_text(md)
    print(md)
    return EXIT_OK if rep.passed else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="copos", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="parallelism hint (searches currently run sequentially)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="generate a graph family")
    s.add_argument("--family", required=True)
    s.add_argument("params", nargs="*")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("alpha", help="stability number")
    s.add_argument("-g", "--graph", required=True)
    s.set_defaults(func=cmd_alpha)

    s = sub.add_parser("bound", help="hierarchy bound on alpha")
    s.add_argument("--hierarchy", required=True, choices=["nu", "nutilde", "zeta", "zetatilde", "theta"])
    s.add_argument("--r", type=int, required=True)
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--t-tol", type=float, default=DEFAULT_T_TOL)
    s.add_argument("--certificate", action="store_true", help="include the certificate in the output")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("membership", help="cone membership of a matrix")
    s.add_argument("--cone", required=True, choices=["Q", "Qtilde", "K", "C", "Ctilde", "Q0"])
    s.add_argument("--r", type=int, default=0)
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("--margin", type=float, default=0.0)
    s.add_argument("--certificate-out")
    s.set_defaults(func=cmd_membership)

    s = sub.add_parser("rank", help="bounds on the rank of a graph")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lower", action="store_true")
    grp.add_argument("--upper", action="store_true")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--size-cap", type=int)
    s.add_argument("--max-r", type=int, default=2)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("cop5", help="exact copositivity test for 5x5 matrices")
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("--margin", type=float, default=1e-6)
    s.set_defaults(func=cmd_cop5)

    s = sub.add_parser("copositive", help="copositivity test")
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("--r", type=int)
    s.add_argument("--margin", type=float, default=1e-6)
    s.add_argument("--max-depth", type=int, default=40)
    s.set_defaults(func=cmd_copositive)

    s = sub.add_parser("verify-cert", help="check a certificate against a matrix")
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("-c", "--certificate", required=True)
    s.add_argument("--tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("reproduce", help="run a scripted experiment")
    s.add_argument("--experiment", nargs="+", required=True, metavar="NAME [PARAM]")
    s.add_argument("-o", "--output-dir", default="reports")
    s.set_defaults(func=cmd_reproduce)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OverflowError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (io.FormatError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
