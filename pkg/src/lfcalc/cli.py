"""Command-line front end: ``lfcalc SUBCOMMAND ...``.

Exit codes: 0 when every requested check passes, 1 on a failed check or an
input error, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import algebras, cdr, dsl, engine, g2


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _Usage()


def load_algebra(spec: str) -> algebras.AlgebraDef:
    """``builtin:NAME``, a bare built-in name, or a path to an ``.alg`` file."""
    if spec.startswith("builtin:"):
        return algebras.builtin(spec)
    path = Path(spec)
    if path.is_file():
        return dsl.parse_algebra(path.read_bytes())
    try:
        return algebras.builtin(spec)
    except algebras.UnknownAlgebra:
        raise algebras.UnknownAlgebra(f"no such algebra file or built-in: {spec!r}") from None


def _resolve_host(spec: str):
    return load_algebra(spec)


def _print_report(rep, out, verbose=False):
    for c in rep.checks:
        if c.ok:
            if verbose:
                print(f"PASS {c.name}", file=out)
        else:
            print(f"FAIL {c.name}", file=out)
            if c.difference:
                print(f"  difference: {c.difference}", file=out)
    nfail = len(rep.failures())
    print(f"{rep.suite}: {len(rep.checks)} checks, {nfail} failed", file=out)


def _emit(rep, args, out):
    _print_report(rep, out, getattr(args, "verbose", False))
    if getattr(args, "json", None):
        stamp = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        text = dsl.emit_report(rep, timestamp=stamp)
        if args.json == "-":
            out.write(text)
        else:
            Path(args.json).write_text(text, encoding="utf-8")
    return 0 if rep.ok else 1


# -- subcommands ------------------------------------------------------------------
def cmd_ope(args, out):
    alg = load_algebra(args.algebra)
    a, b = alg.expr(args.a), alg.expr(args.b)
    print(engine.bracket(a, b), file=out)
    return 0


def cmd_jacobi(args, out):
    alg = load_algebra(args.algebra)
    a, b, c = (alg.expr(x) for x in (args.a, args.b, args.c))
    r = engine.check_jacobi(a, b, c)
    if r:
        print("holds", file=out)
        return 0
    print("fails", file=out)
    print(f"  difference: {r.difference}", file=out)
    return 1


def cmd_verify(args, out):
    alg = load_algebra(args.algebra)
    if args.realization:
        spec = args.realization
        if spec in ("builtin:flat+", "builtin:flat-"):
            S = cdr.build_sections(spec[-1])
            host, images = cdr.host(), S.images()
        else:
            host, images = dsl.parse_realization(Path(spec).read_bytes(), _resolve_host)
        rep = algebras.verify_realization(alg, images, host, jobs=args.jobs)
        return _emit(rep, args, out)
    rep = algebras.check_table_skew(alg)
    if args.jacobi or not alg.relations:
        rep.extend(algebras.check_table_jacobi(alg))
    rep.suite = f"verify:{alg.name}"
    return _emit(rep, args, out)


def cmd_g2(args, out):
    if args.what == "contractions":
        return _emit(g2.check_contractions(), args, out)
    rep = cdr.theorem_suite(args.chirality, jobs=args.jobs)
    return _emit(rep, args, out)


def cmd_parse(args, out):
    path = Path(args.file)
    doc = dsl.parse_document(path.read_bytes())
    for d in doc.diagnostics:
        print(f"{path}:{d}", file=out)
    if doc.ok:
        if args.check:
            print(f"{path}: ok ({len(doc.value.generators)} generators, {len(doc.value.raw_table)} brackets)", file=out)
        else:
            out.write(dsl.serialize(doc.value))
        return 0
    return 1


def build_parser():
    p = _Parser(prog="lfcalc", description="Exact lambda-bracket calculator")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def alg_opt(sp):
        sp.add_argument("--algebra", required=True, help="builtin:NAME or an .alg file")

    def jobs_opt(sp):
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    def json_opt(sp):
        sp.add_argument("--json", metavar="PATH", help="write the JSON report ('-' for stdout)")
        sp.add_argument("-v", "--verbose", action="store_true", help="list passing checks too")

    sp = sub.add_parser("ope", help="print [A_lambda B]")
    sp.add_argument("a")
    sp.add_argument("b")
    alg_opt(sp)
    sp.set_defaults(fn=cmd_ope)

    sp = sub.add_parser("jacobi", help="check the Jacobi identity on A, B, C")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("c")
    alg_opt(sp)
    sp.set_defaults(fn=cmd_jacobi)

    sp = sub.add_parser("verify", help="check a bracket table or a realization of it")
    alg_opt(sp)
    sp.add_argument("--realization", help="realization file, or builtin:flat+ / builtin:flat-")
    sp.add_argument("--jacobi", action="store_true",
                    help="also check Jacobi on generator triples when the algebra has relations")
    jobs_opt(sp)
    json_opt(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("g2", help="G2 suites")
    g2sub = sp.add_subparsers(dest="what", required=True, parser_class=_Parser)
    c = g2sub.add_parser("contractions", help="phi/psi contraction identities")
    json_opt(c)
    c.set_defaults(fn=cmd_g2)
    t = g2sub.add_parser("theorem", help="flat realization of two commuting SV G2 copies")
    t.add_argument("--chirality", choices=("+", "-", "both"), default="both")
    jobs_opt(t)
    json_opt(t)
    t.set_defaults(fn=cmd_g2)

    sp = sub.add_parser("parse", help="parse an .alg file")
    sp.add_argument("file")
    sp.add_argument("--check", action="store_true", help="only report diagnostics")
    sp.set_defaults(fn=cmd_parse)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except _Usage:
        return 2
    except SystemExit as exc:  # --help
        return 0 if not exc.code else 2
    if getattr(args, "jobs", 1) < 1:
        print("lfcalc: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.fn(args, out)
    except dsl.DslError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 1
    except (algebras.UnknownAlgebra, engine.UndefinedBracket, engine.GuardError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
