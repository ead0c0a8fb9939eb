"""ualw command line.

    ualw check FILE            run the checks declared in a workbench file
    ualw repro NAME            replay a built-in scenario
    ualw lindenbaum FILE --logic L
    ualw entails FILE --logic L LHS RHS [--hyp LHS RHS ...]
    ualw si FILE --logic L PHI PSI
    ualw list-scenarios
    ualw validate FILE... | --scenarios

Reports are JSON lines (one verdict per line, then a summary line) or text.
Exit status: 0 all expectations met, 1 some check refuted or mismatched,
2 input or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__, scenarios, workbench
from .errors import InputError, WorkbenchError
from .logic import lindenbaum
from .terms import format_formula

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# --------------------------------------------------------------- running

def _load(source):
    kind, ref = source
    return scenarios.load(ref) if kind == "scenario" else workbench.load(ref)


_cache: dict = {}


def _run_index(job):
    # worker entry point: each process loads the workbench once
    source, i, opts = job
    wb = _cache.get(source)
    if wb is None:
        wb = _cache[source] = _load(source)
    return workbench.run_check(wb, wb.checks[i], opts)


def run_checks(wb, source, opts, jobs=1):
    if jobs <= 1 or len(wb.checks) <= 1:
        return workbench.run_all(wb, opts)
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map preserves declaration order
        return list(ex.map(_run_index, [(source, i, opts) for i in range(len(wb.checks))]))


def emit_report(results, wb, label, fmt, timing, out, seconds=None) -> bool:
    ok = all(r.ok for r in results)
    summary = {"summary": True, "tool": "ualw", "version": __version__, "input": label,
               "input_digest": wb.digest, "checks": len(results),
               "verdicts": sum(len(r.verdicts) for r in results),
               "mismatched": [r.spec.id for r in results if not r.ok], "ok": ok}
    if timing and seconds is not None:
        summary["seconds"] = round(seconds, 6)
    if fmt == "json":
        for r in results:
            for rec in r.records(timing):
                out.write(_dump(rec) + "\n")
        out.write(_dump(summary) + "\n")
    else:
        for r in results:
            for v, rec in zip(r.verdicts, r.records(timing)):
                line = f"{'ok ' if rec['ok'] else 'BAD'} {r.spec.id}: {v.summary()}"
                if rec["expected"]:
                    line += f" (expected {rec['expected']})"
                if timing and "seconds" in rec:
                    line += f" {rec['seconds']:.3f}s"
                out.write(line + "\n")
        n_bad = len(summary["mismatched"])
        out.write(f"{label}: {summary['checks']} checks, {summary['verdicts']} verdicts, "
                  f"{'all expectations met' if ok else f'{n_bad} not met'}; ualw {__version__}; "
                  f"sha256 {wb.digest}\n")
    return ok


def _opts(args):
    return workbench.Options(max_size=args.max_size, budget=args.budget)


def _report(args, wb, source, label):
    t0 = time.perf_counter()
    results = run_checks(wb, source, _opts(args), args.jobs)
    ok = emit_report(results, wb, label, args.format, args.timing, sys.stdout, time.perf_counter() - t0)
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------- commands

def cmd_check(args):
    wb = workbench.load(args.file)
    return _report(args, wb, ("file", args.file), args.file)


def cmd_repro(args):
    wb = scenarios.load(args.name)
    return _report(args, wb, ("scenario", args.name), f"scenario:{args.name}")


def _single(args, spec):
    wb = workbench.load(args.file)
    r = workbench.run_check(wb, spec, _opts(args))
    ok = emit_report([r], wb, args.file, args.format, args.timing, sys.stdout, r.seconds)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_entails(args):
    spec = workbench.CheckSpec("query", "entails", {"logic": args.logic, "goal": [args.lhs, args.rhs],
                                                      "hypotheses": [list(h) for h in args.hyp or []]})
    return _single(args, spec)


def cmd_si(args):
    return _single(args, workbench.CheckSpec("query", "si_equivalent", {"logic": args.logic, "pair": [args.phi, args.psi]}))


def cmd_lindenbaum(args):
    wb = workbench.load(args.file)
    L = wb.logic(args.logic)
    li = lindenbaum(L)
    A = li.algebra
    terms = [format_formula(li.term(i, L.atoms)) for i in range(A.size)]
    if args.format == "json":
        sys.stdout.write(_dump({"logic": args.logic, "size": A.size, "coordinates": li.coordinates,
                                "generators": dict(sorted(li.generator_image.items())),
                                "elements": terms, "tables": {o: list(t) for o, t in A.tables.items()}}) + "\n")
        return EXIT_OK
    w = sys.stdout.write
    w(f"logic: {args.logic}\nsize: {A.size}\ncoordinates: {', '.join(map(str, li.coordinates))}\n")
    w("generators:\n")
    for p in L.atoms:
        w(f"  {p} -> {li.generator_image[p]}\n")
    w("elements:\n")
    for i, t in enumerate(terms):
        w(f"  {i}: {t}\n")
    w("tables:\n")
    for o in A.signature.ops:
        t = A.tables[o.name]
        if o.arity <= 1:
            w(f"  {o.name}: {' '.join(map(str, t))}\n")
        else:
            # rows indexed by the first argument
            w(f"  {o.name}:\n")
            n = A.size
            stride = n ** (o.arity - 1)
            for a in range(n):
                w(f"    {a}: {' '.join(map(str, t[a * stride:(a + 1) * stride]))}\n")
    return EXIT_OK


def cmd_list(args):
    for n in scenarios.list_scenarios():
        desc = scenarios.load(n).description if args.verbose else ""
        print(f"{n}\t{desc}" if desc else n)
    return EXIT_OK


def cmd_validate(args):
    targets = [("file", f) for f in args.files]
    if args.scenarios:
        targets += [("scenario", n) for n in scenarios.list_scenarios()]
    if not targets:
        raise InputError("nothing to validate (give files or --scenarios)")
    bad = 0
    for t in targets:
        try:
            _load(t)
            print(f"valid: {t[1]}")
        except WorkbenchError as e:
            bad += 1
            print(f"invalid: {t[1]}: {e}", file=sys.stderr)
    return EXIT_INPUT if bad else EXIT_OK


# --------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="ualw", description="Finite-presentation workbench for algebraic logics.")
    p.add_argument("--version", action="version", version=f"ualw {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp, fmt="json"):
        sp.add_argument("--max-size", type=int, default=None, help="model-size bound for bounded oracles")
        sp.add_argument("--budget", type=int, default=workbench.DEFAULT_BUDGET, help="enumeration budget")
        sp.add_argument("--jobs", type=int, default=1, help="parallel check workers")
        sp.add_argument("--format", choices=("json", "text"), default=fmt)
        sp.add_argument("--timing", action="store_true", help="include wall-clock times (breaks byte-identity)")

    sp = sub.add_parser("check", help="run the checks in a workbench file")
    sp.add_argument("file")
    run_flags(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("repro", help="replay a built-in scenario")
    sp.add_argument("name")
    run_flags(sp)
    sp.set_defaults(func=cmd_repro)

    sp = sub.add_parser("lindenbaum", help="print a Lindenbaum-Tarski algebra")
    sp.add_argument("file")
    sp.add_argument("--logic", required=True)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_lindenbaum)

    sp = sub.add_parser("entails", help="does H |- lhs = rhs hold in every model algebra?")
    sp.add_argument("file")
    sp.add_argument("--logic", required=True)
    sp.add_argument("lhs")
    sp.add_argument("rhs")
    sp.add_argument("--hyp", nargs=2, action="append", metavar=("LHS", "RHS"))
    run_flags(sp)
    sp.set_defaults(func=cmd_entails)

    sp = sub.add_parser("si", help="substitution-invariant equivalence of two formulas")
    sp.add_argument("file")
    sp.add_argument("--logic", required=True)
    sp.add_argument("phi")
    sp.add_argument("psi")
    run_flags(sp)
    sp.set_defaults(func=cmd_si)

    sp = sub.add_parser("list-scenarios", help="list built-in scenarios")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("validate", help="schema-check and resolve workbench files")
    sp.add_argument("files", nargs="*")
    sp.add_argument("--scenarios", action="store_true", help="also validate every built-in scenario")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    if getattr(args, "jobs", 1) < 1:
        print("ualw: error: --jobs must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except WorkbenchError as e:
        # UnknownScenario, InputError, budget overruns outside a check, ...
        print(f"ualw: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
