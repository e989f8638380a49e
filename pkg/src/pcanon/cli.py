"""Command-line interface: ``pcanon {check,zform,scale,oracle,gen}``.

Exit codes: 0 success, 1 oracle disagreement, 2 P-property failure,
3 suspected failure of the MDP-equivalence conditions, 4 input error.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, localcontext
from pathlib import Path

from . import __version__
from .blockmat import fstr, parse_block_matrix, p_property, to_fraction
from .certify import theorem2_verdict
from .errors import (
    MatrixFormatError,
    PcanonError,
    PPropertyError,
    SingularMatrixError,
)
from .lp_oracle import build_lp_A, build_scaling_lp, simplex_solve
from .mdp import gen_instance
from .scaling import optimal_scaling, two_step
from .zform import compute_zform

EXIT_OK, EXIT_MISMATCH, EXIT_P, EXIT_THM2, EXIT_INPUT = 0, 1, 2, 3, 4

#: zform/scale/oracle check the P-property first when there are at most this many bases.
PRECHECK_LIMIT = 10**4


def _pivot_cap():
    raw = os.environ.get("PCANON_PIVOT_CAP")
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise MatrixFormatError(f"PCANON_PIVOT_CAP must be an integer, got {raw!r}") from None
    if cap < 0:
        raise MatrixFormatError("PCANON_PIVOT_CAP must be nonnegative")
    return cap


def approx(q, digits):
    """Decimal rendering of ``q`` rounded to ``digits`` places (display only)."""
    with localcontext() as ctx:
        ctx.prec = digits + len(str(abs(q.numerator) // q.denominator)) + 5
        value = Decimal(q.numerator) / Decimal(q.denominator)
        return str(value.quantize(Decimal(1).scaleb(-digits)))


def _read_matrix(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise MatrixFormatError(f"{path} is not UTF-8 text") from None
    return parse_block_matrix(text), hashlib.sha256(data).hexdigest()


def _precheck(A, args):
    if args.no_check or A.num_selections() > PRECHECK_LIMIT:
        return None
    verdict = p_property(A)
    if verdict.holds:
        return None
    s1, s2 = verdict.violation
    return {
        "error": "input lacks the P-property",
        "stage": "p_property",
        "violation": [[k + 1 for k in s1], [k + 1 for k in s2]],
    }


def _diagnose(A, exc, cap):
    """Stage diagnostics for a failed pipeline run, with a certificate when affordable."""
    diag = {"error": str(exc), "stage": exc.stage or "pipeline"}
    if A.num_selections() <= PRECHECK_LIMIT:
        try:
            diag["theorem2"] = theorem2_verdict(A, pivot_cap=cap).to_json()
        except PcanonError as inner:
            diag["theorem2_error"] = str(inner)
    return diag


def _failure_code(exc):
    # singular bases and sign failures point at the P-property; the rest
    # (pivot cap, certificate or scaling failures) at the MDP-equivalence conditions
    if isinstance(exc, (SingularMatrixError, PPropertyError)):
        return EXIT_P
    return EXIT_THM2


# -- commands -------------------------------------------------------------------

def cmd_check(A, args, cap):
    verdict = p_property(A)
    out = {"p_property": verdict.holds, "determinants": verdict.determinants}
    if verdict.holds:
        out["sign"] = verdict.sign
        return out, {}, EXIT_OK
    s1, s2 = verdict.violation
    out["violation"] = [[k + 1 for k in s1], [k + 1 for k in s2]]
    return out, {}, EXIT_P


def cmd_zform(A, args, cap):
    zf = compute_zform(A, pivot_cap=cap)
    out = zf.to_json()
    code = EXIT_OK
    try:
        optimal_scaling(zf.Abar, pivot_cap=cap)
    except PcanonError as exc:
        # the Z-form exists, but no positive scaling turns it into an MDP matrix
        out["diagnostics"] = _diagnose(A, exc, cap)
        code = EXIT_THM2
    if args.decimal is not None:
        out["decimal"] = {
            "note": "non-authoritative",
            "Xbar": [[approx(x, args.decimal) for x in row] for row in zf.Xbar],
        }
    return out, {"per_row": list(zf.per_row_pivots)}, code


def cmd_scale(A, args, cap):
    res = two_step(A, pivot_cap=cap)
    out = res.to_json()
    if args.decimal is not None:
        out["decimal"] = {
            "note": "non-authoritative",
            "d": approx(res.d, args.decimal),
            "x": [approx(x, args.decimal) for x in res.scaling.x],
        }
    return out, out["pivots"], EXIT_OK


def cmd_oracle(A, args, cap):
    lp_a = simplex_solve(build_lp_A(A))
    out = {"lp_A": {"status": lp_a.status, "pivots": lp_a.pivots}}
    if lp_a.status == "optimal":
        out["lp_A"]["optimum"] = fstr(lp_a.objective)
    res = two_step(A, pivot_cap=cap)
    lp_s = simplex_solve(build_scaling_lp(res.zform.Abar))
    out["scaling_lp"] = {"status": lp_s.status, "pivots": lp_s.pivots}
    if lp_s.status == "optimal":
        out["scaling_lp"]["optimum"] = fstr(lp_s.objective)
    out["two_step"] = fstr(res.d)
    agree = (
        lp_a.status == lp_s.status == "optimal"
        and lp_a.objective == lp_s.objective == res.d
    )
    out["agree"] = agree
    if not agree:
        out["diff"] = {
            "lp_A_minus_two_step": fstr(lp_a.objective - res.d) if lp_a.objective is not None else None,
            "scaling_lp_minus_two_step": fstr(lp_s.objective - res.d) if lp_s.objective is not None else None,
        }
    if args.decimal is not None:
        out["decimal"] = {"note": "non-authoritative", "two_step": approx(res.d, args.decimal)}
    pivots = {"lp_A": lp_a.pivots, "scaling_lp": lp_s.pivots, **res.to_json()["pivots"]}
    return out, pivots, EXIT_OK if agree else EXIT_MISMATCH


COMMANDS = {"check": cmd_check, "zform": cmd_zform, "scale": cmd_scale, "oracle": cmd_oracle}


def run_one(command, path, args):
    """Run one command on one input file; returns (report dict, payload, exit code)."""
    report = {"command": command, "input": str(path), "version": __version__}
    started = time.perf_counter()
    payload, code = None, EXIT_OK
    try:
        cap = _pivot_cap()
        A, digest = _read_matrix(path)
        report["input_sha256"] = digest
        failure = None if command == "check" else _precheck(A, args)
        if failure is not None:
            payload, code = failure, EXIT_P
        else:
            try:
                payload, pivots, code = COMMANDS[command](A, args, cap)
                report["pivots"] = pivots
            except MatrixFormatError:
                raise
            except PcanonError as exc:
                payload, code = _diagnose(A, exc, cap), _failure_code(exc)
    except (MatrixFormatError, ValueError) as exc:
        payload, code = {"error": str(exc), "stage": "input"}, EXIT_INPUT
    report["outputs"] = payload
    report["exit_status"] = code
    if args.timing:
        report["seconds"] = round(time.perf_counter() - started, 6)
    return report, payload, code


def _dump(obj):
    return json.dumps(obj, separators=(",", ":"), sort_keys=False) + "\n"


def _summary(report):
    out = report["outputs"] or {}
    cmd, code = report["command"], report["exit_status"]
    head = f"{report['input']}: {cmd}"
    if "error" in out:
        return f"{head} failed (exit {code}) at {out.get('stage')}: {out['error']}"
    if cmd == "check":
        if out["p_property"]:
            return f"{head} P-property holds, sign {out['sign']:+d} ({out['determinants']} bases)"
        return f"{head} P-property fails between selections {out['violation'][0]} and {out['violation'][1]}"
    if cmd == "zform" and "diagnostics" in out:
        diag = out["diagnostics"]
        return (f"{head} Z-form computed, but no MDP scaling exists "
                f"(failed at {diag['stage']}): {diag['error']}")
    if cmd == "zform":
        return f"{head} ok, pivots per row {out['pivots']['per_row']}"
    if cmd == "scale":
        return f"{head} d = {out['d']}, x = ({', '.join(out['x'])})"
    if cmd == "oracle":
        lp_a = out["lp_A"].get("optimum")
        lp_s = out["scaling_lp"].get("optimum")
        return f"{head} LP(A) = {lp_a}, scaling LP = {lp_s}, two-step = {out['two_step']}, agree = {out['agree']}"
    return head


def _job(packed):
    command, path, args = packed
    return run_one(command, path, args)


def _run_inputs(args):
    paths = args.inputs
    out_dir = None
    if args.out and len(paths) > 1:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(args.command, p, args) for p in paths]
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    worst = EXIT_OK
    for path, (report, payload, code) in zip(paths, results):
        if args.out and payload is not None:
            target = out_dir / f"{Path(path).stem}.{args.command}.json" if out_dir else Path(args.out)
            target.write_text(_dump(payload))
        if args.json:
            sys.stdout.write(_dump(report))
        else:
            print(_summary(report))
        worst = max(worst, code)
    return worst


def _cmd_gen(args):
    try:
        gamma = to_fraction(args.gamma)
        blocks = [int(b) for b in args.blocks.split(",")]
        m = args.m if args.m is not None else len(blocks)
        inst = gen_instance(m, blocks, gamma, args.seed, args.disguise, args.max_den)
    except (MatrixFormatError, ValueError) as exc:
        print(f"gen: {exc}", file=sys.stderr)
        return EXIT_INPUT
    instance, meta = inst.A.to_json(), inst.meta()
    if args.out:
        out = Path(args.out)
        out.write_text(_dump(instance))
        sidecar = out.with_name(out.name.removesuffix(".json") + ".meta.json")
        sidecar.write_text(_dump(meta))
        report = {"command": "gen", "version": __version__, "outputs": {
            "instance": str(out), "meta": str(sidecar), **meta}, "exit_status": EXIT_OK}
        if args.json:
            sys.stdout.write(_dump(report))
        else:
            print(f"wrote {out} and {sidecar}")
    else:
        sys.stdout.write(_dump({"instance": instance, "meta": meta}))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcanon",
        description="Complementary Z-form and optimal MDP scaling of generalized P-matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the result JSON here (a directory for several inputs)")
        p.add_argument("--json", action="store_true", help="print the full run report as JSON")
        p.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    helps = {
        "check": "P-property verdict by enumerating representative submatrices",
        "zform": "complementary Z-form Xbar and Abar = Xbar A",
        "scale": "two-step solve of LP(A) with dual certificates",
        "oracle": "cross-check two-step against a general exact LP solve",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("inputs", nargs="+", help="matrix JSON file(s)")
        common(p)
        p.add_argument("--jobs", type=int, default=1, help="process files in parallel")
        p.add_argument("--decimal", type=int, metavar="K", help="add K-digit decimal annotations")
        p.add_argument("--no-check", action="store_true",
                       help=f"skip the P-property pre-check (done only up to {PRECHECK_LIMIT} bases)")

    g = sub.add_parser("gen", help="seeded discounted-MDP test instance")
    g.add_argument("--m", type=int, help="number of rows (default: number of blocks)")
    g.add_argument("--blocks", required=True, help="comma-separated block sizes, e.g. 2,2,2")
    g.add_argument("--gamma", default="1/2", help="discount factor in [0, 1), e.g. 1/2")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--disguise", action="store_true", help="left-multiply by a random nonsingular M")
    g.add_argument("--max-den", type=int, default=100, help="bound on transition denominators")
    common(g)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return _cmd_gen(args)
    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    return _run_inputs(args)


if __name__ == "__main__":
    sys.exit(main())
