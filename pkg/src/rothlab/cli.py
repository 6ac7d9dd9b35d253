"""Command-line entry point: ``rothlab <command> ...``.

Exit codes: 0 success, 1 negative answer (set has a 3AP, no increment),
2 malformed input or arguments, 3 certificate violation, 4 capacity or
overflow, 5 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import certify, correlation, increment, iterate, sets
from .certify import format_rational
from .errors import BudgetExceeded, CapacityError
from .modring import choose_modulus

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_VIOLATION, EXIT_CAPACITY, EXIT_BUDGET = range(6)


class UsageError(Exception):
    pass


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _load(path) -> sets.DenseSet:
    try:
        return sets.DenseSet.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}")


def _emit(args, payload, human_lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


def cmd_gen(args):
    if args.kind == "random":
        if args.alpha is None:
            raise UsageError("--alpha is required for --kind random")
        if not 0 <= args.alpha <= 1:
            raise UsageError("--alpha must lie in [0, 1]")
    if args.n < (2 if args.kind == "behrend" else 1):
        raise UsageError(f"--n too small for kind {args.kind}")
    if args.kind == "greedy":
        A = sets.greedy_free(args.n)
    elif args.kind == "behrend":
        A = sets.behrend(args.n)
    else:
        A = sets.random_subset(args.n, args.alpha, args.seed)
    if args.out:
        A.save(args.out)
    else:
        print(A.to_json())
    summary = {"n": A.n, "size": A.size, "density": format_rational(A.density)}
    out = sys.stdout if args.out else sys.stderr
    if args.json and args.out:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"size {A.size}, density {format_rational(A.density)} ({float(A.density):.6f})", file=out)
    return EXIT_OK


def cmd_check(args):
    A = _load(args.file)
    report = sets.is_3ap_free(A)
    payload = {"free": report.free, "witness": list(report.witness) if report.witness else None}
    lines = ["3AP-free" if report.free else f"not 3AP-free: witness {report.witness}"]
    _emit(args, payload, lines)
    return EXIT_OK if report.free else EXIT_NO


def cmd_verify(args):
    A = _load(args.file)
    config = certify.VerifyConfig(
        ells=tuple(args.ell) if args.ell else (1, 2, 3),
        positivity_samples=args.samples,
        seed=args.seed,
        threads=args.threads,
    )
    cert = certify.verify_all(A, config)
    lines = [f"N={cert.n} m={cert.m} free={cert.freeness.free}"]
    for r in cert.reports:
        lines.append(f"{'PASS' if r.holds else 'FAIL'}  {r.name}  margin={format_rational(r.margin)}")
    lines.append("all certificates pass" if cert.passed else f"{len(cert.failures)} violation(s)")
    _emit(args, cert.to_dict(), lines)
    return EXIT_OK if cert.passed else EXIT_VIOLATION


def cmd_analyze(args):
    A = _load(args.file)
    ctx = choose_modulus(A.n)
    p = correlation.balanced_profile(A, ctx)
    corr = correlation.autocorrelation(p, args.threads)
    e = correlation.energy(corr)
    beta_hat = Fraction(e.evalue, e.scale * ctx.m ** 3)
    payload = {
        "n": A.n,
        "size": A.size,
        "alpha": format_rational(A.density),
        "m": ctx.m,
        "energy_scaled": e.evalue,
        "energy_scale": e.scale,
        "beta_hat": format_rational(beta_hat),
    }
    lines = [
        f"N = {A.n}, |A| = {A.size}, alpha = {format_rational(A.density)}",
        f"m = {ctx.m}",
        f"scaled energy N^4 E(f) = {e.evalue}",
        f"beta_hat = E(f)/m^3 = {format_rational(beta_hat)} ({float(beta_hat):.6e})",
    ]
    if args.dump_r:
        with open(args.dump_r, "w", newline="") as fh:
            correlation.dump_profile_csv(fh, "t", "R_scaled", corr.rvals.tolist())
    if args.dump_v or args.ell:
        ell = args.ell or 1
        if not 2 * ell < ctx.m:
            raise UsageError(f"--ell must satisfy 1 <= ell < m/2 (m = {ctx.m})")
        vp = correlation.v_profile(p, ell, corr, args.threads)
        payload["ell"] = ell
        payload["v_zero"] = int(vp[0])
        lines.append(f"ell = {ell}: V_0 scaled = {int(vp[0])}, max nonzero-step V scaled = {int(max(vp[1:].tolist()))}")
        if args.dump_v:
            with open(args.dump_v, "w", newline="") as fh:
                correlation.dump_profile_csv(fh, "d", "V_scaled", vp.tolist())
    _emit(args, payload, lines)
    return EXIT_OK


def _increment_config(args, default_mode):
    try:
        return increment.IncrementConfig(
            mode=args.mode or default_mode,
            c_ell=args.c_ell,
            c_K=args.c_k,
            ell_override=args.ell,
            min_len=args.min_len,
            seed=args.seed,
            threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_increment(args):
    A = _load(args.file)
    cfg = _increment_config(args, "certified")
    try:
        result = increment.density_increment(A, choose_modulus(A.n), cfg)
    except increment.IncrementError as exc:
        payload = {"error": type(exc).__name__, "detail": str(exc)}
        _emit(args, payload, [f"{type(exc).__name__}: {exc}"])
        return EXIT_NO
    payload = result.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True) + "\n")
    P = result.P
    lines = [
        f"mode {result.mode}: step d={result.d}, start x={result.x}, ell={result.ell}, q={result.q}, s={result.s}",
        f"P = {P.a} + {P.s}*i for i < {P.L}",
        f"density {format_rational(result.alpha)} -> {format_rational(result.new_density)}",
        f"certificates: {'all hold' if result.certified else 'VIOLATED'}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if result.certified else EXIT_VIOLATION


def cmd_iterate(args):
    A = _load(args.file)
    cfg = _increment_config(args, "greedy")
    traj = iterate.run(A, cfg, max_steps=args.max_steps, min_n=args.min_n)
    if args.out:
        Path(args.out).write_text(traj.to_json() + "\n")
    if args.csv:
        Path(args.csv).write_text(traj.to_csv())
    lines = [f"j={s.j} N={s.n} alpha={format_rational(s.alpha)}" for s in traj.stages]
    lines.append(f"stop: {traj.stop_reason}" + (f" ({traj.detail})" if traj.detail else ""))
    if traj.witness:
        lines.append(f"witness {traj.witness}")
    _emit(args, traj.to_dict(), lines)
    return EXIT_OK


def cmd_r3(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    size, witness = sets.r3_exact(args.n, max_n=args.max_n)
    payload = {"n": args.n, "r3": size, "elements": list(witness.members)}
    _emit(args, payload, [f"r3({args.n}) = {size}", f"witness {list(witness.members)}"])
    return EXIT_OK


def cmd_bound(args):
    try:
        rep = iterate.bound_report(args.n, args.alpha, args.C, args.c0, args.rows)
    except ValueError as exc:
        raise UsageError(str(exc))
    payload = {
        "N": rep.N, "alpha": rep.alpha, "C": rep.C, "c0": rep.c0, "threshold": rep.threshold,
        "within_bound": rep.within_bound, "steps": rep.steps, "rows": rep.rows, "truncated": rep.truncated,
    }
    _emit(args, payload, rep.lines())
    return EXIT_OK


def cmd_bench(args):
    if args.n < 1 or args.reps < 1:
        raise UsageError("--n and --reps must be positive")
    A = sets.random_subset(args.n, Fraction(1, 2), args.seed)
    ctx = choose_modulus(args.n)
    p = correlation.balanced_profile(A, ctx)
    ell = min(args.ell, (ctx.m - 1) // 2)
    threads = args.threads or [correlation.resolve_threads(None)]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["kernel", "n", "m", "threads", "rep", "seconds"])
        for k in threads:
            for rep in range(args.reps):
                t0 = time.perf_counter()
                corr = correlation.autocorrelation(p, k)
                writer.writerow(["autocorrelation", args.n, ctx.m, k, rep, f"{time.perf_counter() - t0:.6f}"])
            for rep in range(args.reps):
                t0 = time.perf_counter()
                correlation.v_profile(p, ell, corr, k)
                writer.writerow(["v_profile", args.n, ctx.m, k, rep, f"{time.perf_counter() - t0:.6f}"])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rothlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, file_arg=True, threads=True):
        sp = sub.add_parser(name, help=help_text)
        if file_arg:
            sp.add_argument("file", help='set file {"n": ..., "elements": [...]}')
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if threads:
            sp.add_argument("--threads", type=int, default=None,
                            help="cap on worker threads (default: $ROTHLAB_THREADS or 1)")
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "generate a set file", file_arg=False)
    sp.add_argument("--kind", choices=["greedy", "behrend", "random"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=_fraction)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    add("check", cmd_check, "test a set for 3-term progressions")

    sp = add("verify", cmd_verify, "run every certificate on a set")
    sp.add_argument("--ell", type=int, action="append", help="window length (repeatable)")
    sp.add_argument("--samples", type=int, default=64, help="random (h, k) pairs when m is large")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("analyze", cmd_analyze, "density, modulus, energy, window moments")
    sp.add_argument("--ell", type=int)
    sp.add_argument("--dump-r", help="write t,R_scaled CSV")
    sp.add_argument("--dump-v", help="write d,V_scaled CSV")

    for name, func, help_text in (
        ("increment", cmd_increment, "one density-increment step"),
        ("iterate", cmd_iterate, "iterate the increment"),
    ):
        sp = add(name, func, help_text)
        sp.add_argument("--mode", choices=list(increment.MODES))
        sp.add_argument("--c-ell", type=_fraction, default=Fraction(1, 64))
        sp.add_argument("--c-k", type=_fraction, default=Fraction(1, 20))
        sp.add_argument("--ell", type=int, help="explicit window length")
        sp.add_argument("--min-len", type=int, default=3)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write full JSON result")
    sp.add_argument("--max-steps", type=int, default=32)
    sp.add_argument("--min-n", type=int, default=8)
    sp.add_argument("--csv", help="write the trajectory CSV summary")

    sp = add("r3", cmd_r3, "exact r3(n) by branch and bound", file_arg=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--max-n", type=int, default=sets.R3_MAX_N)

    sp = add("bound", cmd_bound, "display the double-logarithmic bound", file_arg=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=_fraction, required=True)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--c0", type=float, default=1.0)
    sp.add_argument("--rows", type=int, default=64)

    sp = add("bench", cmd_bench, "time the correlation kernels", file_arg=False, threads=False)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--ell", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, action="append", dest="threads",
                    help="thread count to time (repeatable)")
    sp.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        threads = args.threads if isinstance(args.threads, list) else [args.threads]
        if any(t is not None and t < 1 for t in threads):
            parser.error("--threads must be at least 1")
    except SystemExit as exc:
        # argparse exits 2 on bad arguments and 0 after --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rothlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"rothlab: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except BudgetExceeded as exc:
        print(f"rothlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
