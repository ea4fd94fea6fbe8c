"""Command-line entry point.

Exit status: 0 on success, 2 on invalid input (one-line JSON error on stderr),
1 on internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bounds, constants, discriminants, modlab, primes, quadforms


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}."))
        return out
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        out = {}
        for i, v in enumerate(obj):
            out.update(_flatten(v, f"{prefix}{i}."))
        return out
    if isinstance(obj, list):
        obj = ";".join(map(str, obj))
    return {prefix[:-1]: obj}


def _emit(payload, fmt, out):
    if fmt == "json":
        out.write(json.dumps(payload) + "\n")
        return
    flat = _flatten(payload)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(flat.keys())
    w.writerow(repr(v) if isinstance(v, float) else ("" if v is None else v) for v in flat.values())


def cmd_table(args, out):
    wanted = set(range(1, args.n_max + 1)) | set(args.rows or [])
    top = max(wanted)
    rows = primes.series_rows(top, primes.first_primes(top, cap=args.prime_cap))
    rows = [r for r in rows if r.N in wanted]
    if args.format == "csv":
        out.write(primes.rows_to_csv(rows))
    else:
        out.write(primes.rows_to_json(rows) + "\n")


def cmd_disc(args, out):
    if args.kind == "tame":
        b = discriminants.minimal_tame_log_disc(args.p, args.n, exact=args.exact)
    else:
        b = discriminants.minimal_log_disc(args.p, args.n, exact=args.exact)
    rec = b.to_record(args.p, args.n)
    rec["kind"] = args.kind
    _emit(rec, args.format, out)


def cmd_constant(args, out):
    spec = bounds.TowerSpec(args.p, args.e, args.d_kappa, args.rho)
    cert = constants.tower_constant(spec, args.epsilon, args.r, cap=args.search_cap)
    payload = cert.to_dict()
    if args.raw_primes:
        payload["raw_primes"] = []
        for lv in cert.levels:
            params = constants.EpsilonParams(args.p, lv.d_k, args.epsilon, args.r)
            v, arg = constants.log_c_raw_primes(params, args.raw_primes)
            payload["raw_primes"].append({"i": lv.i, "value": v, "argmax": arg, "n_max": args.raw_primes})
    _emit(payload, args.format, out)


def cmd_bounds(args, out):
    spec = bounds.TowerSpec(args.p, args.e, args.d_kappa, args.rho, tuple(args.tame or ()),
                            leopoldt_assumed=not args.no_leopoldt)
    rep = bounds.tower_report(spec, args.r, seed_A=args.seed_a, seed_T=args.seed_t)
    _emit(rep.to_dict(), args.format, out)


def cmd_check(args, out):
    res = bounds.check_epsilon_certificate(args.log_order, args.log_disc, args.log_C, args.epsilon)
    _emit({"holds": res.holds, "margin": res.margin}, args.format, out)


def _exhaustive_one(job):
    p, lengths, r_max, cap = job
    return [{"lengths": list(lengths), "check": f}
            for f in modlab.check_module(modlab.CyclotomicModule(p, lengths), r_max, cap)]


def cmd_modlab(args, out):
    if args.action == "exhaustive":
        jobs = [(args.p, ls, args.r_max, args.enum_cap)
                for ls in modlab.length_multisets(args.max_len, args.max_s)]
        if args.threads > 1:
            with ProcessPoolExecutor(args.threads) as ex:
                results = list(ex.map(_exhaustive_one, jobs))
        else:
            results = [_exhaustive_one(j) for j in jobs]
        payload = {"p": args.p, "max_len": args.max_len, "max_s": args.max_s, "r_max": args.r_max,
                   "modules": len(jobs), "violations": [v for r in results for v in r]}
    else:
        if not args.lengths:
            raise UsageError("--lengths is required")
        payload = modlab.modlab_report(args.p, args.lengths, args.mode, args.r, cap=args.enum_cap)
    _emit(payload, args.format, out)


def cmd_quad(args, out):
    if args.action == "scan":
        if args.log_c is None:
            spec = bounds.TowerSpec(2, 1, 1, 0)
            log_c = constants.tower_constant(spec, args.epsilon).log_C_total
        else:
            log_c = args.log_c
        res = quadforms.epsilon_scan(-args.max, -1, args.epsilon, log_c, cap=args.disc_cap)
        _emit(res.to_dict(), args.format, out)
    elif args.action == "genus":
        if args.max > args.disc_cap:
            raise primes.CapExceeded(f"|D| = {args.max} exceeds cap {args.disc_cap}")
        scan = quadforms.genus_scan(args.max)
        if args.format == "csv":
            out.write(scan.to_csv())
        else:
            _emit({"max": args.max, "count": len(scan.rows),
                   "failures": [r[0] for r in scan.failures]}, "json", out)
    else:
        if args.disc is None:
            raise UsageError("--disc is required")
        G = quadforms.class_group(args.disc, cap=args.disc_cap)
        payload = G.to_dict()
        g = quadforms.genus_check(args.disc, G)
        payload.update({"t": g.predicted + 1, "ambiguous": g.ambiguous, "genus_pass": g.passed})
        _emit(payload, args.format, out)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    parser = _Parser(prog="epsrank", description=__doc__)
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table", parents=[common], help="prime-log series table")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--rows", type=_int_list, help="extra row indices, e.g. 99,100,10000")
    p.add_argument("--prime-cap", type=int, default=primes.DEFAULT_PRIME_CAP)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("disc", parents=[common], help="minimal relative discriminant bounds")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=("minimal", "tame"), default="minimal")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("constant", parents=[common], help="epsilon-constant certificate for a tower")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d-kappa", type=int, default=1)
    p.add_argument("--rho", type=int, default=0)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--search-cap", type=int, default=constants.SEARCH_CAP)
    p.add_argument("--raw-primes", type=int, metavar="N_MAX", default=0,
                   help="also report the prime-sum variant over N <= N_MAX")
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("bounds", parents=[common], help="rank-bound recursion along a tower")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--d-kappa", type=int, default=1)
    p.add_argument("--rho", type=int, default=0)
    p.add_argument("--tame", type=_int_list, default=None)
    p.add_argument("--r", type=_int_list, default=[1])
    p.add_argument("--seed-a", type=int, default=None)
    p.add_argument("--seed-t", type=int, default=None)
    p.add_argument("--no-leopoldt", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check", parents=[common], help="check #G <= C sqrt(D)^eps in logs")
    p.add_argument("--log-order", type=float, required=True)
    p.add_argument("--log-disc", type=float, required=True)
    p.add_argument("--log-C", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("modlab", parents=[common], help="cyclotomic module filtrations")
    p.add_argument("action", nargs="?", choices=("exhaustive",))
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--lengths", type=_int_list)
    p.add_argument("--mode", choices=("structural", "bruteforce", "both"), default="both")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--max-s", type=int, default=2)
    p.add_argument("--r-max", type=int, default=1)
    p.add_argument("--enum-cap", type=int, default=modlab.ENUM_CAP)
    p.set_defaults(func=cmd_modlab)

    p = sub.add_parser("quad", parents=[common], help="imaginary quadratic class groups")
    p.add_argument("action", nargs="?", choices=("scan", "genus"))
    p.add_argument("--disc", type=int)
    p.add_argument("--max", type=int, default=10**5)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--log-c", type=float, default=None)
    p.add_argument("--disc-cap", type=int, default=quadforms.DISC_CAP)
    p.set_defaults(func=cmd_quad)
    return parser


def _validate(args):
    for name in ("epsilon",):
        v = getattr(args, name, None)
        if v is not None and not (math.isfinite(v) and v > 0):
            raise UsageError(f"--{name} must be a positive finite number")
    if args.command == "table" and args.n_max < 1:
        raise UsageError("--n-max must be >= 1")


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        buf = io.StringIO()
        args.func(args, buf)
    except (UsageError, ValueError, IndexError, primes.CapExceeded) as exc:
        kind = type(exc).__name__
        err.write(json.dumps({"error": str(exc).splitlines()[0] if str(exc) else kind, "kind": kind}) + "\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        err.write(json.dumps({"error": str(exc), "kind": "internal"}) + "\n")
        return 1
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
