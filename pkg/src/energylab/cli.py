"""Command line interface: ``energylab <subcommand> [options]``.

Exit codes: 0 success, 1 usage or input-file error, 2 domain, pole or
numerical failure.
"""
import argparse
import csv
import json
import math
import sys

from . import energy as en
from . import harness as hs
from . import optimize as opt
from . import theory
from .exceptions import DomainError, EnergyLabError, ParseError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dump(obj, fh):
    fh.write(json.dumps(obj, indent=2) + "\n")


def _kind(args):
    if args.kind == "log":
        if args.s is not None:
            raise UsageError("--s is only valid with --kind riesz")
        return en.EnergyKind.log()
    if args.s is None:
        raise UsageError("--kind riesz requires --s")
    return en.EnergyKind.riesz(args.s)


def _threads(args):
    return args.threads if args.threads is not None else opt.default_threads()


def _open_out(args):
    return open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout


def _print_rows(rows, header, fh):
    widths = [max(len(h), 12) for h in header]
    fh.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
    for row in rows:
        cells = [f"{v:.12g}" if isinstance(v, float) else str(v) for v in row]
        fh.write("  ".join(c.rjust(w) for c, w in zip(cells, widths)) + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_constants(args):
    if args.list:
        for name in sorted(theory.CONSTANTS):
            entry = theory.CONSTANTS[name]
            params = ",".join(entry["params"]) or "-"
            sys.stdout.write(f"{name:16s} params={params:6s} domain: {entry['domain']}\n")
        return EXIT_OK
    if args.name is None:
        raise UsageError("constants: --name is required (or use --list)")
    entry = theory.CONSTANTS.get(args.name)
    if entry is None:
        raise UsageError(f"constants: unknown name {args.name!r}; see --list")
    missing = [p for p in entry["params"] if getattr(args, p) is None]
    if missing:
        raise UsageError(f"constants: {args.name} needs " + ", ".join(f"--{p}" for p in missing))
    const = theory.get_constant(args.name, s=args.s, d=args.d, k=args.k)
    _dump(const.as_dict(), sys.stdout)
    return EXIT_OK


def cmd_optimize(args):
    kind = _kind(args)
    settings = opt.OptimizerSettings(
        max_iters=args.max_iters, grad_tol=args.tol, restarts=args.restarts,
        seed=args.seed, threads=_threads(args),
    )
    res = opt.multistart(args.N, args.d, kind, settings)
    if args.out:
        en.write_configuration(args.out, res.config)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iter", "energy", "gradnorm"])
            for it, e, g in res.trace:
                writer.writerow([it, repr(e), repr(g)])
    info = {
        "N": args.N, "d": args.d, "kind": kind.tag, "s": kind.s, "energy": res.energy,
        "iterations": res.iterations, "grad_norm": res.grad_norm,
        "restart_index": res.restart_index, "converged": res.converged,
    }
    if args.json:
        _dump(info, sys.stdout)
    else:
        for key, value in info.items():
            sys.stdout.write(f"{key}: {value}\n")
    return EXIT_OK


def cmd_circle(args):
    if args.log:
        exact = en.circle_exact_log(args.N)
        info = {"N": args.N, "kind": "log", "exact": exact, "closed_form": -args.N * math.log(args.N)}
    else:
        if args.s is None:
            raise UsageError("circle: give --s or --log")
        exact = en.circle_exact(args.s, args.N)
        info = {"N": args.N, "s": args.s, "exact": exact}
        if args.compare:
            approx = en.circle_expansion(args.s, args.N, args.p)
            rel = abs(exact - approx) / abs(exact)
            info.update(
                p=args.p, expansion=approx, abs_error=abs(exact - approx), rel_error=rel,
                digits=(None if rel == 0 else -math.log10(rel)),
                remainder_exponent=en.circle_remainder_exponent(args.s, args.p),
            )
    if args.json:
        _dump(info, sys.stdout)
    else:
        for key, value in info.items():
            sys.stdout.write(f"{key}: {value}\n")
    return EXIT_OK


def _table_from_args(args):
    kind = _kind(args)
    if args.table:
        return hs.ingest_table(args.table, kind, args.d)
    if args.config:
        rows = []
        for path in args.config:
            x = en.read_configuration(path)
            if x.shape[1] != args.d + 1:
                raise DomainError(f"{path} holds points on S^{x.shape[1] - 1}, expected S^{args.d}")
            rows.append(hs.TableRow(x.shape[0], en.energy(x, kind)))
        rows.sort(key=lambda r: r.n)
        return hs.EnergyTable(kind, args.d, rows)
    raise UsageError("give --table CSV or --config FILE [FILE ...]")


def cmd_remainder(args):
    table = _table_from_args(args)
    rems = hs.remainders(table)
    limit = hs.conjectured_limit(table.kind, table.d)
    if args.out:
        json_path = hs.report(table, args.out)
        sys.stderr.write(f"wrote {args.out} and {json_path}\n")
    if args.json:
        _dump(hs.summary(table), sys.stdout)
    else:
        lim = "" if limit is None else limit.value
        _print_rows([(r.n, r.energy, rem, lim) for r, (_, rem) in zip(table.rows, rems)],
                    ["N", "energy", "remainder", "conjectured_limit"], sys.stdout)
    return EXIT_OK


def cmd_fit(args):
    table = _table_from_args(args).select(args.nmin, args.nmax)
    fit = hs.fit_constants(table, args.model, args.norm)
    if args.json:
        _dump(fit.as_dict(), sys.stdout)
    else:
        sys.stdout.write(f"model {fit.model} ({fit.norm}) over {fit.n_rows} rows\n")
        for name, value in fit.coefficients.items():
            sys.stdout.write(f"{name}: {value!r}\n")
        sys.stdout.write(f"residual_l1: {fit.residual_l1!r}\nresidual_l2: {fit.residual_l2!r}\n")
    return EXIT_OK


def cmd_verify(args):
    table = _table_from_args(args)
    rep = hs.verify_bounds(table)
    if args.json:
        _dump(rep.as_dict(), sys.stdout)
    else:
        rows = []
        for c in rep.checks:
            status = "HARD" if c.hard else ("upper" if c.upper_violated else ("lower" if c.lower_violated else "ok"))
            rows.append((c.bound, c.n, c.value, "" if c.lower is None else c.lower,
                         "" if c.upper is None else c.upper, status))
        _print_rows(rows, ["bound", "N", "value", "lower", "upper", "status"], sys.stdout)
        sys.stdout.write(f"hard violations: {len(rep.hard_violations)}\n")
    return EXIT_OK


def cmd_berezin(args):
    value = hs.berezin_estimate(args.s, args.N, args.shells)
    info = {"s": args.s, "N": args.N, "shells": args.shells, "estimate": value}
    if args.json:
        _dump(info, sys.stdout)
    else:
        sys.stdout.write(f"estimate: {value!r}\n")
    return EXIT_OK


def cmd_histogram(args):
    x = en.read_configuration(args.config)
    hist = en.distance_histogram(x, args.bins, args.dmax)
    fh = _open_out(args)
    try:
        if args.json:
            _dump({"bins": [list(r) for r in hist.rows()], "reference": list(hist.reference)}, fh)
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in hist.rows():
                writer.writerow([repr(lo), repr(hi), c])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_kind(p, d_default=2):
    p.add_argument("--kind", choices=("log", "riesz"), default="log")
    p.add_argument("--s", type=float, help="Riesz exponent (with --kind riesz)")
    p.add_argument("--d", type=int, default=d_default, help="sphere dimension")


def _add_table_source(p):
    p.add_argument("--table", help="CSV with header N,energy")
    p.add_argument("--config", nargs="+", help="configuration file(s) written by optimize --out")


def build_parser():
    parser = _Parser(prog="energylab", description="Riesz and log energies on spheres.")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $ENERGY_LAB_THREADS or 1)")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("constants", help="evaluate a named constant")
    p.add_argument("--name")
    p.add_argument("--s", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("optimize", help="multistart energy optimization")
    p.add_argument("--N", type=int, required=True)
    _add_kind(p)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9, help="gradient sup-norm tolerance")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--out", help="write the configuration here")
    p.add_argument("--trace", help="write iter,energy,gradnorm CSV here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("circle", help="exact circle energies and their expansion")
    p.add_argument("--s", type=float)
    p.add_argument("--log", action="store_true")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--compare", action="store_true")
    p.set_defaults(func=cmd_circle)

    p = sub.add_parser("remainder", help="next-order remainder sequence")
    _add_kind(p)
    _add_table_source(p)
    p.add_argument("--out", help="write report CSV (and .json summary)")
    p.set_defaults(func=cmd_remainder)

    p = sub.add_parser("fit", help="fit next-order constants")
    _add_kind(p)
    _add_table_source(p)
    p.add_argument("--model", choices=hs.FIT_MODELS, default="C")
    p.add_argument("--norm", choices=("l1", "l2"), default="l1")
    p.add_argument("--nmin", type=int)
    p.add_argument("--nmax", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="check rows against known bounds")
    _add_kind(p)
    _add_table_source(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("berezin", help="semicontinuum energy estimate on S^2")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--shells", type=int, default=hs.BEREZIN_MAX_SHELLS)
    p.set_defaults(func=cmd_berezin)

    p = sub.add_parser("histogram", help="pair-distance histogram of a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--dmax", type=float, default=2.0)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_histogram)
    return parser


def _global_flags(argv):
    # Allow --json/--threads after the subcommand as well as before it.
    argv = list(argv)
    front = []
    i = 0
    while i < len(argv):
        if argv[i] == "--json":
            front.append(argv.pop(i))
        elif argv[i] == "--threads" and i + 1 < len(argv):
            front += [argv.pop(i), argv.pop(i)]
        elif argv[i].startswith("--threads="):
            front.append(argv.pop(i))
        else:
            i += 1
    return front + argv


def run(argv=None):
    """Parse ``argv`` and execute; returns the exit code."""
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(_global_flags(argv))
        if args.command is None:
            raise UsageError("energylab: a subcommand is required")
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_USAGE
    except EnergyLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
