"""Command-line entry point.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines (keys are
the long flag names, dashes or underscores).  Explicit flags override the file.
Exit status: 0 success, 1 validation or parameter failure, 2 precision or
truncation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import kernels, murmur, petersson
from .arithcore import build_tables
from .errors import DomainError, MurmurError, PrecisionError

EXIT_OK, EXIT_INVALID, EXIT_PRECISION = 0, 1, 2

# checked after the config file is merged, so the file may supply them
_REQUIRED = {"kernel-check": ("K", "M"), "murmurate": ("K",)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INVALID)


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(",", " ").split()]


def read_config(path: str) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _common(p):
    p.add_argument("--config", help="key=value file; flags win on conflict")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--threads", type=int, help="worker threads (env MURMUR_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="murmurations", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("petersson-check", help="both sides of the trace formula on a grid")
    p.add_argument("--weights", type=_ints, default=[12, 16, 18, 20, 22, 24, 26, 28, 30])
    p.add_argument("--p-max", type=int, default=97)
    p.add_argument("--tol", type=float, default=1e-9)
    _common(p)

    p = sub.add_parser("kernel-check", help="weight-summation identities for V1 and V2")
    p.add_argument("--K", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-6)
    _common(p)

    p = sub.add_parser("decorrelate", help="Kloosterman-twisted prime sums over a range of c")
    p.add_argument("--c-min", type=int, default=1)
    p.add_argument("--c-max", type=int, default=30)
    p.add_argument("--x", type=float, default=1e6)
    _common(p)

    p = sub.add_parser("density", help="L(s) in two forms and the density nu(E)")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--B", type=float, default=4.0)
    p.add_argument("--s", type=_floats, default=[0.5, 1.0, 2.0])
    p.add_argument("--prime-cut", type=int, default=10 ** 5)
    p.add_argument("--term-cut", type=int, default=10 ** 6)
    p.add_argument("--q-cut", type=int, default=100_000)
    p.add_argument("--t-cut", type=int, default=20_000)
    p.add_argument("--tol", type=float, default=1e-3)
    _common(p)

    for name, text in (("murmurate", "one full ratio report"),
                       ("scan", "deviation trend over several K")):
        p = sub.add_parser(name, help=text)
        if name == "murmurate":
            p.add_argument("--K", type=float)
            p.add_argument("--M", type=float)
        else:
            p.add_argument("--Ks", type=_floats, default=[100.0, 200.0, 400.0])
        p.add_argument("--M-exponent", type=float, default=0.5,
                       help="M = round(K^e) when M is not given")
        p.add_argument("--A", type=float, default=1.0)
        p.add_argument("--B", type=float, default=2.0)
        p.add_argument("--tol", type=float, default=1e-10)
        _common(p)
    return parser


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        conf = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        given = {a.dest for a in sub._actions
                 for opt in a.option_strings if any(x == opt or x.startswith(opt + "=") for x in argv)}
        for key, raw in conf.items():
            if key not in known:
                raise DomainError(f"unknown config key {key!r}")
            if key in given or key == "config":
                continue
            act = known[key]
            setattr(args, key, act.type(raw) if act.type else raw)
    missing = [k for k in _REQUIRED.get(args.command, ()) if getattr(args, k) is None]
    if missing:
        raise DomainError("missing parameters: " + ", ".join("--" + k for k in missing))
    return args


def resolved_config(args) -> dict:
    """The parameters a report depends on; thread count and paths are excluded."""
    skip = {"config", "out", "format", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _validate(args) -> None:
    for key in ("K", "M", "A", "B", "x", "tol", "p_max"):
        v = getattr(args, key, None)
        if v is not None and not (math.isfinite(v) and v > 0):
            raise DomainError(f"{key} must be positive, got {v}")
    if hasattr(args, "A") and hasattr(args, "B") and not args.A < args.B:
        raise DomainError("need A < B")
    if args.command in ("murmurate", "kernel-check"):
        M = args.M if args.M is not None else round(args.K ** args.M_exponent)
        upper = 0.9 if args.command == "murmurate" else 1.0
        kernels.check_regime(args.K, M, 1 / 3, upper)
    if args.command == "scan":
        for K in args.Ks:
            kernels.check_regime(K, round(K ** args.M_exponent), 1 / 3, 0.9)


def _emit(rows: list[dict], args, fh) -> None:
    config = resolved_config(args)
    if args.format == "json":
        payload = {"schema_version": murmur.SCHEMA_VERSION, "command": args.command,
                   "config": config, "rows": rows}
        fh.write(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return
    fh.write(f"# schema_version={murmur.SCHEMA_VERSION} command={args.command}\n")
    fh.write(f"# config={json.dumps(config, sort_keys=True)}\n")
    if not rows:
        return
    w = csv.writer(fh, lineterminator="\n")
    cols = list(rows[0])
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else _jsonable(r[c]) for c in cols])


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return json.dumps(list(v))
    return v


def _petersson(args) -> tuple[list[dict], bool]:
    from .arithcore import simple_sieve
    rows, ok = [], True
    for k in args.weights:
        for p in simple_sieve(args.p_max):
            for b in (0, 1):
                r = petersson.compare(k, int(p), b, args.tol)
                ok &= not r.flagged
                rows.append(asdict(r))
    return rows, ok


def _kernel(args) -> tuple[list[dict], bool]:
    prof = kernels.make_profile(args.K, args.M)
    xs = np.linspace(args.K / 2, 2 * args.K, args.samples)
    res = kernels.prop_residuals(prof, xs)
    rows = [{"x": float(x), **{k: float(v[i]) for k, v in res.items()}} for i, x in enumerate(xs)]
    worst = max(max(r[k] for k in res) for r in rows)
    return rows, worst <= args.tol


def _decorrelate(args) -> tuple[list[dict], bool]:
    table = build_tables(int(args.x) + 1)
    rows = [asdict(murmur.decorrelation_sum(c, args.x, table))
            for c in range(args.c_min, args.c_max + 1)]
    return rows, True


def _density(args) -> tuple[list[dict], bool]:
    rows = []
    for s in args.s:
        v = murmur.L_series(s, args.prime_cut, args.term_cut)
        rows.append({"quantity": "L", "s": s, "first": v.dirichlet, "second": v.euler})
    res, vals = murmur.residue_probe(prime_cut=args.prime_cut)
    rows.append({"quantity": "residue", "s": 0.0, "first": res, "second": float(vals[-1])})
    nu = murmur.nu_density((args.A, args.B), args.q_cut, args.t_cut, tol=args.tol)
    rows.append({"quantity": "nu", "s": float("nan"), "first": nu.rational_form,
                 "second": nu.cosine_form})
    return rows, True


def _report_row(r: murmur.MurmurationReport) -> dict:
    d = asdict(r)
    d.pop("config")
    d["A"], d["B"] = d.pop("E")
    return d


def _murmurate(args) -> tuple[list[dict], bool]:
    M = args.M if args.M is not None else round(args.K ** args.M_exponent)
    r = murmur.murmuration_report(args.K, M, (args.A, args.B), args.tol, threads=args.threads)
    return [_report_row(r)], True


def _scan(args) -> tuple[list[dict], bool]:
    rows = []
    for K in args.Ks:
        M = round(K ** args.M_exponent)
        r = murmur.murmuration_report(K, M, (args.A, args.B), args.tol, threads=args.threads)
        rows.append(_report_row(r))
    return rows, True


_COMMANDS = {"petersson-check": _petersson, "kernel-check": _kernel,
             "decorrelate": _decorrelate, "density": _density,
             "murmurate": _murmurate, "scan": _scan}


def run(argv=None) -> int:
    """Run one subcommand and return its exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
        _validate(args)
        rows, ok = _COMMANDS[args.command](args)
    except SystemExit as e:
        return int(e.code or 0)
    except PrecisionError as e:
        print(f"precision failure: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except (MurmurError, ValueError) as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_INVALID
    buf = io.StringIO()
    _emit(rows, args, buf)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if not ok:
        print("validation failure: tolerance exceeded", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())
