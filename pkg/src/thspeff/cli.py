"""Command-line interface.

Subcommands:

``figure ID``      write one CSV per curve of a figure
``curve NAME``     evaluate one formula on a grid
``ensemble``       sample a spreading matrix and print it or its spectrum
``validate SUITE`` run self-checks, print JSON lines

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, capacity, figures, validation
from .ensembles import EnsembleSpec, nonzero_positions, sample
from .errors import DomainError, NumericalError
from .spectra import summarize

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return "none"
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _header(command: str, params: dict, extra: dict | None = None) -> list[str]:
    lines = [f"# thspeff {__version__}", f"# command: {command}"]
    lines += [f"# {k}: {_fmt(v)}" for k, v in sorted(params.items())]
    if extra:
        lines += [f"# {k}: {_fmt(v)}" for k, v in sorted(extra.items())]
    return lines


def render_csv(header: list[str], columns: list[str], rows) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str):
    """Write through a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_csv(curve: figures.Curve, command: str, params: dict) -> str:
    r = curve.result
    meta = {f"meta.{k}": v for k, v in r.metadata.items()}
    extra = {"curve": curve.name, "x": curve.x_label, "y": curve.y_label,
             **{f"curve.{k}": v for k, v in curve.params.items()}, **meta}
    if r.empirical:
        cols = ["x", "y", "std", "stderr", "trials"]
        rows = zip(r.x, r.mean, r.std, r.stderr, r.trials)
    else:
        cols = ["x", "y"]
        rows = zip(r.x, r.mean)
    return render_csv(_header(command, params, extra), cols, rows)


def parse_grid(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError("--grid needs lo <= hi and step > 0")
    return lo, hi, step


def _add_common(p):
    p.add_argument("--beta", type=float, help="load K/N")
    p.add_argument("--ns", type=int, help="pulses per symbol")
    p.add_argument("--n", type=int, help="chips per symbol (Monte Carlo)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials (or samples)")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    p.add_argument("--grid", type=parse_grid, help="lo:hi:step")
    p.add_argument("--out", help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thspeff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"thspeff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("figure", help="write the curves of one figure as CSV files")
    p.add_argument("id", choices=list(figures.FIGURES))
    _add_common(p)
    p.add_argument("--ebn0-db", type=float, help="fixed Eb/N0 for load sweeps")

    p = sub.add_parser("curve", help="evaluate one formula")
    p.add_argument("name", choices=sorted(capacity.FORMULAS))
    _add_common(p)
    p.add_argument("--gamma", type=float, help="per-user SNR (linear)")
    p.add_argument("--ebn0-db", type=float, help="energy per bit over noise (dB)")
    p.add_argument("--axis", choices=("gamma_db", "ebn0_db", "beta"),
                   help="what --grid sweeps (default ebn0_db)")

    p = sub.add_parser("ensemble", help="sample one spreading matrix")
    p.add_argument("--kind", choices=("TH", "DS"), default="TH")
    p.add_argument("--k", type=int, help="number of users (overrides --beta)")
    p.add_argument("--show", choices=("matrix", "positions", "spectrum"), default="spectrum")
    _add_common(p)

    p = sub.add_parser("validate", help="run self-check suites")
    p.add_argument("suite", choices=list(validation.SUITES) + ["all"])
    p.add_argument("--out", help="write the JSON-lines report here instead of stdout")
    return parser


def _emit(text: str, out: str | None):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_figure(args) -> int:
    cfg = figures.FigureConfig(beta=args.beta, ns=args.ns, n=args.n, trials=args.trials,
                               seed=args.seed, grid=args.grid, ebn0_db=args.ebn0_db)
    params = {"figure": args.id, "beta": args.beta, "ns": args.ns, "n": args.n,
              "trials": args.trials, "seed": args.seed, "grid": args.grid,
              "ebn0_db": args.ebn0_db}
    curves = figures.build(args.id, cfg)
    out_dir = args.out or "."
    for c in curves:
        path = os.path.join(out_dir, f"fig{args.id}_{c.name}.csv")
        write_atomic(path, curve_csv(c, f"figure {args.id}", params))
        print(path)
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.beta is None:
        raise UsageError("curve needs --beta")
    f = capacity.resolve(args.name, args.ns)
    beta = args.beta
    params = {"formula": args.name, "beta": beta, "ns": args.ns, "gamma": args.gamma,
              "ebn0_db": args.ebn0_db, "grid": args.grid, "axis": args.axis}
    if args.grid is not None:
        values = figures.grid_values(*args.grid)
        axis = args.axis or "ebn0_db"
    elif args.gamma is not None:
        values, axis = np.array([args.gamma]), "gamma"
    elif args.ebn0_db is not None:
        values, axis = np.array([args.ebn0_db]), "ebn0_db"
    else:
        raise UsageError("curve needs one of --gamma, --ebn0-db or --grid")

    rows = []
    if axis == "gamma":
        rows = [(g, f(beta, float(g))) for g in values]
        cols = ["gamma", "y"]
    elif axis == "gamma_db":
        rows = [(g, f(beta, 10 ** (float(g) / 10))) for g in values]
        cols = ["gamma_db", "y"]
    elif axis == "ebn0_db":
        for e in values:
            g = capacity.gamma_at_ebn0(args.name, beta, float(e), args.ns)
            rows.append((e, g, 0.0 if g == 0 else f(beta, g)))
        cols = ["ebn0_db", "gamma", "y"]
    else:
        if (args.gamma is None) == (args.ebn0_db is None):
            raise UsageError("a load sweep needs exactly one of --gamma or --ebn0-db")
        for b in values:
            b = float(b)
            if args.gamma is not None:
                rows.append((b, f(b, args.gamma)))
            else:
                rows.append((b, capacity.capacity_at_ebn0(args.name, b, args.ebn0_db, args.ns)))
        cols = ["beta", "y"]
    extra = {"kind": "analytic", "y": "C or I (b/s/Hz)"}
    _emit(render_csv(_header(f"curve {args.name}", params, extra), cols, rows), args.out)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    N = args.n or 8
    if args.k is not None:
        K = args.k
    else:
        K = max(1, int(round((args.beta or 1.0) * N)))
    Ns = N if args.kind == "DS" else (args.ns or 1)
    spec = EnsembleSpec(args.kind, N, K, Ns, args.seed)
    m = sample(spec)
    params = {"kind": args.kind, "n": N, "k": K, "ns": Ns, "seed": args.seed, "show": args.show}
    header = _header("ensemble", params)
    if args.show == "matrix":
        S = m.entries
        text = render_csv(header, [f"s{k}" for k in range(K)], S.tolist())
    elif args.show == "positions":
        rows = [(k, b, slot, sign) for k, col in enumerate(nonzero_positions(m))
                for b, slot, sign in col]
        text = render_csv(header, ["user", "block", "slot", "sign"], rows)
    else:
        s = summarize(m)
        extra = {"normalized_rank": s.normalized_rank,
                 "moments": tuple(s.moments)}
        text = render_csv(_header("ensemble", params, extra), ["eigenvalue"],
                          [(v,) for v in s.eigenvalues])
    _emit(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    lines, ok = [], True
    for suite, check in validation.run_suite(args.suite):
        record = {"suite": suite, **check.to_dict()}
        ok &= check.passed
        line = json.dumps(record, sort_keys=True)
        lines.append(line)
        if not args.out:
            print(line, flush=True)
    if args.out:
        write_atomic(args.out, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {"figure": cmd_figure, "curve": cmd_curve, "ensemble": cmd_ensemble,
            "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        seed = getattr(args, "seed", None)
        if seed is not None and not 0 <= seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"thspeff: domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"thspeff: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"thspeff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"thspeff: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
