"""Command-line interface: ``shapebg fit | true-pi0 | simulate``.

Only the result document goes to stdout; diagnostics go to stderr. Exit codes:
0 success, 2 input error, 3 numerical or solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import __version__
from .density import DEFAULT_GRID_POINTS, Sample
from .logconcave import DEFAULT_D, SolverFailure
from .pipeline import FitOptions, fit
from .simulate import ORACLE_POINTS, resolve_model, run_replications, true_decomposition

SCHEMA_VERSION = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
CURVES = ("f_hat", "h0", "g0", "h_l", "h_u")

log = logging.getLogger("shapebg")


class InputError(Exception):
    """Bad input file or arguments."""


def read_column(path: str) -> np.ndarray:
    """First column of a CSV file as floats; one non-numeric header row is allowed."""
    values = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or not row[0].strip():
                    continue
                cell = row[0].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    if lineno == 1:
                        continue
                    raise InputError(f"{path}:{lineno}: non-numeric value {cell!r}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not values:
        raise InputError(f"{path}: no numeric values found")
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: non-finite values are not allowed")
    return arr


def _curve(grid):
    return None if grid is None else grid.values.tolist()


def fit_document(result, alpha: float, n: int) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "shape": result.shape,
        "n": n,
        "alpha": alpha,
        "pi0": result.pi0,
        "pi_l": result.pi_l,
        "pi_u": result.pi_u,
        "bandwidth": result.bandwidth,
    }
    if result.shape == "symmetric":
        doc["center"] = result.center
    elif result.shape == "monotone":
        doc["support_start"] = result.center
    doc["grid"] = result.points.tolist()
    doc["f_hat"] = _curve(result.f_hat)
    doc["h0"] = _curve(result.decomposition.h0)
    doc["g0"] = _curve(result.decomposition.g0)
    doc["h_l"] = _curve(result.h_l)
    doc["h_u"] = _curve(result.h_u)
    return doc


def _write_curves_csv(doc: dict, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", *CURVES])
    columns = [doc["grid"]] + [doc[c] for c in CURVES]
    for row in zip(*columns):
        w.writerow([repr(float(x)) for x in row])


def _emit(doc: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def cmd_fit(args) -> int:
    values = read_column(args.data)
    start = args.support_start
    if args.shape == "monotone" and start is None and not args.support_search:
        start = 0.0
    if start is not None and args.shape == "monotone":
        below = values < start
        if np.any(below):
            raise InputError(f"value {float(values[np.argmax(below)])!r} lies below the support start "
                             f"{start!r}; pass --support-start")
    options = FitOptions(shape=args.shape, center=args.center, center_search=args.center_search,
                         support_start=start, support_search=args.support_search,
                         alpha=args.alpha, bootstrap=args.bootstrap, bandwidth=args.bandwidth,
                         grid_points=args.grid_points, d=args.d, objective=args.objective,
                         seed=args.seed)
    result = fit(Sample(values), options)
    doc = fit_document(result, args.alpha, values.shape[0])
    log.info("pi0 = %.4f, interval [%.4f, %.4f], bandwidth %.4g",
             result.pi0, result.pi_l, result.pi_u, result.bandwidth)
    if args.output == "csv":
        _write_curves_csv(doc, sys.stdout)
    else:
        _emit(doc)
    return 0


def cmd_true_pi0(args) -> int:
    spec = resolve_model(args.model)
    resolution = args.resolution or ORACLE_POINTS[args.shape]
    dec = true_decomposition(spec, args.shape, center=args.center,
                             center_search=args.center_search, resolution=resolution)
    doc = {"schema_version": SCHEMA_VERSION, "shape": args.shape, "pi0": dec.pi0,
           "resolution": resolution}
    if args.shape == "symmetric":
        doc["center"] = dec.center
    _emit(doc)
    return 0


def cmd_simulate(args) -> int:
    spec = resolve_model(args.model)
    summary = run_replications(spec, args.shape, args.n, args.reps, alpha=args.alpha,
                               seed=args.seed, center=args.center,
                               center_search=args.center_search,
                               intervals=not args.no_intervals, bootstrap=args.bootstrap,
                               d=args.d, objective=args.objective)
    doc = {"schema_version": SCHEMA_VERSION, "model": args.model, "n": args.n,
           "seed": args.seed, "alpha": args.alpha, **summary.to_dict()}
    print(summary.table(), file=sys.stderr)
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def _add_shape(p, center_default=None):
    p.add_argument("--shape", required=True, choices=["symmetric", "monotone", "logconcave"])
    p.add_argument("--center", type=float, default=center_default,
                   help="center of symmetry (default 0)")
    p.add_argument("--center-search", action="store_true",
                   help="pick the center maximizing pi0 among candidates")
    p.add_argument("--d", type=float, default=DEFAULT_D,
                   help="log-concave start offset below log f (default 0.02)")
    p.add_argument("--objective", choices=["exact", "riemann"], default="exact")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapebg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate the background component of a sample")
    p.add_argument("data", help="CSV file; the first column holds the observations")
    _add_shape(p)
    p.add_argument("--support-start", type=float, default=None,
                   help="lower end of the support for --shape monotone (default 0)")
    p.add_argument("--support-search", action="store_true",
                   help="pick the support start maximizing pi0 below the sample minimum")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap", type=int, default=500, help="bootstrap replicates")
    p.add_argument("--bandwidth", type=float, default=None, help="default: cross-validation")
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("true-pi0", help="background proportion of an exact mixture")
    p.add_argument("--model", required=True, help="built-in model name or JSON spec path")
    _add_shape(p, center_default=0.0)
    p.add_argument("--resolution", type=int, default=None, help="grid points")
    p.set_defaults(func=cmd_true_pi0)

    p = sub.add_parser("simulate", help="Monte Carlo study of the estimator")
    p.add_argument("--model", required=True, help="built-in model name or JSON spec path")
    _add_shape(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap", type=int, default=500)
    p.add_argument("--no-intervals", action="store_true", help="skip bands and intervals")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"shapebg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverFailure, FloatingPointError, ArithmeticError) as exc:
        print(f"shapebg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
