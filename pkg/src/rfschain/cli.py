"""Command-line interface.

Subcommands:

- sweep: run one model family over a parameter grid, emitting CSV or
  JSON records (optionally a rendered figure).
- scaling: pseudo-critical peak location/height against system size.
- analytic: closed-form reference curves (four-site exact results or
  the thermodynamic-limit power law).
- verify: run the acceptance checks and print a pass/fail table.
- model-info: describe a model spec (sector, dimension, bonds).

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from .acceptance import format_table, run_checks
from .analytic import (
    ThermoParams,
    eta_from_alpha,
    n4_energy,
    n4_rfs,
    thermo_derivatives,
    thermo_energy,
    thermo_rfs,
)
from .errors import SpinChainError
from .models import BB, DIMER, FAMILIES, MIXED, ModelSpec, ground_sector, sector_basis
from .sweep import (
    GLOBAL_ROUTE,
    ROUTE_ORDER,
    routes_for_family,
    run_sweep,
    scaling_table,
    sweep_meta,
    write_csv,
    write_json,
)
from .version import VERSION


class UsageError(Exception):
    """Bad command-line input (exit code 2)."""


def _parse_spin(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as err:
        raise UsageError(f"cannot parse spin {text!r}: {err}") from None


def _parse_routes(text: str, family: str):
    available = routes_for_family(family)
    if text == "all":
        return sorted(available, key=(ROUTE_ORDER + (GLOBAL_ROUTE,)).index)
    routes = [tok.strip() for tok in text.split(",") if tok.strip()]
    bad = set(routes) - available
    if bad:
        raise UsageError(
            f"routes {sorted(bad)} not available for {family!r}; "
            f"choose from {sorted(available)}")
    return routes


def _build_grid(args) -> np.ndarray:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.steps > 1 and not args.param_min < args.param_max:
        raise UsageError("--param-min must be below --param-max")
    return np.linspace(args.param_min, args.param_max, args.steps)


def _build_spec(args) -> ModelSpec:
    spin = _parse_spin(args.spin_s) if args.spin_s is not None else 0.5
    if args.model == BB:
        spin = 1.0
    try:
        return ModelSpec(args.model, args.n, args.param_min, spin_s=spin)
    except SpinChainError as err:
        raise UsageError(str(err)) from None


@contextmanager
def _open_output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_rows_csv(rows, columns, fh) -> None:
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt_cell(row.get(col)) for col in columns) + "\n")


def _null_nan(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_rows_json(rows, meta, fh) -> None:
    clean = [{k: _null_nan(v) for k, v in row.items()} for row in rows]
    json.dump({"meta": meta, "records": clean}, fh, indent=2, allow_nan=False)
    fh.write("\n")


def _add_model_arguments(sub, default_min, default_max, default_steps):
    sub.add_argument("--model", choices=sorted(FAMILIES), default=DIMER)
    sub.add_argument("--n", type=int, default=8, help="number of sites")
    sub.add_argument("--spin-s", default=None,
                     help="large spin of the mixed chain, e.g. 1 or 3/2")
    sub.add_argument("--param-min", type=float, default=default_min)
    sub.add_argument("--param-max", type=float, default=default_max)
    sub.add_argument("--steps", type=int, default=default_steps,
                     help="number of grid points (inclusive endpoints)")
    sub.add_argument("--routes", default="all",
                     help="comma-separated subset of "
                          "uhlmann,spectra,correlator,energy,global")
    sub.add_argument("--delta", type=float, default=1e-4,
                     help="fidelity finite-difference step")
    sub.add_argument("--fd-step", type=float, default=1e-4,
                     help="energy-derivative finite-difference step")
    sub.add_argument("--solver", choices=("lanczos", "dense"), default="lanczos")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--output", default="-", help="output path, - for stdout")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--figure", default=None,
                     help="also render a figure to this path")


def cmd_sweep(args) -> int:
    spec = _build_spec(args)
    routes = _parse_routes(args.routes, spec.family)
    grid = _build_grid(args)
    records = run_sweep(spec, grid, routes=routes, delta=args.delta,
                        fd_step=args.fd_step, solver=args.solver,
                        seed=args.seed, threads=args.threads)
    with _open_output(args.output) as fh:
        if args.format == "csv":
            write_csv(records, routes, fh)
        else:
            meta = sweep_meta(spec, routes, args.delta, args.fd_step,
                              args.solver, args.seed, args.threads)
            write_json(records, routes, meta, fh)
    if args.figure:
        from .report import sweep_figure
        sweep_figure(records, routes, args.figure,
                     title=f"{spec.family} N={spec.n}")
    return 0


def cmd_scaling(args) -> int:
    spec = _build_spec(args)
    routes = _parse_routes(args.routes, spec.family)
    grid = _build_grid(args)
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError as err:
        raise UsageError(f"cannot parse --sizes: {err}") from None
    rows_out, violations = scaling_table(
        spec, sizes, grid, routes, column=args.column, delta=args.delta,
        fd_step=args.fd_step, solver=args.solver, seed=args.seed,
        threads=args.threads)
    for message in violations:
        print(f"warning: {message}", file=sys.stderr)
    columns = ["n", "param_star", "chi_star", "grid_resolution"]
    rows = [{"n": r.n, "param_star": r.param_star, "chi_star": r.chi_star,
             "grid_resolution": r.grid_resolution} for r in rows_out]
    with _open_output(args.output) as fh:
        if args.format == "csv":
            _write_rows_csv(rows, columns, fh)
        else:
            meta = sweep_meta(spec, routes, args.delta, args.fd_step,
                              args.solver, args.seed, args.threads,
                              extra={"sizes": sizes, "column": args.column,
                                     "violations": violations})
            _write_rows_json(rows, meta, fh)
    if args.figure:
        from .report import scaling_figure
        scaling_figure(rows_out, args.figure, title=f"{spec.family} scaling")
    return 0


def _analytic_rows(family, grid, params: ThermoParams):
    rows = []
    for a in grid:
        a = float(a)
        if family == "n4":
            e0, de0, d2e0 = n4_energy(a)
            chi = n4_rfs(a)
            rows.append({"param": a, "e0": e0, "de0": de0, "d2e0": d2e0,
                         "chi12": chi, "chi23": chi})
        else:
            eta = eta_from_alpha(a)
            e0 = thermo_energy(eta, params)
            de0, d2e0 = thermo_derivatives(a, params)
            try:
                chi12, chi23 = thermo_rfs(a, params)
            except SpinChainError:
                chi12 = chi23 = math.nan
            rows.append({"param": a, "eta": eta, "e0": e0, "de0": de0,
                         "d2e0": d2e0, "chi12": chi12, "chi23": chi23})
    return rows


def cmd_analytic(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.family == "thermo":
        lo = args.param_min if args.param_min is not None else 0.8182
        hi = args.param_max if args.param_max is not None else 0.988
        if not 0.0 < lo <= hi < 1.0:
            raise UsageError("thermo curves need 0 < --param-min <= --param-max < 1")
        try:
            params = ThermoParams(c=args.thermo_c, p=args.thermo_p)
        except SpinChainError as err:
            raise UsageError(str(err)) from None
        columns = ["param", "eta", "e0", "de0", "d2e0", "chi12", "chi23"]
        meta = {"family": "thermo", "c": params.c, "p": params.p,
                "e00": params.e00, "eta_fit_range": list(params.eta_fit_range),
                "version": VERSION}
    else:
        lo = args.param_min if args.param_min is not None else 0.0
        hi = args.param_max if args.param_max is not None else 2.0
        if not lo <= hi:
            raise UsageError("--param-min must not exceed --param-max")
        params = ThermoParams()
        columns = ["param", "e0", "de0", "d2e0", "chi12", "chi23"]
        meta = {"family": "n4", "version": VERSION}
    grid = np.linspace(lo, hi, args.steps)
    rows = _analytic_rows(args.family, grid, params)
    with _open_output(args.output) as fh:
        if args.format == "csv":
            _write_rows_csv(rows, columns, fh)
        else:
            _write_rows_json(rows, meta, fh)
    if args.figure:
        from .report import analytic_figure
        analytic_figure(rows, args.figure, title=f"{args.family} reference")
    return 0


def cmd_verify(args) -> int:
    names = None
    if args.only:
        names = [tok.strip() for tok in args.only.split(",") if tok.strip()]
    try:
        results = run_checks(names)
    except ValueError as err:
        raise UsageError(str(err)) from None
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_model_info(args) -> int:
    spin = _parse_spin(args.spin_s) if args.spin_s is not None else 0.5
    if args.model == BB:
        spin = 1.0
    try:
        spec = ModelSpec(args.model, args.n, args.param, spin_s=spin)
    except SpinChainError as err:
        raise UsageError(str(err)) from None
    basis = sector_basis(spec)
    site_spec = spec.site_spec()
    print(f"family: {spec.family}")
    print(f"sites: {spec.n}")
    print(f"local spins: {', '.join(f'{s:g}' for s in site_spec.local_spins)}")
    print(f"parameter: {'theta (rad)' if spec.family == BB else 'alpha'}"
          f" = {spec.param:g}")
    print(f"couplings (j1, j2): {spec.couplings()[0]:g}, {spec.couplings()[1]:g}")
    print(f"ground sector Sz: {ground_sector(spec):g}")
    print(f"sector dimension: {basis.size} of {site_spec.total_dim}")
    print(f"intra-cell bonds: {spec.intra_bonds()}")
    print(f"inter-cell bonds: {spec.inter_bonds()}")
    print(f"routes: {', '.join(sorted(routes_for_family(spec.family)))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfschain",
        description="Reduced fidelity susceptibility diagnostics for "
                    "dimerized spin chains via exact diagonalization.")
    parser.add_argument("--version", action="version", version=VERSION)
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="sweep a model over a parameter grid")
    _add_model_arguments(sweep, 0.1, 1.6, 76)
    sweep.set_defaults(func=cmd_sweep)

    scaling = subs.add_parser("scaling", help="peak location against system size")
    _add_model_arguments(scaling, 0.1, 1.6, 76)
    scaling.add_argument("--sizes", default="6,8,10,12",
                         help="comma-separated even system sizes")
    scaling.add_argument("--column", default=None,
                         help="record column to maximize, e.g. chi23_energy")
    scaling.set_defaults(func=cmd_scaling)

    analytic = subs.add_parser("analytic", help="closed-form reference curves")
    analytic.add_argument("--family", choices=("n4", "thermo"), default="n4")
    analytic.add_argument("--param-min", type=float, default=None)
    analytic.add_argument("--param-max", type=float, default=None)
    analytic.add_argument("--steps", type=int, default=101)
    analytic.add_argument("--thermo-c", type=float, default=ThermoParams().c)
    analytic.add_argument("--thermo-p", type=float, default=ThermoParams().p)
    analytic.add_argument("--format", choices=("csv", "json"), default="csv")
    analytic.add_argument("--output", default="-")
    analytic.add_argument("--figure", default=None)
    analytic.set_defaults(func=cmd_analytic)

    verify = subs.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--only", default=None,
                        help="comma-separated subset of check names")
    verify.set_defaults(func=cmd_verify)

    info = subs.add_parser("model-info", help="describe a model spec")
    info.add_argument("--model", choices=sorted(FAMILIES), default=DIMER)
    info.add_argument("--n", type=int, default=8)
    info.add_argument("--spin-s", default=None)
    info.add_argument("--param", type=float, default=1.0)
    info.set_defaults(func=cmd_model_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except SpinChainError as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
