"""Command-line front end.

Subcommands: run, sweep, hill, bound, fit, verify-potential.
Exit codes: 0 ok, 2 validation error, 3 numerical-guard abort,
4 analysis-verdict failure under --tolerance-profile strict.
"""

from __future__ import annotations

import argparse
import csv as _csv
import sys
from pathlib import Path

import numpy as np

from . import bounds, lens, potentials, scenarios
from .solver import ConfigError, NumericalGuardError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_VERDICT = 4


def _add_common(p):
    p.add_argument("--out-dir", default="runs", help="artifact directory")
    p.add_argument("--tolerance-profile", choices=("fast", "strict"), default="fast")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlslab",
                                 description="pseudo-spectral NLS workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("scenario", help="bundled name or path to a .toml file")
    p.add_argument("--no-plots", action="store_true")
    _add_common(p)

    p = sub.add_parser("sweep", help="run a (gamma, sigma) grid of scenarios")
    p.add_argument("scenario")
    p.add_argument("--gamma", required=True, help="comma-separated list")
    p.add_argument("--sigma", required=True, help="comma-separated list")
    _add_common(p)

    p = sub.add_parser("hill", help="solve a Hill pair / far-field pair, export CSV")
    p.add_argument("--omega", choices=("zero", "constant", "power", "oscillatory"),
                   default="zero")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--initial", default="0,1,1,0",
                   help="mu,mu_dot,nu,nu_dot at t0 (Wronskian 1)")
    p.add_argument("--scattering-pair", action="store_true")
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--d", type=int, default=1, help="dimension for the H column")
    p.add_argument("--sigma-nl", type=float, default=2.0, help="sigma for the H column")
    p.add_argument("--out", default="hill.csv")
    _add_common(p)

    p = sub.add_parser("bound", help="evaluate the interval-splitting recursion")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tau0", type=float, default=1.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--w0", type=float, default=1.0)
    p.add_argument("--f-const", type=float, default=0.0)
    p.add_argument("--variant", choices=("general", "confining"), default="general")
    p.add_argument("--branch", choices=("lp", "linf"), default="lp")
    p.add_argument("--trace", default=None, help="write the (j, t_j, B_j) trace CSV here")
    _add_common(p)

    p = sub.add_parser("fit", help="growth-law fit on a CSV column")
    p.add_argument("csv")
    p.add_argument("--column", required=True)
    p.add_argument("--t-column", default="t")
    p.add_argument("--model", choices=("auto",) + bounds.MODELS, default="auto")
    p.add_argument("--t-min", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("verify-potential", help="sampled check of the quadratic-growth hypothesis")
    p.add_argument("scenario")
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--threshold", type=float, default=100.0)
    _add_common(p)
    return ap


def _cmd_run(args) -> int:
    scn = scenarios.load_scenario(args.scenario)
    res = scenarios.run_scenario(scn, out_dir=args.out_dir, plots=not args.no_plots)
    drift = res.summary["mass"]["max_relative_drift"]
    print(f"{scn.name}: records={res.summary['records']} mass-drift={drift:.3e} "
          f"ok={res.ok}")
    if res.csv_path:
        print(f"artifacts: {res.csv_path.parent}")
    if args.tolerance_profile == "strict" and not res.ok:
        return EXIT_VERDICT
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scn = scenarios.load_scenario(args.scenario)
    gammas = [float(x) for x in args.gamma.split(",") if x]
    sigmas = [float(x) for x in args.sigma.split(",") if x]
    rows = scenarios.sweep(scn, gammas, sigmas, out_dir=args.out_dir, jobs=args.jobs)
    for row in rows:
        print(f"gamma={row['gamma']} sigma={row['sigma']} h1={row['h1_model']} "
              f"mom1_exp={row['mom1_exponent']} verdict={row['verdict']} "
              f"{('ERROR: ' + row['error']) if row['error'] else ''}")
    failed = [r for r in rows if r["error"]]
    if args.tolerance_profile == "strict" and (failed or not all(r["ok"] for r in rows)):
        return EXIT_VERDICT
    return EXIT_OK


def _make_omega(args) -> potentials.Omega:
    if args.omega == "zero":
        return potentials.omega_constant(0.0)
    if args.omega == "constant":
        return potentials.omega_constant(args.c)
    if args.omega == "power":
        return potentials.omega_power_decay(args.c, args.gamma)
    return potentials.omega_oscillatory()


def _cmd_hill(args) -> int:
    omega = _make_omega(args)
    if args.scattering_pair:
        pair = lens.construct_scattering_pair(omega, args.gamma, args.T, args.t_max,
                                              tol=args.tol, t_start=args.t0, h=args.step)
        hill = pair.hill
        print(f"pair: contraction={pair.contraction_norm:.3e} "
              f"iterations={pair.iterations_nu}/{pair.iterations_mu} "
              f"tail-budget={pair.tail_budget_nu:.3e} "
              f"W-drift={hill.max_wronskian_drift:.3e}")
    else:
        initial = [float(x) for x in args.initial.split(",")]
        hill = lens.solve_hill(omega, initial, (args.t0, args.t1), h=args.step)
    lmap = None
    try:
        lmap = lens.build_lens_map(hill, args.d, args.sigma_nl)
    except lens.LensError:
        pass  # H column stays nan
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["t", "mu", "mu_dot", "nu", "nu_dot", "W", "zeta", "H"])
        for row in lens.hill_csv_rows(hill, lmap):
            w.writerow([format(v, ".17g") for v in row])
    print(f"wrote {out} ({len(hill.times)} rows)")
    return EXIT_OK


def _cmd_bound(args) -> int:
    res = bounds.double_exp_ledger(args.C, args.alpha, args.tau0, args.f_const,
                                   args.t, args.w0, variant=args.variant,
                                   branch=args.branch)
    print(f"tau={res.tau:.6g} N={res.n_intervals} factor={res.factor:.6g} "
          f"bound={res.bound:.6g} C1={res.C1:.6g}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["j", "t_j", "B_j"])
            for j, tj, bj in res.trace:
                w.writerow([int(j), format(tj, ".17g"), format(bj, ".17g")])
        print(f"wrote {args.trace}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    with open(args.csv, newline="") as fh:
        reader = _csv.DictReader(fh)
        rows = list(reader)
    t = np.array([float(r[args.t_column]) for r in rows])
    y = np.array([float(r[args.column]) for r in rows])
    sel = t >= args.t_min
    t, y = t[sel], y[sel]
    if args.model == "auto":
        cls = bounds.classify(t, y)
        fit = cls["fit"]
        print(f"model={fit.model} params={fit.params} residual={fit.residual:.3e}")
    else:
        fit = bounds.growth_fit(t, y, args.model)
        print(f"model={fit.model} params={fit.params} residual={fit.residual:.3e}")
    return EXIT_OK


def _cmd_verify_potential(args) -> int:
    scn = scenarios.load_scenario(args.scenario)
    spec = scn.build_potential()
    dim = int(scn.data["grid"]["dim"])
    ts = np.linspace(0.0, args.t_max, 11)
    rng = np.linspace(-args.x_max, args.x_max, 9)
    pts = np.stack(np.meshgrid(*([rng] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    rep = potentials.verify_assumption(spec, ts, pts, max_order=args.max_order,
                                       threshold=args.threshold)
    print(f"passes={rep['passes']} sup|V| on unit ball={rep['sup_unit_ball']:.6g}")
    for order, bound in sorted(rep["worst_bounds"].items()):
        print(f"  sup |d^{order} V| = {bound:.6g}")
    if args.tolerance_profile == "strict" and not rep["passes"]:
        return EXIT_VERDICT
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "hill": _cmd_hill,
        "bound": _cmd_bound,
        "fit": _cmd_fit,
        "verify-potential": _cmd_verify_potential,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, lens.HillError, lens.LensError, bounds.BoundsError,
            potentials.PotentialError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalGuardError as exc:
        print(f"numerical guard abort at t={exc.t}: {exc} ({exc.report.get('reason')})",
              file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
