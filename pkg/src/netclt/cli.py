"""Command-line interface.

Subcommands: theory, simulate, reproduce-table, percolate, verify.
Outputs go to stdout by default; --out STEM writes STEM.json / STEM.csv
(and STEM.png with --plot).  Exit codes: 0 success, 1 computation or
verification failure, 2 usage error.  NETCLT_SEED is the seed fallback.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import graphs, theory, verify
from .distributions import (
    ConstantPeriod,
    ExponentialPeriod,
    ZeroOrInfinityPeriod,
    parse_degree_spec,
    parse_period_spec,
    period_matched_to_transmission,
)
from .epidemic import EpidemicSetup, InitialCondition, run_ensemble
from .theory import TheoryError


class UsageError(Exception):
    pass


DEFAULT_TABLE_FAMILIES = ["const:5", "poisson:5", "geom:0.16666666666666666", "power:1:13.796"]


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NETCLT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"NETCLT_SEED must be an integer, got {env!r}") from exc
    return 0


def _lambda_for_p(period, p_i: float) -> float:
    """Contact rate realising p_I for a parameterised period."""
    if p_i >= 1:
        raise UsageError("p_I = 1 cannot be matched with a finite contact rate")
    if isinstance(period, ConstantPeriod):
        return -math.log1p(-p_i) / period.duration
    if isinstance(period, ExponentialPeriod):
        return period.rate * p_i / (1.0 - p_i)
    if isinstance(period, ZeroOrInfinityPeriod):
        if abs(period.prob_infinite - p_i) > 1e-9:
            raise UsageError(
                f"--pI {p_i} is inconsistent with zeroinf:{period.prob_infinite}"
            )
        return 1.0
    raise UsageError("give --lambda explicitly for this period")


def resolve_period(args):
    """(period, lambda) from --period / --pI / --lambda."""
    spec = args.period or "const"
    period = parse_period_spec(spec)
    p_i = getattr(args, "p_i", None)
    lam = getattr(args, "lam", None)
    if period is None:
        # bare 'const' or 'zeroinf': match the period to p_I
        if p_i is None:
            raise UsageError(f"--period {spec} needs --pI to match against")
        kind = "constant" if spec.startswith("const") else "zero_or_infinity"
        period, matched_lam = period_matched_to_transmission(p_i, kind)
        if lam is not None and abs(lam - matched_lam) > 1e-9:
            raise UsageError("--lambda is inconsistent with the matched period for --pI")
        return period, matched_lam
    if lam is not None:
        if p_i is not None:
            implied = 1.0 - period.laplace(lam)
            if abs(implied - p_i) > 1e-9:
                raise UsageError(
                    f"--pI {p_i} and --lambda {lam} disagree (implied p_I = {implied:.6g})"
                )
        return period, lam
    if p_i is not None:
        return period, _lambda_for_p(period, p_i)
    raise UsageError("give either --pI or --lambda")


def _write_text(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# theory
# ---------------------------------------------------------------------------


def cmd_theory(args) -> int:
    dist = parse_degree_spec(args.degree)
    mode = args.mode
    if mode in ("bond", "site"):
        if args.pi is None:
            raise UsageError(f"--mode {mode} needs --pi")
        result = theory.percolation_theory(mode, args.model, dist, args.pi)
    elif mode == "giant":
        result = theory.giant_component_theory(args.model, dist)
    else:
        period, lam = resolve_period(args)
        if args.eps:
            result = theory.epidemic_theory_positive(
                args.model, dist, args.eps, period, lam
            )
        else:
            result = theory.epidemic_theory_major(args.model, dist, period, lam)
    text = json.dumps(result.to_json_dict(), indent=2) + "\n"
    if args.out:
        _write_text(args.out + ".json", text)
    sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _build_setup(args, dist, period, lam) -> EpidemicSetup:
    if args.a is not None and args.eps is not None:
        raise UsageError("give --eps or --a, not both")
    if args.a is not None:
        initial = InitialCondition.count(args.a)
    elif args.eps is not None:
        initial = InitialCondition.fraction(args.eps)
    else:
        raise UsageError("give --eps or --a")
    return EpidemicSetup(
        model=args.model,
        n=args.n,
        degree=dist,
        period=period,
        lam=lam,
        initial=initial,
        mode=args.sim_mode,
    )


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    dist = parse_degree_spec(args.degree)
    period, lam = resolve_period(args)
    setup = _build_setup(args, dist, period, lam)
    seed = _default_seed(args)
    result = run_ensemble(setup, args.reps, seed, threads=args.threads)
    summary = result.summary_json()
    if args.out:
        _write_text(args.out + ".json", summary)
        _write_text(args.out + ".csv", result.csv_text())
        if args.plot:
            _plot_simulation(args, setup, result, args.out + ".png")
    sys.stdout.write(summary if args.format == "json" else result.csv_text())
    return 0


def _plot_simulation(args, setup, result, path):
    from .plotting import save_histogram

    clt_mean = sigma2 = None
    weight = 1.0
    try:
        if setup.initial.eps:
            res = theory.epidemic_theory_positive(
                setup.model, setup.degree, setup.initial.eps, setup.period, setup.lam
            )
        else:
            res = theory.epidemic_theory_major(
                setup.model, setup.degree, setup.period, setup.lam
            )
            weight = res.p_maj
        clt_mean, sigma2 = res.clt_mean, res.sigma2
    except TheoryError:
        pass
    save_histogram(
        result.t,
        setup.n,
        path,
        clt_mean=clt_mean,
        sigma2=sigma2,
        weight=weight,
        title=f"{args.degree} {setup.model} n={setup.n} reps={result.reps}",
    )


# ---------------------------------------------------------------------------
# reproduce-table
# ---------------------------------------------------------------------------


def cmd_reproduce_table(args) -> int:
    families = args.degree or DEFAULT_TABLE_FAMILIES
    n_list = [int(x) for x in args.n_list.split(",")] if args.n_list else [1000]
    seed = _default_seed(args)
    rows = []
    for fam in families:
        dist = parse_degree_spec(fam)
        fam_rows = []
        for n in n_list:
            row = {"degree": fam, "n": n}
            for variant, kind in (("const", "constant"), ("zeroinf", "zero_or_infinity")):
                period, lam = period_matched_to_transmission(args.p_i, kind)
                setup = EpidemicSetup(
                    model=args.model,
                    n=n,
                    degree=dist,
                    period=period,
                    lam=lam,
                    initial=InitialCondition.fraction(args.eps),
                )
                res = run_ensemble(setup, args.reps, seed, threads=args.threads)
                s = res.summary()
                row[f"rho_{variant}"] = s["rho_hat"]
                row[f"sigma2_{variant}"] = s["sigma2_hat"]
            fam_rows.append(row)
        row = {"degree": fam, "n": "inf"}
        for variant, kind in (("const", "constant"), ("zeroinf", "zero_or_infinity")):
            period, lam = period_matched_to_transmission(args.p_i, kind)
            res = theory.epidemic_theory_positive(args.model, dist, args.eps, period, lam)
            row[f"rho_{variant}"] = res.rho
            row[f"sigma2_{variant}"] = res.sigma2
        fam_rows.append(row)
        rows.extend(fam_rows)
        if args.out and args.plot:
            from .plotting import save_convergence_plot

            save_convergence_plot(
                fam_rows, fam, args.out + "_" + fam.replace(":", "_") + ".png"
            )

    header = ["degree", "n", "rho_const", "sigma2_const", "rho_zeroinf", "sigma2_zeroinf"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[h]) for h in header))
    csv_text = "\n".join(lines) + "\n"
    if args.format == "json":
        out = json.dumps(rows, indent=2) + "\n"
    else:
        out = csv_text
    if args.out:
        _write_text(args.out + ".csv", csv_text)
    sys.stdout.write(out)
    return 0


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


# ---------------------------------------------------------------------------
# percolate
# ---------------------------------------------------------------------------


def cmd_percolate(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if not 0 < args.pi <= 1:
        raise UsageError("--pi must be in (0, 1]")
    dist = parse_degree_spec(args.degree)
    seed = _default_seed(args)
    n = args.n
    mr_degrees = graphs.mr_degree_sequence(dist, n) if args.model == "mr" else None
    sizes = np.empty(args.reps, dtype=np.int64)
    for r in range(args.reps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        degs = mr_degrees if args.model == "mr" else graphs.nsw_degree_sequence(dist, n, rng)
        g = graphs.pair_half_edges(degs, rng)
        if args.pi < 1:
            if args.kind == "bond":
                g = graphs.bond_percolate(g, args.pi, rng)
            else:
                g = graphs.site_percolate(g, args.pi, rng)
        sizes[r] = graphs.largest_component(g)[0]

    summary = {
        "kind": args.kind,
        "model": args.model,
        "n": n,
        "reps": args.reps,
        "seed": seed,
        "pi": args.pi,
        "mean_frac_hat": float(sizes.mean()) / n,
        "scaled_var_hat": float(sizes.var(ddof=1)) / n if args.reps > 1 else 0.0,
    }
    clt_mean = sigma2 = None
    try:
        if args.pi >= 1:
            res = theory.giant_component_theory(args.model, dist)
        else:
            res = theory.percolation_theory(args.kind, args.model, dist, args.pi)
        summary["clt_mean"] = clt_mean = res.clt_mean
        summary["sigma2"] = sigma2 = res.sigma2
        summary["rho"] = res.rho
    except TheoryError as exc:
        summary["theory_error"] = str(exc)

    csv_lines = ["rep,C"] + [f"{r},{sizes[r]}" for r in range(args.reps)]
    csv_text = "\n".join(csv_lines) + "\n"
    summary_text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        _write_text(args.out + ".json", summary_text)
        _write_text(args.out + ".csv", csv_text)
        if args.plot:
            from .plotting import save_histogram

            save_histogram(
                sizes,
                n,
                args.out + ".png",
                clt_mean=clt_mean,
                sigma2=sigma2,
                title=f"{args.kind} percolation pi={args.pi} {args.degree} "
                f"{args.model} n={n}",
                xlabel="largest component size",
            )
    sys.stdout.write(summary_text if args.format == "json" else csv_text)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    suites = args.suite.split(",") if args.suite else ["quadrature", "enumeration", "fluid"]
    reports = []
    if "quadrature" in suites:
        cases = verify.quadrature_cases()
        if args.points is not None:
            cases = cases[: args.points]
        reports += verify.run_quadrature_suite(cases, perturb_sigma2=args.perturb_sigma2)
    if "enumeration" in suites:
        reports += verify.run_enumeration_suite(reps=args.reps, seed=_default_seed(args))
    if "fluid" in suites:
        reports += verify.run_fluid_suite()
    if not reports:
        print("warning: empty verification grid", file=sys.stderr)
    failures = [r for r in reports if not r["ok"]]
    text = json.dumps(reports, indent=2) + "\n"
    if args.out:
        _write_text(args.out + ".json", text)
    sys.stdout.write(text)
    if failures:
        print(f"{len(failures)} of {len(reports)} checks failed", file=sys.stderr)
        for r in failures:
            print(f"  FAIL {r['suite']}: {r['params']}", file=sys.stderr)
        return 1
    print(f"all {len(reports)} checks passed", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p, seed=True):
    p.add_argument("--out", help="output stem; writes STEM.json/.csv (and .png with --plot)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true", help="render a figure next to --out")
    if seed:
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netclt",
        description="Final-size simulation and asymptotics for epidemics and "
        "percolation on configuration-model graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="closed-form asymptotic mean/variance")
    p.add_argument("--model", choices=("mr", "nsw"), required=True)
    p.add_argument("--degree", required=True)
    p.add_argument("--mode", choices=("epidemic", "bond", "site", "giant"), default="epidemic")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--pI", dest="p_i", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--period", default=None)
    p.add_argument("--pi", type=float, default=None, help="percolation retention probability")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="Monte Carlo final-size ensemble")
    p.add_argument("--model", choices=("mr", "nsw"), required=True)
    p.add_argument("--degree", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--pI", dest="p_i", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--period", default=None)
    p.add_argument("--mode", dest="sim_mode", choices=("epidemic", "site"), default="epidemic")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce-table", help="finite-n table with the asymptotic row")
    p.add_argument("--model", choices=("mr", "nsw"), default="nsw")
    p.add_argument("--degree", action="append", help="repeatable; defaults to the four mean-5 families")
    p.add_argument("--n-list", default="1000")
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--pI", dest="p_i", type=float, default=0.3)
    _add_common(p)
    p.set_defaults(func=cmd_reproduce_table, format="csv")

    p = sub.add_parser("percolate", help="largest components of percolated graphs")
    p.add_argument("--model", choices=("mr", "nsw"), required=True)
    p.add_argument("--degree", required=True)
    p.add_argument("--kind", choices=("bond", "site"), default="bond")
    p.add_argument("--pi", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("verify", help="oracle suites: quadrature, enumeration, fluid")
    p.add_argument("--suite", default=None, help="comma list: quadrature,enumeration,fluid")
    p.add_argument("--points", type=int, default=None, help="cap the quadrature grid size")
    p.add_argument("--reps", type=int, default=100000, help="enumeration-suite replicates")
    p.add_argument(
        "--perturb-sigma2",
        type=float,
        default=0.0,
        help="test hook: bias the closed form to force a failure",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TheoryError as exc:
        # subcritical / near-critical / hypothesis violations
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
