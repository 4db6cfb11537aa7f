"""Verification suites wiring the closed forms, the quadrature oracle, the
exact enumeration and the simulation engine against each other.

Each suite returns a list of report dicts with an "ok" flag; the CLI's
verify command aggregates them and sets the exit code.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from . import graphs, oracle, theory
from .distributions import (
    DegreeDistribution,
    build_constant,
    build_geometric,
    build_poisson,
    build_power_cutoff,
    from_pmf,
    period_matched_to_transmission,
    transmission_params,
)
from .epidemic import EpidemicSetup, InitialCondition, run_ensemble

__all__ = [
    "default_families",
    "quadrature_cases",
    "run_quadrature_suite",
    "run_enumeration_suite",
    "run_fluid_suite",
    "bond_component_sizes",
    "giant_component_sizes",
    "instance_setup",
]

QUAD_REL_TOL = 1e-6
CHI2_ALPHA = 1e-3


def default_families() -> dict[str, DegreeDistribution]:
    """The four mean-5 degree families used throughout the illustrations."""
    return {
        "const:5": build_constant(5),
        "poisson:5": build_poisson(5.0),
        "geom:0.1667": build_geometric(1.0 / 6.0),
        "power:1:13.796": build_power_cutoff(1.0, 13.796),
    }


def quadrature_cases() -> list[dict]:
    """Supercritical grid spanning every variance regime (>= 50 points)."""
    cases = []
    for fam, dist in default_families().items():
        p_crit = theory.critical_transmission(dist)
        for model in ("mr", "nsw"):
            for period_kind in ("constant", "zero_or_infinity"):
                for eps in (0.01, 0.05, 0.2):
                    cases.append(
                        dict(
                            regime="positive",
                            family=fam,
                            model=model,
                            period=period_kind,
                            eps=eps,
                            p_i=0.3,
                        )
                    )
                for p_i in (p_crit + 0.05, 0.5, 0.9):
                    cases.append(
                        dict(
                            regime="major",
                            family=fam,
                            model=model,
                            period=period_kind,
                            p_i=round(p_i, 6),
                        )
                    )
            for kind in ("bond", "site"):
                for pi in (p_crit + 0.05, 0.5):
                    cases.append(
                        dict(
                            regime=kind,
                            family=fam,
                            model=model,
                            pi=round(pi, 6),
                        )
                    )
    return cases


def _one_quadrature_case(case: dict, families: dict) -> tuple[float, float]:
    dist = families[case["family"]]
    model = case["model"]
    if case["regime"] == "positive":
        period, lam = period_matched_to_transmission(case["p_i"], case["period"])
        res = theory.epidemic_theory_positive(model, dist, case["eps"], period, lam)
        red = dist.reduced_uniform(case["eps"])
        p, q, q2 = transmission_params(period, lam)
        quad = oracle.variance_by_quadrature(model, red, p, q, q2, res.z)
    elif case["regime"] == "major":
        period, lam = period_matched_to_transmission(case["p_i"], case["period"])
        res = theory.epidemic_theory_major(model, dist, period, lam)
        red = dist.reduced_uniform(0.0)
        p, q, q2 = transmission_params(period, lam)
        quad = oracle.variance_by_quadrature(model, red, p, q, q2, res.z)
    elif case["regime"] == "bond":
        res = theory.percolation_theory("bond", model, dist, case["pi"])
        red = dist.reduced_uniform(0.0)
        pi = case["pi"]
        quad = oracle.variance_by_quadrature(model, red, pi, 1 - pi, (1 - pi) ** 2, res.z)
    elif case["regime"] == "site":
        res = theory.percolation_theory("site", model, dist, case["pi"])
        quad = oracle.site_variance_by_quadrature(model, dist, case["pi"], res.z)
    else:
        raise ValueError(f"unknown regime {case['regime']!r}")
    return res.sigma2, quad


def run_quadrature_suite(
    cases: list[dict] | None = None,
    rel_tol: float = QUAD_REL_TOL,
    perturb_sigma2: float = 0.0,
) -> list[dict]:
    """Closed-form variance vs quadrature for every grid point.

    perturb_sigma2 biases the closed form; nonzero values exist to prove the
    harness can fail.
    """
    families = default_families()
    if cases is None:
        cases = quadrature_cases()
    reports = []
    for case in cases:
        closed, quad = _one_quadrature_case(case, families)
        closed += perturb_sigma2
        rel = abs(closed - quad) / max(abs(closed), 1e-300)
        reports.append(
            {
                "suite": "quadrature",
                "params": case,
                "closed_form": closed,
                "quadrature": quad,
                "rel_err": rel,
                "ok": bool(rel <= rel_tol),
            }
        )
    return reports


ENUM_INSTANCES = [
    # (degrees, initial node, period kind, p_I)
    ([1, 1], 0, "constant", 0.3),
    ([2, 2], 0, "constant", 0.5),
    ([1, 1, 1, 1], 0, "constant", 0.3),
    ([3, 1, 1, 1], 0, "constant", 0.3),
    ([2, 2, 2], 0, "constant", 0.4),
    ([2, 2], 0, "zero_or_infinity", 0.6),
    ([1, 1, 1, 1], 0, "zero_or_infinity", 0.5),
    ([3, 1, 1, 1], 0, "zero_or_infinity", 0.4),
]


def instance_setup(degrees, initial_node, period, lam) -> EpidemicSetup:
    """Deterministic-degree setup matching an explicit tiny instance."""
    degrees = list(degrees)
    n = len(degrees)
    counts = np.bincount(degrees)
    dist = from_pmf(counts / n)
    a_i = [0] * (dist.dmax + 1)
    a_i[degrees[initial_node]] = 1
    return EpidemicSetup(
        "mr", n, dist, period, lam, InitialCondition.count(1, a_i)
    )


def run_enumeration_suite(
    reps: int = 100_000, seed: int = 20260810, alpha: float = CHI2_ALPHA
) -> list[dict]:
    """Simulator frequencies vs exact enumeration, chi-square per instance."""
    reports = []
    for idx, (degrees, initial, kind, p_i) in enumerate(ENUM_INSTANCES):
        period, lam = period_matched_to_transmission(p_i, kind)
        pmf = oracle.enumerate_final_size(degrees, period, lam, initial)
        setup = instance_setup(degrees, initial, period, lam)
        res = run_ensemble(setup, reps, seed + idx)
        support = sorted(pmf)
        expected = np.array([pmf[k] for k in support]) * reps
        observed = np.array([int(np.sum(res.t == k)) for k in support])
        stray = reps - observed.sum()  # outcomes outside the exact support
        pvalue = float(stats.chisquare(observed, expected).pvalue) if stray == 0 else 0.0
        reports.append(
            {
                "suite": "enumeration",
                "params": {
                    "degrees": degrees,
                    "initial": initial,
                    "period": kind,
                    "p_i": p_i,
                    "reps": reps,
                },
                "pmf": {str(k): pmf[k] for k in support},
                "pvalue": pvalue,
                "ok": bool(stray == 0 and pvalue > alpha),
            }
        )
    return reports


def bond_component_sizes(
    model: str, dist: DegreeDistribution, n: int, pi: float, reps: int, seed: int
) -> np.ndarray:
    """Explicit-graph route to the final size of a one-seed epidemic:
    realise the graph, bond-percolate with retention pi, and count the
    component of a uniformly chosen seed vertex (seed excluded).

    Distributionally equal to the count-based engine with a constant
    infectious period at p_I = pi and a single initial infective.
    """
    mr_degrees = graphs.mr_degree_sequence(dist, n) if model == "mr" else None
    sizes = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        degs = mr_degrees if model == "mr" else graphs.nsw_degree_sequence(dist, n, rng)
        g = graphs.pair_half_edges(degs, rng)
        g = graphs.bond_percolate(g, pi, rng)
        # component includes the seed itself; the final size does not
        sizes[r] = graphs.component_size_of(g, int(rng.integers(0, n))) - 1
    return sizes


def giant_component_sizes(
    model: str, dist: DegreeDistribution, n: int, reps: int, seed: int
) -> np.ndarray:
    """Largest-component sizes over independently realised graphs."""
    mr_degrees = graphs.mr_degree_sequence(dist, n) if model == "mr" else None
    sizes = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        degs = mr_degrees if model == "mr" else graphs.nsw_degree_sequence(dist, n, rng)
        sizes[r] = graphs.largest_component(graphs.pair_half_edges(degs, rng))[0]
    return sizes


def run_fluid_suite() -> list[dict]:
    """ODE integration vs closed-form fluid paths on the illustration grid."""
    reports = []
    for fam, dist in default_families().items():
        for eps in (0.0, 0.05):
            period, lam = period_matched_to_transmission(0.3, "constant")
            p, q, _ = transmission_params(period, lam)
            red = dist.reduced_uniform(eps)
            if eps > 0:
                res = theory.epidemic_theory_positive("mr", dist, eps, period, lam)
            else:
                res = theory.epidemic_theory_major("mr", dist, period, lam)
            rep = oracle.fluid_consistency_check(red, p, q, res.z)
            reports.append(
                {
                    "suite": "fluid",
                    "params": {"family": fam, "eps": eps, "p_i": 0.3},
                    "max_abs_deviation": rep.max_abs_deviation,
                    "y_at_tau": rep.y_at_tau,
                    "a_at_tau": rep.a_at_tau,
                    "eta_max_rel_error": rep.eta_max_rel_error,
                    "ok": rep.ok,
                }
            )
    return reports
