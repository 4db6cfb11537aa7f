"""Asymptotic final-size means and variances.

Everything here is driven by the root z of

    G(s) = p_I * f'(s) - mu_D * (s - q_I) = 0

on [0, 1), where f is either the reduced pgf (positive initial fraction) or
the plain degree pgf (fixed number of initial infectives; percolation with
p_I = pi).  Given z, the limiting infected fraction is rho and the scaled
variance of the final size has a closed form that differs between the
deterministic-degree (MR) and i.i.d.-degree (NSW) graph models, between
epidemic / bond / site / giant-component questions, and through the
infectious-period distribution only via (p_I, q_I, q_I2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .distributions import (
    DegreeDistribution,
    InfectiousPeriod,
    ReducedPgf,
    transmission_params,
)

__all__ = [
    "TheoryResult",
    "TheoryError",
    "SubcriticalError",
    "NearCriticalError",
    "basic_reproduction_number",
    "critical_transmission",
    "solve_z",
    "solve_root",
    "major_outbreak_prob",
    "epidemic_theory_positive",
    "epidemic_theory_major",
    "percolation_theory",
    "giant_component_theory",
]

# Residual bound promised for every returned root, relative to mu_D.
_ROOT_RTOL = 1e-13
# Variance denominator below this is treated as "variance diverges".
_NEAR_CRITICAL_TOL = 1e-9


class TheoryError(ValueError):
    """Parameters violate the hypotheses of the limit theorems."""


class SubcriticalError(TheoryError):
    """R0 <= 1: no large outbreak / giant component in the limit."""


class NearCriticalError(TheoryError):
    """So close to criticality that the asymptotic variance diverges."""


@dataclass(frozen=True)
class TheoryResult:
    regime: str  # positive_fraction | conditional_major | percolation
    variant: str  # e.g. nsw_epidemic, mr_bond, nsw_site, mr_giant
    z: float
    tau: float  # -ln z, the transformed-time horizon
    rho: float  # limiting infected fraction (bond/giant: component fraction)
    h: float
    r0: float
    p_crit: float
    p_maj: float
    sigma2: float
    residual: float
    clt_mean: float  # rho, or pi*rho for site percolation

    def to_json_dict(self) -> dict:
        return {
            "regime": self.regime,
            "z": self.z,
            "tau": self.tau,
            "rho": self.rho,
            "h": self.h,
            "R0": self.r0,
            "pC": self.p_crit,
            "pmaj": self.p_maj,
            "sigma2": self.sigma2,
            "variant": self.variant,
            "residual": self.residual,
        }


def basic_reproduction_number(dist: DegreeDistribution, p_i: float) -> float:
    """Mean offspring of the size-biased branching approximation."""
    if dist.mean <= 0:
        raise TheoryError("degree distribution must have positive mean")
    return (dist.mean + dist.variance / dist.mean - 1.0) * p_i


def critical_transmission(dist: DegreeDistribution) -> float:
    """Transmission probability at which R0 = 1 (infinite if no spread is possible)."""
    if dist.mean <= 0:
        raise TheoryError("degree distribution must have positive mean")
    mt = dist.size_biased_mean
    return 1.0 / mt if mt > 0 else math.inf


def solve_root(reduced, p_i: float, q_i: float, mu_d: float, regime: str):
    """Root of G(s) = p_I f'(s) - mu_D (s - q_I) and its residual.

    regime 'positive': G(1) < 0 under the theorem hypotheses, bracket [0, 1].
    regime 'major': G(1) = 0; scan s = 1 - 2^-k until G < 0 to exclude the
    root at 1, then bisect (G is convex, so the bracketed zero is unique).
    """

    def g(s):
        return p_i * reduced.pgf(s, 1) - mu_d * (s - q_i)

    g0 = g(0.0)
    if g0 <= 0.0:
        # only possible when q_I = 0 and the linear coefficient vanishes
        raise TheoryError("G(0) <= 0: need q_I > 0 or mass on degree 1")
    if regime == "positive":
        hi = 1.0
        if g(hi) >= 0.0:
            raise TheoryError(
                "G(1) >= 0: positive-fraction theory needs initial infectives "
                "of some positive degree"
            )
    elif regime == "major":
        hi = None
        for k in range(1, 60):
            s = 1.0 - 0.5**k
            if g(s) < 0.0:
                hi = s
                break
        if hi is None:
            raise SubcriticalError("no root below 1: the process is (near-)critical")
    else:
        raise ValueError(f"unknown regime {regime!r}")

    z = brentq(g, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    # one Newton polish; keep it only if it actually reduces the residual
    dg = p_i * reduced.pgf(z, 2) - mu_d
    if dg != 0.0:
        z_new = z - g(z) / dg
        if 0.0 <= z_new < 1.0 and abs(g(z_new)) < abs(g(z)):
            z = z_new
    residual = g(z)
    if abs(residual) > _ROOT_RTOL * mu_d:
        raise TheoryError(f"root residual {residual:.3e} exceeds tolerance")
    return z, residual


def solve_z(reduced, p_i, q_i, mu_d, regime="positive") -> float:
    return solve_root(reduced, p_i, q_i, mu_d, regime)[0]


def major_outbreak_prob(dist: DegreeDistribution, p_i: float) -> float:
    """Survival probability of the binomial branching approximation.

    The offspring pgf is g(s) = f'(q_I + p_I s) / mu_D; the smallest fixed
    point xi in [0, 1] is found by monotone iteration from 0, and the initial
    infective (degree ~ D) escapes extinction with probability
    1 - f(q_I + p_I xi).  Subcritical parameters give xi = 1, p_maj = 0.
    """
    if dist.mean <= 0:
        raise TheoryError("degree distribution must have positive mean")
    if not 0 <= p_i <= 1:
        raise ValueError("p_I must be in [0, 1]")
    q_i = 1.0 - p_i
    xi = 0.0
    for _ in range(100_000):
        nxt = dist.pgf(q_i + p_i * xi, 1) / dist.mean
        if abs(nxt - xi) <= 1e-13:
            xi = nxt
            break
        xi = nxt
    # Newton polish on g(s) - s = 0 (safe: the iterate is already adjacent
    # to the smallest fixed point)
    for _ in range(3):
        denom = p_i * dist.pgf(q_i + p_i * xi, 2) / dist.mean - 1.0
        if denom == 0.0:
            break
        step = (dist.pgf(q_i + p_i * xi, 1) / dist.mean - xi) / denom
        xi = min(1.0, max(0.0, xi - step))
    return 1.0 - dist.pgf(q_i + p_i * xi, 0)


# ---------------------------------------------------------------------------
# Variance kernels (one per graph model, parameterised by the reduced pgf)
# ---------------------------------------------------------------------------


def _h_of_z(reduced, p_i, q_i, z, mu_d):
    den = 1.0 - p_i * reduced.pgf(z, 2) / mu_d
    if abs(den) < _NEAR_CRITICAL_TOL:
        raise NearCriticalError("variance denominator vanishes: diverging variance")
    return (q_i - z) / p_i / den


def _sigma_mr(red, dist, eps, p_i, q_i, q_i2, z, h, rho):
    z2 = z * z
    t1 = h * h * (
        (p_i * q_i + 2.0 * (z - q_i) ** 2) * dist.mean
        - p_i * p_i * (red.pgf(z2, 1) + z2 * red.pgf(z2, 2))
    )
    t2 = h * (2.0 * p_i * z * red.pgf(z2, 1) - (z - q_i) * dist.mean)
    t3 = 1.0 - eps - rho - red.pgf(z2, 0)
    t4 = (q_i2 - q_i * q_i) * h * h * (dist.pgf(1.0, 2) - red.pgf(z, 2))
    return t1 + t2 + t3 + t4


def _sigma_nsw(dist, eps, p_i, q_i, q_i2, z, h, rho):
    mu = dist.mean
    one_m_eps = 1.0 - eps
    t1 = rho * (one_m_eps - rho) / one_m_eps
    t2 = -h * (z - q_i) * (1.0 - 2.0 * eps + 2.0 * eps * rho / one_m_eps) * mu
    t3 = h * h * (
        (p_i * q_i - 2.0 * z * (z - q_i)) * mu
        + (z - q_i) ** 2 * (dist.variance + (1.0 - 2.0 * eps) / one_m_eps * mu * mu)
    )
    t4 = (q_i2 - q_i * q_i) * h * h * (dist.pgf(1.0, 2) - one_m_eps * dist.pgf(z, 2))
    return t1 + t2 + t3 + t4


def _epidemic_sigma(model, dist, red, eps, p_i, q_i, q_i2, z, h, rho):
    if model == "mr":
        return _sigma_mr(red, dist, eps, p_i, q_i, q_i2, z, h, rho)
    if model == "nsw":
        return _sigma_nsw(dist, eps, p_i, q_i, q_i2, z, h, rho)
    raise ValueError(f"unknown model {model!r}")


def _check_model(model):
    if model not in ("mr", "nsw"):
        raise ValueError(f"model must be 'mr' or 'nsw', got {model!r}")


# ---------------------------------------------------------------------------
# Public theory operations
# ---------------------------------------------------------------------------


def epidemic_theory_positive(
    model: str,
    dist: DegreeDistribution,
    eps: float,
    period: InfectiousPeriod,
    lam: float,
    eps_i=None,
) -> TheoryResult:
    """Positive limiting initial fraction eps: unconditional final-size CLT."""
    _check_model(model)
    if not 0 < eps < 1:
        raise TheoryError("positive-fraction theory requires 0 < eps < 1")
    if eps_i is None:
        red = dist.reduced_uniform(eps)
    else:
        if model == "nsw":
            raise TheoryError("the i.i.d.-degree model fixes eps_i = eps * p_i")
        red = dist.reduced(eps_i)
        if abs(red.eps - eps) > 1e-9:
            raise TheoryError("eps_i must sum to eps")
    p_i, q_i, q_i2 = transmission_params(period, lam)
    eps_vec = dist.pmf - red.coeffs
    if not any(eps_vec[i] > 0 and dist.pmf[i] > 0 for i in range(1, dist.dmax + 1)):
        raise TheoryError("need p_i * eps_i > 0 for at least one positive degree")
    if p_i >= 1.0:
        p1_minus = red.coeffs[1] if dist.dmax >= 1 else 0.0
        if p1_minus <= 0:
            raise TheoryError("p_I = 1 requires p_1 - eps_1 > 0")
    z, residual = solve_root(red, p_i, q_i, dist.mean, "positive")
    rho = 1.0 - eps - red.pgf(z, 0)
    h = _h_of_z(red, p_i, q_i, z, dist.mean)
    sigma2 = _epidemic_sigma(model, dist, red, eps, p_i, q_i, q_i2, z, h, rho)
    return TheoryResult(
        regime="positive_fraction",
        variant=f"{model}_epidemic",
        z=z,
        tau=-math.log(z),
        rho=rho,
        h=h,
        r0=basic_reproduction_number(dist, p_i),
        p_crit=critical_transmission(dist),
        p_maj=major_outbreak_prob(dist, p_i),
        sigma2=sigma2,
        residual=residual,
        clt_mean=rho,
    )


def epidemic_theory_major(
    model: str, dist: DegreeDistribution, period: InfectiousPeriod, lam: float
) -> TheoryResult:
    """Fixed (or o(n)) initial infectives: CLT conditional on a major outbreak."""
    _check_model(model)
    p_i, q_i, q_i2 = transmission_params(period, lam)
    return _major_result(model, dist, p_i, q_i, q_i2, variant=f"{model}_epidemic")


def _major_result(model, dist, p_i, q_i, q_i2, variant):
    r0 = basic_reproduction_number(dist, p_i)
    if r0 <= 1.0:
        raise SubcriticalError(f"R0 = {r0:.6g} <= 1: subcritical")
    if p_i >= 1.0 and (dist.dmax < 1 or dist.pmf[1] <= 0):
        raise TheoryError("p_I = 1 requires p_1 > 0")
    red = ReducedPgf(dist.pmf, dist=dist)  # eps = 0
    z, residual = solve_root(red, p_i, q_i, dist.mean, "major")
    rho = 1.0 - dist.pgf(z, 0)
    h = _h_of_z(red, p_i, q_i, z, dist.mean)
    sigma2 = _epidemic_sigma(model, dist, red, 0.0, p_i, q_i, q_i2, z, h, rho)
    return TheoryResult(
        regime="conditional_major",
        variant=variant,
        z=z,
        tau=-math.log(z),
        rho=rho,
        h=h,
        r0=r0,
        p_crit=critical_transmission(dist),
        p_maj=major_outbreak_prob(dist, p_i),
        sigma2=sigma2,
        residual=residual,
        clt_mean=rho,
    )


def percolation_theory(
    kind: str, model: str, dist: DegreeDistribution, pi: float
) -> TheoryResult:
    """Largest-component CLT after bond or site percolation with retention pi.

    Bond percolation coincides with the constant-period epidemic at p_I = pi.
    Site percolation counts only retained vertices, so its CLT mean is pi*rho
    and its variance adds the retention-thinning terms.
    """
    _check_model(model)
    if kind not in ("bond", "site"):
        raise ValueError(f"kind must be 'bond' or 'site', got {kind!r}")
    if not 0 < pi < 1:
        raise TheoryError("percolation theory requires pi in (0, 1)")
    q = 1.0 - pi
    if kind == "bond":
        res = _major_result(model, dist, pi, q, q * q, variant=f"{model}_bond")
        return replace(res, regime="percolation")
    bond = _major_result(model, dist, pi, q, q * q, variant=f"{model}_bond")
    z, h, rho = bond.z, bond.h, bond.rho
    mu = dist.mean
    sigma2 = (
        pi * pi * (bond.sigma2 + pi * q * h * h * (dist.pgf(1.0, 2) - dist.pgf(z, 2)))
        + pi * q * (rho - 2.0 * h * (1.0 - z) * mu)
    )
    return TheoryResult(
        regime="percolation",
        variant=f"{model}_site",
        z=z,
        tau=bond.tau,
        rho=rho,
        h=h,
        r0=bond.r0,
        p_crit=bond.p_crit,
        p_maj=bond.p_maj,
        sigma2=sigma2,
        residual=bond.residual,
        clt_mean=pi * rho,
    )


def giant_component_theory(model: str, dist: DegreeDistribution) -> TheoryResult:
    """Largest-component CLT of the unpercolated graph (p_I = 1 epidemic)."""
    _check_model(model)
    res = _major_result(model, dist, 1.0, 0.0, 0.0, variant=f"{model}_giant")
    return replace(res, regime="percolation")
