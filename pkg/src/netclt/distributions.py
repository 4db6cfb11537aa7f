"""Degree distributions and infectious-period distributions.

Degree distributions are finite pmfs over 0..dmax with exact generating
function machinery (all pgf values are finite sums, no special-function
library involved).  Unbounded families (Poisson, geometric, power law with
exponential cutoff) are truncated at a configurable tail mass and
renormalised, so every downstream formula operates on an exact polynomial.

Infectious periods expose the Laplace transform phi(theta) = E[exp(-theta I)],
from which the per-neighbour transmission probability p_I = 1 - phi(lambda)
and the pair-failure probability q_I2 = phi(2 lambda) follow.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DegreeDistribution",
    "ReducedPgf",
    "InfectiousPeriod",
    "ConstantPeriod",
    "ExponentialPeriod",
    "ZeroOrInfinityPeriod",
    "CustomPeriod",
    "build_constant",
    "build_poisson",
    "build_geometric",
    "build_power_cutoff",
    "from_pmf",
    "pgf_derivative",
    "transmission_params",
    "sample_transmission_count",
    "period_matched_to_transmission",
    "parse_degree_spec",
    "parse_period_spec",
]

# tail mass below this is dropped before renormalising; tight enough that
# truncated second moments of the unbounded families are exact to ~1e-9
DEFAULT_TAIL_TOL = 1e-14

_PROB_ATOL = 1e-12


def _poly_deriv_value(coeffs: np.ndarray, s, k: int):
    """Evaluate the k-th derivative of sum_i c_i s^i as an exact finite sum.

    s may be a scalar or an array (evaluation is vectorised).
    """
    if not 0 <= k <= 3:
        raise ValueError(f"derivative order must be in 0..3, got {k}")
    c = coeffs
    if k > 0:
        i = np.arange(len(c), dtype=np.float64)
        w = c.astype(np.float64)
        for j in range(k):
            w = w * (i - j)
        c = w[k:]
    # Horner evaluation; empty coefficient list means the derivative is 0.
    if len(c) == 0:
        return np.zeros_like(s, dtype=np.float64) if np.ndim(s) else 0.0
    out = np.polynomial.polynomial.polyval(s, c)
    return out if np.ndim(out) else float(out)


class DegreeDistribution:
    """Finite-support degree pmf with pgf f(s) = sum_i p_i s^i.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, pmf, label: str | None = None):
        pmf = np.asarray(pmf, dtype=np.float64)
        if pmf.ndim != 1 or len(pmf) == 0:
            raise ValueError("pmf must be a non-empty 1-d sequence")
        if np.any(pmf < 0):
            raise ValueError("pmf entries must be nonnegative")
        total = pmf.sum()
        if abs(total - 1.0) > _PROB_ATOL:
            raise ValueError(f"pmf must sum to 1 within {_PROB_ATOL}, got {total!r}")
        self.pmf = pmf
        self.pmf.flags.writeable = False
        self.dmax = len(pmf) - 1
        self.label = label or f"pmf[d<={self.dmax}]"
        i = np.arange(len(pmf), dtype=np.float64)
        self.mean = float(np.dot(i, pmf))
        self.variance = float(np.dot(i * i, pmf) - self.mean**2)
        # E[Dtilde - 1] where Dtilde is the size-biased degree: f''(1)/mu.
        self.size_biased_mean = (
            float(np.dot(i * (i - 1.0), pmf)) / self.mean if self.mean > 0 else math.nan
        )
        self._cdf = np.cumsum(pmf)
        self._cdf[-1] = 1.0
        self._cdf.flags.writeable = False

    @property
    def coeffs(self) -> np.ndarray:
        return self.pmf

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    def pgf(self, s, k: int = 0):
        """k-th derivative of the pgf at s (k = 0 gives f(s) itself)."""
        return _poly_deriv_value(self.pmf, s, k)

    def reduced(self, eps_i) -> "ReducedPgf":
        """Coefficients p_i - eps_i for a given initial-infective profile."""
        return ReducedPgf(self.pmf - np.asarray(eps_i, dtype=np.float64), dist=self)

    def reduced_uniform(self, eps: float) -> "ReducedPgf":
        """Reduced pgf with eps_i = eps * p_i (the i.i.d.-degree convention)."""
        if not 0 <= eps < 1:
            raise ValueError(f"eps must be in [0, 1), got {eps}")
        return ReducedPgf((1.0 - eps) * self.pmf, dist=self)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n i.i.d. degree draws by inverse-cdf."""
        u = rng.random(n)
        return np.searchsorted(self._cdf, u, side="left").astype(np.int64)

    def __repr__(self):
        return f"DegreeDistribution({self.label}, mean={self.mean:.6g})"


class ReducedPgf:
    """Polynomial sum_i (p_i - eps_i) s^i used by the positive-fraction theory."""

    def __init__(self, coeffs, dist: DegreeDistribution | None = None):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if np.any(coeffs < -_PROB_ATOL) or np.any(coeffs > 1 + _PROB_ATOL):
            raise ValueError("reduced-pgf coefficients must lie in [0, 1]")
        self.coeffs = np.clip(coeffs, 0.0, 1.0)
        self.coeffs.flags.writeable = False
        self.eps = float(1.0 - self.coeffs.sum())
        self.dist = dist

    @property
    def eps_i(self) -> np.ndarray:
        if self.dist is None:
            raise ValueError("reduced pgf was built without a parent distribution")
        return self.dist.pmf - self.coeffs

    def pgf(self, s, k: int = 0):
        return _poly_deriv_value(self.coeffs, s, k)


def pgf_derivative(dist, s: float, k: int = 0) -> float:
    """k-th pgf derivative for a DegreeDistribution or ReducedPgf."""
    return dist.pgf(s, k)


# ---------------------------------------------------------------------------
# Degree-family builders
# ---------------------------------------------------------------------------


def build_constant(d: int) -> DegreeDistribution:
    """All individuals have degree d."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    pmf = np.zeros(d + 1)
    pmf[d] = 1.0
    return DegreeDistribution(pmf, label=f"const:{d}")


def build_poisson(mean: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DegreeDistribution:
    """Poisson(mean), truncated at tail mass < tail_tol and renormalised."""
    if mean <= 0:
        raise ValueError("mean must be positive")
    _check_tail_tol(tail_tol)
    terms = [math.exp(-mean)]
    acc = terms[0]
    k = 0
    while 1.0 - acc >= tail_tol:
        k += 1
        terms.append(terms[-1] * mean / k)
        acc += terms[-1]
    pmf = np.array(terms)
    return DegreeDistribution(pmf / pmf.sum(), label=f"poisson:{mean:g}")


def build_geometric(p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DegreeDistribution:
    """Geometric on {0,1,...} with p_k = (1-p)^k p, truncated and renormalised."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    _check_tail_tol(tail_tol)
    # P(D > k) = (1-p)^(k+1); smallest dmax with tail < tol.
    dmax = max(0, math.ceil(math.log(tail_tol) / math.log1p(-p)) - 1)
    pmf = p * (1.0 - p) ** np.arange(dmax + 1, dtype=np.float64)
    return DegreeDistribution(pmf / pmf.sum(), label=f"geom:{p:g}")


def build_power_cutoff(
    alpha: float, kappa: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> DegreeDistribution:
    """Power law with exponential cutoff: p_k proportional to k^-alpha e^(-k/kappa), k >= 1.

    The normaliser is the truncated polylogarithm series sum_k k^-alpha theta^k
    with theta = e^(-1/kappa) < 1, which converges geometrically.
    """
    if alpha <= 0 or kappa <= 0:
        raise ValueError("alpha and kappa must be positive")
    _check_tail_tol(tail_tol)
    theta = math.exp(-1.0 / kappa)
    weights = [0.0]  # p_0 = 0 for this family
    k = 0
    total = 0.0
    while True:
        k += 1
        w = k**-alpha * theta**k
        weights.append(w)
        total += w
        # remaining mass is bounded by the geometric tail theta^(k+1)/(1-theta)
        # times the decreasing factor (k+1)^-alpha
        bound = (k + 1) ** -alpha * theta ** (k + 1) / (1.0 - theta)
        if bound < tail_tol * total:
            break
    pmf = np.array(weights)
    return DegreeDistribution(pmf / pmf.sum(), label=f"power:{alpha:g}:{kappa:g}")


def from_pmf(values) -> DegreeDistribution:
    """Distribution from explicit probabilities p_0, p_1, ... (renormalised)."""
    pmf = np.asarray(values, dtype=np.float64)
    if pmf.sum() <= 0:
        raise ValueError("pmf must have positive total mass")
    return DegreeDistribution(pmf / pmf.sum(), label="pmf:custom")


def _check_tail_tol(tail_tol: float):
    if not 0 < tail_tol < 1e-6:
        raise ValueError("tail_tol must be in (0, 1e-6)")


# ---------------------------------------------------------------------------
# Infectious periods
# ---------------------------------------------------------------------------


class InfectiousPeriod:
    """Base class: a nonnegative random duration I with Laplace transform phi."""

    kind = "custom"

    def laplace(self, theta: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> float:
        """One draw of I (may be math.inf)."""
        raise NotImplementedError


class ConstantPeriod(InfectiousPeriod):
    kind = "constant"

    def __init__(self, duration: float = 1.0):
        if duration < 0:
            raise ValueError("duration must be nonnegative")
        self.duration = float(duration)

    def laplace(self, theta: float) -> float:
        return math.exp(-theta * self.duration)

    def sample(self, rng) -> float:
        return self.duration

    def __repr__(self):
        return f"ConstantPeriod({self.duration:g})"


class ExponentialPeriod(InfectiousPeriod):
    kind = "exponential"

    def __init__(self, rate: float):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)

    def laplace(self, theta: float) -> float:
        return self.rate / (self.rate + theta)

    def sample(self, rng) -> float:
        return rng.exponential(1.0 / self.rate)

    def __repr__(self):
        return f"ExponentialPeriod(rate={self.rate:g})"


class ZeroOrInfinityPeriod(InfectiousPeriod):
    """I = infinity with probability pi, else 0 (the site-percolation period)."""

    kind = "zero_or_infinity"

    def __init__(self, prob_infinite: float):
        if not 0 <= prob_infinite <= 1:
            raise ValueError("prob_infinite must be in [0, 1]")
        self.prob_infinite = float(prob_infinite)

    def laplace(self, theta: float) -> float:
        # exp(-theta*inf) = 0 for theta > 0; at theta = 0 the transform is 1.
        if theta == 0:
            return 1.0
        return 1.0 - self.prob_infinite

    def sample(self, rng) -> float:
        return math.inf if rng.random() < self.prob_infinite else 0.0

    def __repr__(self):
        return f"ZeroOrInfinityPeriod(pi={self.prob_infinite:g})"


class CustomPeriod(InfectiousPeriod):
    kind = "custom"

    def __init__(self, laplace_fn, sampler_fn):
        self._laplace = laplace_fn
        self._sampler = sampler_fn

    def laplace(self, theta: float) -> float:
        return float(self._laplace(theta))

    def sample(self, rng) -> float:
        return float(self._sampler(rng))


def transmission_params(period: InfectiousPeriod, lam: float):
    """(p_I, q_I, q_I2) for contact rate lam: p_I = 1 - phi(lam), q_I2 = phi(2 lam)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    q = period.laplace(lam)
    q2 = period.laplace(2.0 * lam)
    return 1.0 - q, q, q2


def sample_transmission_count(
    period: InfectiousPeriod, lam: float, d: int, rng: np.random.Generator
) -> int:
    """One draw of Bin(d, 1 - e^(-lam*I)) with a fresh I."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0 or lam == 0:
        return 0
    if period.kind == "constant":
        p = -math.expm1(-lam * period.duration)
        return int(rng.binomial(d, p))
    if period.kind == "zero_or_infinity":
        return d if rng.random() < period.prob_infinite else 0
    dur = period.sample(rng)
    p = 1.0 if math.isinf(dur) else -math.expm1(-lam * dur)
    return int(rng.binomial(d, p))


def period_matched_to_transmission(p_i: float, kind: str = "constant"):
    """(period, lambda) pair realising a given per-neighbour transmission probability.

    'constant' gives I = 1 with lambda = -ln(1 - p_I); 'zero_or_infinity' gives
    P(I = inf) = p_I with an arbitrary positive rate (the outcome law depends on
    lambda only through p_I for that period).
    """
    if not 0 <= p_i <= 1:
        raise ValueError("p_I must be in [0, 1]")
    if kind == "constant":
        if p_i >= 1:
            return ZeroOrInfinityPeriod(1.0), 1.0
        return ConstantPeriod(1.0), -math.log1p(-p_i)
    if kind == "zero_or_infinity":
        return ZeroOrInfinityPeriod(p_i), 1.0
    raise ValueError(f"unknown matched-period kind {kind!r}")


# ---------------------------------------------------------------------------
# CLI spec grammar
# ---------------------------------------------------------------------------


def parse_degree_spec(spec: str) -> DegreeDistribution:
    """Parse 'const:5', 'poisson:5', 'geom:0.1667', 'power:1:13.796' or 'pmf:p0,p1,...'."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    try:
        if name == "const":
            return build_constant(int(rest))
        if name == "poisson":
            return build_poisson(float(rest))
        if name == "geom":
            return build_geometric(float(rest))
        if name == "power":
            alpha, kappa = rest.split(":")
            return build_power_cutoff(float(alpha), float(kappa))
        if name == "pmf":
            return from_pmf([float(x) for x in rest.split(",")])
    except ValueError as exc:
        raise ValueError(f"bad degree spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown degree family in {spec!r}")


def parse_period_spec(spec: str) -> InfectiousPeriod | None:
    """Parse 'const', 'const:2', 'exp:0.5' or 'zeroinf[:pi].

    'const' with no duration and 'zeroinf' with no probability return None,
    meaning "match the period to the requested p_I".
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "const":
        return ConstantPeriod(float(rest)) if rest else None
    if name == "exp":
        return ExponentialPeriod(float(rest))
    if name == "zeroinf":
        return ZeroOrInfinityPeriod(float(rest)) if rest else None
    raise ValueError(f"unknown period spec {spec!r}")
