"""Independent verification of the closed-form variances.

Three structurally different computations back up the theory module:

* the scaled variance is re-derived by adaptive quadrature of the ten
  exit-projection integrands over the transformed time interval [0, tau],
  plus the initial-condition quadratic form, instead of the simplified
  closed forms;
* final-size distributions on tiny instances are enumerated exactly over
  all half-edge matchings and transmission outcomes;
* the fluid trajectories are re-obtained by numerically integrating the
  drift ODEs and compared against their exponential closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .distributions import (
    ConstantPeriod,
    DegreeDistribution,
    InfectiousPeriod,
    ReducedPgf,
    ZeroOrInfinityPeriod,
)

__all__ = [
    "DeterministicPath",
    "VarianceIntegrands",
    "variance_by_quadrature",
    "site_variance_by_quadrature",
    "enumerate_final_size",
    "fluid_consistency_check",
    "j_integral",
]

_QUAD_OPTS = dict(epsabs=1e-11, epsrel=1e-11, limit=200)

MAX_ENUM_HALF_EDGES = 10


class DeterministicPath:
    """Fluid limit of the transformed jump chain, in closed form.

    State: susceptible coefficients x_i(t), infective half-edge density
    y_E(t), recovered half-edge density z_E(t).  The default initial state is
    the theorem convention x_i(0) = p_i - eps_i, y_E(0) = p_I * eps_E,
    z_E(0) = q_I * eps_E, which makes the total half-edge density mu_D.
    """

    def __init__(self, red: ReducedPgf, p_i: float, q_i: float, mu_d: float):
        self.red = red
        self.p = p_i
        self.q = q_i
        self.mu = mu_d
        eps_e = mu_d - red.pgf(1.0, 1)
        self.x0 = red.coeffs.copy()
        self.y0 = p_i * eps_e
        self.z0 = q_i * eps_e
        # integration constants of the closed-form solution
        self._eta0 = red.pgf(1.0, 1) + self.y0 + self.z0
        self._s1 = self.z0 + q_i * red.pgf(1.0, 1)

    def x_e(self, t):
        s = np.exp(-t)
        return s * self.red.pgf(s, 1)

    def z_e(self, t):
        return self._s1 * np.exp(-t) - self.q * self.x_e(t)

    def y_e(self, t):
        return self._eta0 * np.exp(-2.0 * t) - self._s1 * np.exp(-t) - self.p * self.x_e(t)

    def eta(self, t):
        return self._eta0 * np.exp(-2.0 * t)

    def drift(self, w):
        """Right-hand side of the fluid ODEs for state (x_0..x_dmax, y_E, z_E)."""
        x = w[:-2]
        i = np.arange(len(x), dtype=np.float64)
        ix = i * x
        x_e = ix.sum()
        pairs = (i * (i - 1.0) * x).sum()
        dx = -ix
        dy = self.p * pairs - x_e - 2.0 * w[-2] - w[-1]
        dz = self.q * pairs - w[-1]
        return np.concatenate([dx, [dy, dz]])

    def a_at(self, tau):
        z = math.exp(-tau)
        return z * z * (self.p * self.red.pgf(z, 2) - self.mu)

    def b_at(self, tau):
        return self.x_e(tau) / self.a_at(tau)


class VarianceIntegrands:
    """The ten scalar integrands of the Gaussian exit-variance decomposition."""

    def __init__(self, path: DeterministicPath, q_i2: float, z: float):
        self.path = path
        self.z = z
        self.tau = -math.log(z)
        self.q2 = q_i2
        self.b = path.b_at(self.tau)

    # projection coefficients at transformed time u
    def c_i_half(self, u):
        return self.b * np.exp(-2.0 * (self.tau - u))

    def c_r_half(self, u):
        w = np.exp(-(self.tau - u))
        return -self.b * w * (1.0 - w)

    def c_j_half(self, u):
        return self.b * np.exp(-(self.tau - u))

    def c_sus(self, i, u):
        w = math.exp(-(self.tau - u))
        return w**i + self.b * i * (w * w - self.path.p * w**i - self.path.q * w)

    def f_list(self):
        path, b, tau, z = self.path, self.b, self.tau, self.z
        p, q, red = path.p, path.q, path.red
        q2mq2 = self.q2 - q * q
        zf1 = z * red.pgf(z, 1)
        z2f2 = z * z * red.pgf(z, 2)
        cI, cR, cJ = self.c_i_half, self.c_r_half, self.c_j_half

        def f1(u):
            return 4.0 * cI(u) ** 2 * path.eta(u)

        def f2(u):
            return (cJ(u) ** 2 - 4.0 * cI(u) * cJ(u)) * path.z_e(u)

        def f3(u):
            return q * (q * cJ(u) ** 2 - 4.0 * cI(u) * cJ(u)) * path.x_e(u)

        def f4(u):
            s = np.exp(-u)
            return cJ(u) ** 2 * p * q * s * s * red.pgf(s, 2)

        def f5(u):
            s = np.exp(-u)
            return cJ(u) ** 2 * q2mq2 * s**3 * red.pgf(s, 3)

        def f6(u):
            return 2.0 * (2.0 * cI(u) - q * cJ(u)) * (1.0 - b * p) * zf1

        def f7(u):
            return -2.0 * b * p * (2.0 * cI(u) - q * cJ(u)) * z2f2

        def f8(u):
            s = np.exp(-(2.0 * tau - u))
            return (1.0 - b * p) ** 2 * s * red.pgf(s, 1)

        def f9(u):
            s = np.exp(-(2.0 * tau - u))
            return -b * p * (2.0 - 3.0 * b * p) * s * s * red.pgf(s, 2)

        def f10(u):
            s = np.exp(-(2.0 * tau - u))
            return b * p * b * p * s**3 * red.pgf(s, 3)

        return [f1, f2, f3, f4, f5, f6, f7, f8, f9, f10]

    def integral_sum(self):
        return sum(quad(f, 0.0, self.tau, **_QUAD_OPTS)[0] for f in self.f_list())

    def i1_closed_form(self):
        z2 = self.z * self.z
        return 2.0 * self.b**2 * self.path.mu * z2 * (1.0 - z2)


def j_integral(red, z: float, k: int) -> float:
    """Quadrature of J_k = int_0^tau e^(-k(2tau-u)) f^(k)(e^(-(2tau-u))) du."""
    tau = -math.log(z)

    def f(u):
        s = math.exp(-(2.0 * tau - u))
        return s**k * red.pgf(s, k)

    return quad(f, 0.0, tau, **_QUAD_OPTS)[0]


def _sigma0_mr(dist, red, q_i, q_i2, z, b):
    eps_i = dist.pmf - red.coeffs
    i = np.arange(len(eps_i), dtype=np.float64)
    var_y_i = i * (i - 1.0) * q_i2 + i * q_i - i * i * q_i * q_i
    sigma_y2 = float(np.dot(eps_i, var_y_i))
    # c_I - c_R at u = 0 collapses to b*z
    return (b * z) ** 2 * sigma_y2


def _sigma0_nsw(dist, red, integrands, p_i, q_i, q_i2, z, b):
    eps = red.eps
    # the i.i.d.-degree model pins the reduced coefficients to (1-eps) * p_i
    if not np.allclose(red.coeffs, (1.0 - eps) * dist.pmf, atol=1e-12):
        raise ValueError("i.i.d.-degree variance needs eps_i = eps * p_i")
    c = np.array([integrands.c_sus(i, 0.0) for i in range(dist.dmax + 1)])
    mean_c = float(np.dot(dist.pmf, c))
    sigma_a2 = float(np.dot(dist.pmf, c * c)) - mean_c * mean_c
    fdd1 = dist.pgf(1.0, 2)
    common = (q_i2 - q_i * q_i) * fdd1 + p_i * q_i * dist.mean
    var_ye = common + p_i * p_i * dist.variance
    var_ze = common + q_i * q_i * dist.variance
    cov = -common + p_i * q_i * dist.variance
    ci0 = b * z * z
    cr0 = -b * z * (1.0 - z)
    sigma_b2 = ci0 * ci0 * var_ye + 2.0 * ci0 * cr0 * cov + cr0 * cr0 * var_ze
    return (1.0 - eps) * sigma_a2 + eps * sigma_b2


def variance_by_quadrature(
    model: str, reduced: ReducedPgf, p_i: float, q_i: float, q_i2: float, z: float
) -> float:
    """Scaled final-size variance assembled from the raw integral decomposition."""
    dist = reduced.dist
    if dist is None:
        raise ValueError("reduced pgf must carry its parent distribution")
    path = DeterministicPath(reduced, p_i, q_i, dist.mean)
    vi = VarianceIntegrands(path, q_i2, z)
    if model == "mr":
        sigma0 = _sigma0_mr(dist, reduced, q_i, q_i2, z, vi.b)
    elif model == "nsw":
        sigma0 = _sigma0_nsw(dist, reduced, vi, p_i, q_i, q_i2, z, vi.b)
    else:
        raise ValueError(f"unknown model {model!r}")
    return sigma0 + vi.integral_sum()


def site_variance_by_quadrature(model: str, dist: DegreeDistribution, pi: float, z: float) -> float:
    """Scaled variance of the retained-vertex count after site percolation.

    The underlying epidemic has I in {0, inf} with P(I = inf) = pi, so the
    jump integrals are those of that epidemic scaled by pi^2, plus the
    vertex-thinning integral; the initial-condition form is unthinned for the
    susceptible block and scales with pi^2 through the projection vector.
    """
    red = ReducedPgf(dist.pmf, dist=dist)
    q = 1.0 - pi
    q2 = 1.0 - pi  # Laplace transform of the zero-or-infinity period
    path = DeterministicPath(red, pi, q, dist.mean)
    vi = VarianceIntegrands(path, q2, z)
    tau = vi.tau

    def thinning(u):
        s = np.exp(-u)
        return pi * q * (path.x_e(u) - 2.0 * pi * vi.c_j_half(u) * s * s * red.pgf(s, 2))

    jumps = vi.integral_sum()
    extra = quad(thinning, 0.0, tau, **_QUAD_OPTS)[0]
    if model == "mr":
        sigma0 = 0.0  # deterministic degrees, no initial infectives
    elif model == "nsw":
        sigma0 = _sigma0_nsw(dist, red, vi, pi, q, q2, z, vi.b)
    else:
        raise ValueError(f"unknown model {model!r}")
    return pi * pi * (sigma0 + jumps) + extra


# ---------------------------------------------------------------------------
# Exact enumeration of tiny instances
# ---------------------------------------------------------------------------


def _matchings(half_edges):
    """All perfect matchings as (pair-list, probability) under uniform pairing."""
    if not half_edges:
        yield [], 1.0
        return
    first, rest = half_edges[0], half_edges[1:]
    w = 1.0 / len(rest)
    for idx in range(len(rest)):
        partner = rest[idx]
        remaining = rest[:idx] + rest[idx + 1 :]
        for pairs, prob in _matchings(remaining):
            yield [(first, partner)] + pairs, w * prob


def _component_of(n, edges, start):
    seen = {start}
    stack = [start]
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    while stack:
        v = stack.pop()
        for u in adj.get(v, ()):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def _spread_all_or_nothing(n, edges, start, transmitters):
    """Closure when node v passes infection to all neighbours iff v transmits."""
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    infected = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        if not transmitters[v]:
            continue
        for u in adj.get(v, ()):
            if u not in infected:
                infected.add(u)
                stack.append(u)
    return infected


def enumerate_final_size(
    degrees, period: InfectiousPeriod, lam: float, initial: int = 0
) -> dict[int, float]:
    """Exact pmf of the final size by brute force over matchings and outcomes.

    Only constant and zero-or-infinity periods are supported: transmission
    indicators are then independent per edge, respectively all-or-nothing per
    node, making the outcome enumeration finite.
    """
    degrees = [int(d) for d in degrees]
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be nonnegative")
    total = sum(degrees)
    if total > MAX_ENUM_HALF_EDGES:
        raise ValueError(f"instance too large: {total} half-edges > {MAX_ENUM_HALF_EDGES}")
    if not 0 <= initial < len(degrees):
        raise ValueError("initial node out of range")

    if isinstance(period, ConstantPeriod):
        mode = "edge"
        p_t = -math.expm1(-lam * period.duration)
    elif isinstance(period, ZeroOrInfinityPeriod):
        mode = "node"
        p_t = period.prob_infinite
    else:
        raise ValueError("enumeration supports constant and zero-or-infinity periods")

    owners = [v for v, d in enumerate(degrees) for _ in range(d)]
    n = len(degrees)
    live = [v for v in range(n) if degrees[v] > 0]

    # with an odd half-edge total, one uniformly chosen half-edge is dropped
    if total % 2 == 1:
        pools = [
            (1.0 / total, [owners[j] for j in range(total) if j != drop])
            for drop in range(total)
        ]
    else:
        pools = [(1.0, owners)]

    pmf: dict[int, float] = {}
    for pool_w, pool in pools:
        for pairs, w_match in _matchings(list(range(len(pool)))):
            edges = [(pool[a], pool[b]) for a, b in pairs]
            base = pool_w * w_match
            if mode == "edge":
                m = len(edges)
                for mask in range(1 << m):
                    kept = [edges[j] for j in range(m) if mask >> j & 1]
                    k = bin(mask).count("1")
                    w = base * p_t**k * (1.0 - p_t) ** (m - k)
                    if w == 0.0:
                        continue
                    size = len(_component_of(n, kept, initial)) - 1
                    pmf[size] = pmf.get(size, 0.0) + w
            else:
                ln = len(live)
                for mask in range(1 << ln):
                    transmitters = [False] * n
                    k = 0
                    for j, v in enumerate(live):
                        if mask >> j & 1:
                            transmitters[v] = True
                            k += 1
                    w = base * p_t**k * (1.0 - p_t) ** (ln - k)
                    if w == 0.0:
                        continue
                    size = len(_spread_all_or_nothing(n, edges, initial, transmitters)) - 1
                    pmf[size] = pmf.get(size, 0.0) + w
    return dict(sorted(pmf.items()))


# ---------------------------------------------------------------------------
# Fluid-limit consistency
# ---------------------------------------------------------------------------


@dataclass
class FluidReport:
    max_abs_deviation: float
    y_at_tau: float
    a_at_tau: float
    eta_max_rel_error: float
    tau: float

    @property
    def ok(self) -> bool:
        return (
            self.max_abs_deviation <= 1e-8
            and abs(self.y_at_tau) <= 1e-10
            and self.a_at_tau < 0.0
            and self.eta_max_rel_error <= 1e-10
        )


def fluid_consistency_check(
    red: ReducedPgf, p_i: float, q_i: float, z: float, mu_d: float | None = None
) -> FluidReport:
    """Integrate the drift ODEs and compare against the closed-form solution."""
    if mu_d is None:
        if red.dist is None:
            raise ValueError("need mu_d or a reduced pgf with parent distribution")
        mu_d = red.dist.mean
    path = DeterministicPath(red, p_i, q_i, mu_d)
    tau = -math.log(z)
    w0 = np.concatenate([path.x0, [path.y0, path.z0]])
    ts = np.linspace(0.0, tau, 100)
    sol = solve_ivp(
        lambda t, w: path.drift(w),
        (0.0, tau),
        w0,
        t_eval=ts,
        method="DOP853",
        rtol=1e-12,
        atol=1e-13,
    )
    i = np.arange(len(path.x0), dtype=np.float64)
    closed = np.vstack(
        [path.x0[:, None] * np.exp(-np.outer(i, ts)), path.y_e(ts)[None, :], path.z_e(ts)[None, :]]
    )
    max_dev = float(np.max(np.abs(sol.y - closed)))
    eta_num = sol.y[:-2].T @ i + sol.y[-2] + sol.y[-1]
    eta_rel = float(np.max(np.abs(eta_num / path.eta(ts) - 1.0)))
    return FluidReport(
        max_abs_deviation=max_dev,
        y_at_tau=float(path.y_e(tau)),
        a_at_tau=path.a_at(tau),
        eta_max_rel_error=eta_rel,
        tau=tau,
    )
