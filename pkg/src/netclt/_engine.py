"""Jit-compiled replicate kernels for the count-based final-size engine.

Each replicate receives its own numpy Generator (derived from the ensemble
seed and the replicate index), so results are independent of scheduling.
Kernels release the GIL; the ensemble driver fans replicates out over
threads in fixed-size chunks.

Period encoding: kind 0 = constant duration (param = transmission
probability 1 - e^(-lam*c)), kind 1 = exponential (param = rate),
kind 2 = zero-or-infinity (param = P(I = inf)).
"""

import numpy as np
from numba import njit

KIND_CONSTANT = 0
KIND_EXPONENTIAL = 1
KIND_ZERO_OR_INF = 2


@njit(cache=True, nogil=True)
def _bernoulli_sum(rng, d, p):
    k = 0
    for _ in range(d):
        if rng.random() < p:
            k += 1
    return k


@njit(cache=True, nogil=True)
def _sample_degree(rng, cdf):
    u = rng.random()
    lo = 0
    hi = len(cdf) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def _transmission(rng, d, kind, param, lam):
    """(number of transmitting half-edges out of d, whether I = inf was drawn)."""
    if d <= 0:
        if kind == KIND_ZERO_OR_INF:
            return 0, rng.random() < param
        return 0, False
    if kind == KIND_CONSTANT:
        return _bernoulli_sum(rng, d, param), False
    if kind == KIND_EXPONENTIAL:
        if lam <= 0.0:
            return 0, False
        dur = -np.log1p(-rng.random()) / param
        p = -np.expm1(-lam * dur)
        return _bernoulli_sum(rng, d, p), False
    # zero-or-infinity
    is_inf = rng.random() < param
    if is_inf and lam > 0.0:
        return d, True
    return 0, is_inf


@njit(cache=True, nogil=True)
def _run_chain(rng, x, y_e, z_e, kind, param, lam, track_inf):
    """Drain the infective half-edges; x is consumed in place.

    Every pairing removes exactly two unpaired half-edges; the denominator
    excludes the pairing half-edge itself, so an infective-infective event
    has weight y_E - 1.
    """
    dmax = len(x) - 1
    x_e = 0
    for i in range(1, dmax + 1):
        x_e += i * x[i]
    t_total = 0
    v_total = 0
    while y_e > 0:
        m = x_e + y_e + z_e - 1
        if m <= 0:
            break  # lone unpaired infective stub (odd half-edge total)
        u = rng.integers(0, m)
        if u < y_e - 1:
            y_e -= 2
        elif u < y_e - 1 + z_e:
            y_e -= 1
            z_e -= 1
        else:
            t = u - (y_e - 1) - z_e
            acc = 0
            i = 1
            while True:
                acc += i * x[i]
                if t < acc or i == dmax:
                    break
                i += 1
            x[i] -= 1
            x_e -= i
            t_total += 1
            k, was_inf = _transmission(rng, i - 1, kind, param, lam)
            if track_inf and was_inf:
                v_total += 1
            y_e += k - 1
            z_e += i - 1 - k
    return t_total, v_total


@njit(cache=True, nogil=True)
def _seed_counts(rng, a_i, kind, param, lam):
    """Half-edges created by the initial infectives (full degree each)."""
    y_e = 0
    z_e = 0
    for i in range(len(a_i)):
        for _ in range(a_i[i]):
            k, _ = _transmission(rng, i, kind, param, lam)
            y_e += k
            z_e += i - k
    return y_e, z_e


@njit(cache=True, nogil=True)
def replicate_mr(rng, v_counts, a_counts, sample_initials, a_total, kind, param, lam, track_inf):
    dmax = len(v_counts) - 1
    x = v_counts.copy()
    if sample_initials:
        a_i = np.zeros(dmax + 1, dtype=np.int64)
        remaining = v_counts.copy()
        n_rem = 0
        for i in range(dmax + 1):
            n_rem += remaining[i]
        for _ in range(a_total):
            u = rng.integers(0, n_rem)
            acc = 0
            for i in range(dmax + 1):
                acc += remaining[i]
                if u < acc:
                    a_i[i] += 1
                    remaining[i] -= 1
                    break
            n_rem -= 1
    else:
        a_i = a_counts
    for i in range(dmax + 1):
        x[i] -= a_i[i]
    y_e, z_e = _seed_counts(rng, a_i, kind, param, lam)
    return _run_chain(rng, x, y_e, z_e, kind, param, lam, track_inf)


@njit(cache=True, nogil=True)
def replicate_nsw(rng, cdf, n, a_total, kind, param, lam, track_inf):
    dmax = len(cdf) - 1
    x = np.zeros(dmax + 1, dtype=np.int64)
    y_e = 0
    z_e = 0
    for _ in range(a_total):
        d = _sample_degree(rng, cdf)
        k, _ = _transmission(rng, d, kind, param, lam)
        y_e += k
        z_e += d - k
    for _ in range(n - a_total):
        x[_sample_degree(rng, cdf)] += 1
    return _run_chain(rng, x, y_e, z_e, kind, param, lam, track_inf)
