"""Count-based Monte Carlo engine for epidemic final sizes.

The simulation walks the embedded jump chain of the time-transformed
pairing process: one infective half-edge is paired per step with a
uniformly chosen other unpaired half-edge, so a replicate costs O(total
half-edges) and the final size is distributionally exact (event times carry
no information about the final outcome).

State is aggregated: susceptible counts per degree, plus total infective
and recovered half-edge counts.  A pure-Python reference implementation
(`initialize` / `step` / `run_final_size`) supports arbitrary infectious
periods; `run_ensemble` dispatches standard periods to jit-compiled
replicate kernels with per-replicate RNG streams.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _engine
from .distributions import (
    ConstantPeriod,
    DegreeDistribution,
    ExponentialPeriod,
    InfectiousPeriod,
    ZeroOrInfinityPeriod,
    sample_transmission_count,
)
from .graphs import mr_degree_sequence

__all__ = [
    "InitialCondition",
    "EpidemicSetup",
    "SimState",
    "SimulationOutcome",
    "EnsembleResult",
    "initialize",
    "step",
    "run_final_size",
    "run_ensemble",
    "classify_major",
]

_CHUNK = 2048  # fixed fan-out granularity; results never depend on thread count


@dataclass(frozen=True)
class InitialCondition:
    """Initial infectives: a limiting fraction or a fixed count.

    Per-degree profiles are optional; without one, fraction mode splits
    eps proportionally to the degree pmf and count mode samples the
    infectives uniformly without replacement.
    """

    eps: float | None = None
    eps_i: tuple | None = None
    a: int | None = None
    a_i: tuple | None = None

    @classmethod
    def fraction(cls, eps: float, eps_i=None):
        if not 0 <= eps <= 1:
            raise ValueError("eps must be in [0, 1]")
        return cls(eps=float(eps), eps_i=None if eps_i is None else tuple(eps_i))

    @classmethod
    def count(cls, a: int, a_i=None):
        if a < 0:
            raise ValueError("a must be nonnegative")
        if a_i is not None:
            a_i = tuple(int(x) for x in a_i)
            if sum(a_i) != a:
                raise ValueError("a_i must sum to a")
        return cls(a=int(a), a_i=a_i)


@dataclass(frozen=True)
class EpidemicSetup:
    model: str  # 'mr' | 'nsw'
    n: int
    degree: DegreeDistribution
    period: InfectiousPeriod
    lam: float
    initial: InitialCondition
    mode: str = "epidemic"  # 'epidemic' | 'site' (site additionally counts I=inf cases)

    def __post_init__(self):
        if self.model not in ("mr", "nsw"):
            raise ValueError(f"model must be 'mr' or 'nsw', got {self.model!r}")
        if self.mode not in ("epidemic", "site"):
            raise ValueError(f"mode must be 'epidemic' or 'site', got {self.mode!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


@dataclass
class SimState:
    x: np.ndarray  # susceptibles by degree
    y_e: int  # infective half-edges
    z_e: int  # recovered half-edges
    v: int  # infected-with-I=inf counter (site mode)
    t_i: np.ndarray  # infections by degree
    x_e: int  # cached susceptible half-edges
    initial_count: int

    @property
    def total_unpaired(self) -> int:
        return self.x_e + self.y_e + self.z_e


@dataclass(frozen=True)
class SimulationOutcome:
    n: int
    t: int
    t_i: np.ndarray
    v: int
    major: bool
    initial_count: int


def classify_major(t: int, n: int) -> bool:
    """Major outbreak: final size at least ln(n) (natural log)."""
    if n < 2:
        raise ValueError("n must be >= 2 to classify outbreaks")
    return t >= math.log(n)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _largest_remainder(targets: np.ndarray, total: int) -> np.ndarray:
    base = np.floor(targets).astype(np.int64)
    deficit = total - int(base.sum())
    if deficit > 0:
        # break fraction ties toward lower degree for reproducibility
        order = np.argsort(-(targets - base), kind="stable")
        base[order[:deficit]] += 1
    return base


def mr_class_sizes(setup: EpidemicSetup) -> np.ndarray:
    """Per-degree node counts v_i of the deterministic-degree model."""
    seq = mr_degree_sequence(setup.degree, setup.n)
    return np.bincount(seq, minlength=setup.degree.dmax + 1).astype(np.int64)


def resolve_initial(setup: EpidemicSetup):
    """(a_total, a_i or None) with fraction specs rounded to integer counts.

    For the deterministic-degree model a_i = None means the infectives are
    sampled uniformly without replacement per replicate; for the
    i.i.d.-degree model initial degrees are always fresh draws from D.
    """
    init = setup.initial
    n = setup.n
    dist = setup.degree
    if setup.model == "nsw" and (init.a_i is not None or init.eps_i is not None):
        raise ValueError(
            "per-degree initial profiles apply to the deterministic-degree "
            "model only; i.i.d.-degree infectives are sampled uniformly"
        )
    if init.a is not None:
        a_total = init.a
        a_i = None if init.a_i is None else np.asarray(init.a_i, dtype=np.int64)
    else:
        a_total = _round_half_up(n * init.eps)
        if setup.model == "mr":
            eps_i = (
                init.eps * dist.pmf
                if init.eps_i is None
                else np.asarray(init.eps_i, dtype=np.float64)
            )
            if len(eps_i) != dist.dmax + 1:
                raise ValueError("eps_i must have one entry per degree 0..dmax")
            a_i = _largest_remainder(n * eps_i, a_total)
        else:
            a_i = None  # i.i.d. degrees: uniform sampling is automatic
    if a_total > n:
        raise ValueError(f"initial infectives a={a_total} exceed n={n}")
    return a_total, a_i


def initialize(setup: EpidemicSetup, rng: np.random.Generator) -> SimState:
    """Draw the initial chain state (reference path)."""
    dist = setup.degree
    a_total, a_i = resolve_initial(setup)
    if dist.mean <= 0 and setup.n > a_total:
        raise ValueError("degree distribution must have positive mean")
    dmax = dist.dmax
    if setup.model == "mr":
        v = mr_class_sizes(setup)
        if a_i is None:
            a_i = rng.multivariate_hypergeometric(v, a_total).astype(np.int64)
        if len(a_i) != dmax + 1:
            raise ValueError("a_i must have one entry per degree 0..dmax")
        if np.any(a_i > v):
            raise ValueError("a_i exceeds the class size v_i for some degree")
        x = v - a_i
        init_degrees = np.repeat(np.arange(dmax + 1), a_i)
    else:
        init_degrees = dist.sample(a_total, rng)
        sus_degrees = dist.sample(setup.n - a_total, rng)
        x = np.bincount(sus_degrees, minlength=dmax + 1).astype(np.int64)
    y_e = 0
    z_e = 0
    for d in init_degrees:
        k = sample_transmission_count(setup.period, setup.lam, int(d), rng)
        y_e += k
        z_e += int(d) - k
    x_e = int(np.dot(np.arange(dmax + 1), x))
    return SimState(
        x=x,
        y_e=y_e,
        z_e=z_e,
        v=0,
        t_i=np.zeros(dmax + 1, dtype=np.int64),
        x_e=x_e,
        initial_count=a_total,
    )


def step(
    state: SimState,
    period: InfectiousPeriod,
    lam: float,
    rng: np.random.Generator,
    site_mode: bool = False,
) -> str:
    """One pairing event; returns 'infect', 'infective_pair' or 'recovered_pair'."""
    if state.y_e < 1:
        raise ValueError("step requires an infective half-edge")
    m = state.total_unpaired - 1
    if m < 1:
        raise ValueError("step requires at least two unpaired half-edges")
    u = int(rng.integers(0, m))
    if u < state.y_e - 1:
        state.y_e -= 2
        return "infective_pair"
    if u < state.y_e - 1 + state.z_e:
        state.y_e -= 1
        state.z_e -= 1
        return "recovered_pair"
    t = u - (state.y_e - 1) - state.z_e
    acc = 0
    i = 1
    dmax = len(state.x) - 1
    while True:
        acc += i * state.x[i]
        if t < acc or i == dmax:
            break
        i += 1
    state.x[i] -= 1
    state.x_e -= i
    state.t_i[i] += 1
    if site_mode and isinstance(period, ZeroOrInfinityPeriod):
        drew_inf = rng.random() < period.prob_infinite
        k = i - 1 if (drew_inf and lam > 0) else 0
        if drew_inf:
            state.v += 1
    else:
        k = sample_transmission_count(period, lam, i - 1, rng)
    state.y_e += k - 1
    state.z_e += i - 1 - k
    return "infect"


def run_final_size(setup: EpidemicSetup, rng: np.random.Generator) -> SimulationOutcome:
    """One replicate via the reference implementation (any period type)."""
    state = initialize(setup, rng)
    site = setup.mode == "site"
    max_steps = state.total_unpaired // 2 + 1
    steps = 0
    while state.y_e > 0 and state.total_unpaired >= 2:
        step(state, setup.period, setup.lam, rng, site_mode=site)
        steps += 1
        if steps > max_steps:
            raise RuntimeError("jump chain failed to terminate")  # unreachable
    t = int(state.t_i.sum())
    return SimulationOutcome(
        n=setup.n,
        t=t,
        t_i=state.t_i,
        v=state.v,
        major=classify_major(t, setup.n) if setup.n >= 2 else False,
        initial_count=state.initial_count,
    )


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class EnsembleResult:
    setup: EpidemicSetup
    seed: int
    t: np.ndarray
    v: np.ndarray
    major: np.ndarray

    @property
    def reps(self) -> int:
        return len(self.t)

    def histogram(self) -> np.ndarray:
        return np.bincount(self.t, minlength=self.setup.n + 1)

    def summary(self) -> dict:
        n = self.setup.n
        t = self.t.astype(np.float64)
        out = {
            "n": n,
            "reps": self.reps,
            "seed": self.seed,
            "rho_hat": float(t.mean()) / n,
            "sigma2_hat": float(t.var(ddof=1)) / n if self.reps > 1 else 0.0,
            "major_frac": float(self.major.mean()),
        }
        tm = t[self.major]
        out["rho_hat_major"] = float(tm.mean()) / n if len(tm) else None
        out["sigma2_hat_major"] = float(tm.var(ddof=1)) / n if len(tm) > 1 else None
        return out

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"

    def write_csv(self, fh) -> None:
        fh.write("rep,T,V,major\n")
        for r in range(self.reps):
            fh.write(f"{r},{self.t[r]},{self.v[r]},{int(self.major[r])}\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _period_encoding(period: InfectiousPeriod, lam: float):
    if isinstance(period, ConstantPeriod):
        return _engine.KIND_CONSTANT, -math.expm1(-lam * period.duration)
    if isinstance(period, ExponentialPeriod):
        return _engine.KIND_EXPONENTIAL, period.rate
    if isinstance(period, ZeroOrInfinityPeriod):
        return _engine.KIND_ZERO_OR_INF, period.prob_infinite
    return None


def _replicate_rng(seed: int, rep: int) -> np.random.Generator:
    # spawn_key derivation gives injective, schedule-independent streams
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def run_ensemble(
    setup: EpidemicSetup, reps: int, seed: int, threads: int = 1
) -> EnsembleResult:
    """reps independent replicates; deterministic given (setup, reps, seed).

    Replicate r always uses the stream derived from (seed, r), and outcomes
    are stored by index, so the result is byte-identical for any thread
    count.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    a_total, a_i = resolve_initial(setup)
    if setup.degree.mean <= 0 and setup.n > a_total:
        raise ValueError("degree distribution must have positive mean")
    enc = _period_encoding(setup.period, setup.lam)
    track_inf = setup.mode == "site"
    t_out = np.empty(reps, dtype=np.int64)
    v_out = np.empty(reps, dtype=np.int64)

    if enc is None:
        # custom period: reference path
        def work(lo, hi):
            for r in range(lo, hi):
                out = run_final_size(setup, _replicate_rng(seed, r))
                t_out[r] = out.t
                v_out[r] = out.v

    elif setup.model == "mr":
        kind, param = enc
        v_counts = mr_class_sizes(setup)
        if a_i is not None and np.any(a_i > v_counts):
            raise ValueError("a_i exceeds the class size v_i for some degree")
        sample_initials = a_i is None
        a_arr = np.zeros_like(v_counts) if a_i is None else a_i

        def work(lo, hi):
            for r in range(lo, hi):
                t_out[r], v_out[r] = _engine.replicate_mr(
                    _replicate_rng(seed, r),
                    v_counts,
                    a_arr,
                    sample_initials,
                    a_total,
                    kind,
                    param,
                    setup.lam,
                    track_inf,
                )

    else:
        kind, param = enc
        cdf = setup.degree.cdf

        def work(lo, hi):
            for r in range(lo, hi):
                t_out[r], v_out[r] = _engine.replicate_nsw(
                    _replicate_rng(seed, r),
                    cdf,
                    setup.n,
                    a_total,
                    kind,
                    param,
                    setup.lam,
                    track_inf,
                )

    ranges = [(lo, min(lo + _CHUNK, reps)) for lo in range(0, reps, _CHUNK)]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda r: work(*r), ranges))
    else:
        for r in ranges:
            work(*r)

    if setup.n >= 2:
        major = t_out >= math.log(setup.n)
    else:
        major = np.zeros(reps, dtype=bool)
    return EnsembleResult(setup=setup, seed=seed, t=t_out, v=v_out, major=major)
