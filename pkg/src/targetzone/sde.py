"""SDE models for a log exchange rate near a floor, and their Euler-Maruyama integration.

All times are in hours and all rates are per hour; volatilities are per
square-root hour.  The stochastic equations are read in the Ito sense,

    ds = f(s) dt + g(s) dW,

and integrated with the Euler-Maruyama scheme

    s[n+1] = s[n] + f(s[n]) tau + g(s[n]) sqrt(tau) Z[n],   Z[n] ~ N(0, 1).

Each path draws its normals from its own PCG64 stream seeded with
``SeedSequence([seed, path_index])``, so ensembles are reproducible and can be
integrated in parallel.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numba
import numpy as np
from scipy import stats

from .errors import DomainError, IntegrationError
from .timeseries import EPOCH, TEN_SECONDS, TimeSeries

#: EUR/CHF floor of 1.20 in log units.
EURCHF_FLOOR = math.log(1.20)


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GBM:
    """Constant drift and volatility of the log-rate (no barrier)."""

    drift: float
    vol: float

    def __post_init__(self):
        _finite("drift", self.drift)
        if not (self.vol >= 0 and math.isfinite(self.vol)):
            raise DomainError(f"vol must be non-negative, got {self.vol!r}")

    barrier = None


@dataclass(frozen=True)
class PhysicalPotential:
    """Brownian particle in ``C/(s - barrier) + F (s - barrier)``.

    The drift is the second-order expansion of ``-dV/ds`` around the
    potential minimum ``s_eq = barrier + sqrt(C / F)``.
    """

    C: float
    F: float
    vol: float
    barrier: float

    def __post_init__(self):
        _positive("C", self.C)
        _positive("F", self.F)
        if not (self.vol >= 0 and math.isfinite(self.vol)):
            raise DomainError(f"vol must be non-negative, got {self.vol!r}")
        _finite("barrier", self.barrier)

    @property
    def s_eq(self) -> float:
        return self.barrier + math.sqrt(self.C / self.F)

    @property
    def quadratic(self) -> float:
        return 3.0 * self.F**2 / self.C

    @property
    def linear(self) -> float:
        """Relaxation rate of the linearised dynamics around ``s_eq``."""
        return 2.0 * math.sqrt(self.F**3 / self.C)


@dataclass(frozen=True)
class KrugmanLocal:
    """Constant drift ``alpha`` and volatility ``beta * sqrt(s - barrier)``."""

    alpha: float
    beta: float
    barrier: float

    def __post_init__(self):
        _finite("alpha", self.alpha)
        _positive("beta", self.beta)
        _finite("barrier", self.barrier)


@dataclass(frozen=True)
class HinderedDiffusion:
    """Brownian particle near a wall: noise-induced drift ``beta**2 / 2``."""

    beta: float
    barrier: float

    def __post_init__(self):
        _positive("beta", self.beta)
        _finite("barrier", self.barrier)


@dataclass(frozen=True)
class PowerLawVolatility:
    """Constant drift, volatility ``beta * (s - barrier)**mu``.

    Alternative hypothesis of the volatility-exponent test; ``mu = 1/2`` is
    :class:`KrugmanLocal`.
    """

    alpha: float
    beta: float
    mu: float
    barrier: float

    def __post_init__(self):
        _finite("alpha", self.alpha)
        _positive("beta", self.beta)
        _positive("mu", self.mu)
        _finite("barrier", self.barrier)


ProcessSpec = Union[GBM, PhysicalPotential, KrugmanLocal, HinderedDiffusion, PowerLawVolatility]


class BoundaryPolicy(enum.Enum):
    REFLECT = "reflect"
    CLAMP = "clamp"


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``tau`` defaults to 10-second steps.  ``initial_s`` must not lie below the
    barrier of the simulated model.
    """

    n_steps: int
    n_paths: int = 1
    seed: int = 0
    initial_s: float = EURCHF_FLOOR
    boundary_policy: BoundaryPolicy = BoundaryPolicy.REFLECT
    tau: float = TEN_SECONDS

    def __post_init__(self):
        if int(self.n_steps) < 1 or int(self.n_paths) < 1:
            raise DomainError("n_steps and n_paths must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        _positive("tau", self.tau)
        _finite("initial_s", self.initial_s)
        object.__setattr__(self, "boundary_policy", BoundaryPolicy(self.boundary_policy))


def _check_domain(spec, s):
    s = np.asarray(s, dtype=float)
    barrier = spec.barrier
    if barrier is not None and np.any(s < barrier):
        raise DomainError(f"s below the barrier {barrier!r} of {type(spec).__name__}")
    return s


def drift(spec: ProcessSpec, s):
    """Drift ``f(s)`` of ``spec`` in 1/hour (vectorised over ``s``)."""
    s = _check_domain(spec, s)
    if isinstance(spec, GBM):
        out = np.full_like(s, spec.drift)
    elif isinstance(spec, PhysicalPotential):
        x = s - spec.s_eq
        out = spec.quadratic * x * x - spec.linear * x
    elif isinstance(spec, (KrugmanLocal, PowerLawVolatility)):
        out = np.full_like(s, spec.alpha)
    elif isinstance(spec, HinderedDiffusion):
        out = np.full_like(s, 0.5 * spec.beta**2)
    else:
        raise TypeError(f"not a process spec: {spec!r}")
    return out[()] if out.ndim == 0 else out


def volatility(spec: ProcessSpec, s):
    """Volatility ``g(s)`` of ``spec`` in 1/sqrt(hour) (vectorised over ``s``)."""
    s = _check_domain(spec, s)
    if isinstance(spec, (GBM, PhysicalPotential)):
        out = np.full_like(s, spec.vol)
    elif isinstance(spec, (KrugmanLocal, HinderedDiffusion)):
        out = spec.beta * np.sqrt(s - spec.barrier)
    elif isinstance(spec, PowerLawVolatility):
        out = spec.beta * (s - spec.barrier) ** spec.mu
    else:
        raise TypeError(f"not a process spec: {spec!r}")
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# integration

_GBM, _PHYS, _POWER, _SQRT = 0, 1, 2, 3


def _kernel_args(spec):
    """(model code, p0, p1, p2, p3, barrier, has_barrier) for the compiled stepper."""
    if isinstance(spec, GBM):
        return _GBM, spec.drift, spec.vol, 0.0, 0.0, 0.0, False
    if isinstance(spec, PhysicalPotential):
        return _PHYS, spec.quadratic, spec.linear, spec.s_eq, spec.vol, spec.barrier, True
    if isinstance(spec, KrugmanLocal):
        return _SQRT, spec.alpha, spec.beta, 0.0, 0.0, spec.barrier, True
    if isinstance(spec, HinderedDiffusion):
        return _SQRT, 0.5 * spec.beta**2, spec.beta, 0.0, 0.0, spec.barrier, True
    if isinstance(spec, PowerLawVolatility):
        if spec.mu == 0.5:
            return _SQRT, spec.alpha, spec.beta, 0.0, 0.0, spec.barrier, True
        return _POWER, spec.alpha, spec.beta, spec.mu, 0.0, spec.barrier, True
    raise TypeError(f"not a process spec: {spec!r}")


@numba.njit(nogil=True, cache=True)
def _euler_maruyama(code, p0, p1, p2, p3, barrier, has_barrier, reflect, tau, noise, out):
    """Fill ``out[1:]`` from ``out[0]``; return the first failing step or -1."""
    sqrt_tau = math.sqrt(tau)
    s = out[0]
    for n in range(noise.shape[0]):
        if code == 0:
            f = p0
            g = p1
        elif code == 1:
            x = s - p2
            f = p0 * x * x - p1 * x
            g = p3
        else:
            gap = s - barrier
            if gap < 0.0:
                gap = 0.0
            f = p0
            if code == 3:
                g = p1 * math.sqrt(gap)
            else:
                g = p1 * gap**p2
        s = s + f * tau + g * sqrt_tau * noise[n]
        if not math.isfinite(s):
            return n
        if has_barrier and s < barrier:
            if reflect:
                s = 2.0 * barrier - s
            else:
                s = barrier
        out[n + 1] = s
    return -1


def path_rng(seed: int, path: int) -> np.random.Generator:
    """The random stream used for path number ``path`` of ensemble ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(path)])))


def _simulate_path(args, cfg, path):
    code, p0, p1, p2, p3, barrier, has_barrier = args
    noise = path_rng(cfg.seed, path).standard_normal(int(cfg.n_steps))
    out = np.empty(int(cfg.n_steps) + 1)
    out[0] = cfg.initial_s
    failed = _euler_maruyama(
        code, p0, p1, p2, p3, barrier, has_barrier,
        cfg.boundary_policy is BoundaryPolicy.REFLECT, cfg.tau, noise, out,
    )
    if failed >= 0:
        raise IntegrationError(
            f"non-finite value at step {failed} of path {path}", step=int(failed), path=path
        )
    return out


def simulate(spec: ProcessSpec, cfg: SimConfig, workers: int = 1) -> list[TimeSeries]:
    """Integrate ``cfg.n_paths`` independent paths of ``spec``.

    Every path has ``cfg.n_steps + 1`` samples including the initial value.
    Paths are independent of ``workers``; threads only share the work.

    Raises
    ------
    DomainError
        If the initial value lies below the model's barrier.
    IntegrationError
        If a step produces a non-finite value; the step index is attached.
    """
    if spec.barrier is not None and cfg.initial_s < spec.barrier:
        raise DomainError(f"initial_s {cfg.initial_s!r} lies below the barrier {spec.barrier!r}")
    args = _kernel_args(spec)
    paths = range(int(cfg.n_paths))
    if workers > 1 and cfg.n_paths > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            arrays = list(pool.map(lambda p: _simulate_path(args, cfg, p), paths))
    else:
        arrays = [_simulate_path(args, cfg, p) for p in paths]
    return [TimeSeries(a, cfg.tau, EPOCH) for a in arrays]


# ---------------------------------------------------------------------------
# moment scaling of the naive physical model


@dataclass(frozen=True)
class MomentScaling:
    """Stationary moments of :class:`PhysicalPotential` as a function of the gap.

    ``third_cumulant_ratio`` is the third central moment divided by the
    variance, reported next to the standardized ``skewness``.  Exponents are
    least-squares slopes in log-log coordinates (``nan`` for fewer than two
    gaps or vanishing moments).
    """

    gaps: np.ndarray
    specs: tuple
    std: np.ndarray
    skewness: np.ndarray
    third_cumulant_ratio: np.ndarray
    mean_offset: np.ndarray
    vol_exponent: float
    skew_exponent: float
    third_cumulant_ratio_exponent: float


def _loglog_slope(x, y):
    y = np.abs(np.asarray(y, dtype=float))
    if len(x) < 2 or not np.all(np.isfinite(y)) or np.any(y == 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def moment_scaling_experiment(
    C: float | None,
    F: float | None,
    vol_g: float,
    gaps: Sequence[float],
    cfg: SimConfig,
    *,
    burn_in: float = 0.1,
    relax_step: float = 0.02,
    barrier: float = EURCHF_FLOOR,
) -> MomentScaling:
    """Monte Carlo stationary std and skewness of ``s`` for each ``s_eq - barrier`` gap.

    Exactly one of ``C`` and ``F`` is held fixed (pass ``None`` for the other);
    the free one is set per gap from ``gap = sqrt(C / F)``.  Holding ``C``
    fixed gives the 3/2 power law of the stationary volatility.

    The step of each run is ``relax_step`` times the relaxation time
    ``1 / linear`` of that gap, so every gap is integrated over the same number
    of relaxation times; ``cfg.tau`` and ``cfg.initial_s`` are ignored (paths
    start at ``s_eq``).  The first ``burn_in`` fraction of each path is
    discarded.

    Raises
    ------
    IntegrationError
        If a path escapes over the cubic potential's local maximum, i.e. the
        parameters admit no stationary state at this noise level.
    """
    if (C is None) == (F is None):
        raise DomainError("hold exactly one of C and F fixed (pass None for the other)")
    gaps = np.asarray(gaps, dtype=float)
    if gaps.ndim != 1 or len(gaps) == 0 or np.any(gaps <= 0):
        raise DomainError("gaps must be a non-empty list of positive numbers")
    if not 0 <= burn_in < 1:
        raise DomainError("burn_in must be in [0, 1)")

    std, skew, k3r, offset, specs = [], [], [], [], []
    for gap in gaps:
        if C is not None:
            spec = PhysicalPotential(C, C / gap**2, vol_g, barrier)
        else:
            spec = PhysicalPotential(F * gap**2, F, vol_g, barrier)
        specs.append(spec)
        run_cfg = replace(cfg, tau=relax_step / spec.linear, initial_s=spec.s_eq)
        # beyond twice the escape point the drift runs away
        escape = spec.s_eq + 2.0 * spec.linear / spec.quadratic
        first = int(burn_in * (cfg.n_steps + 1))
        samples = []
        for series in simulate(spec, run_cfg):
            if series.values.max() > escape:
                raise IntegrationError(
                    f"paths diverge at gap {gap:g}: no stationary state for these parameters"
                )
            samples.append(series.values[first:])
        x = np.concatenate(samples) - spec.s_eq
        m = x.mean()
        var = np.mean((x - m) ** 2)
        k3 = np.mean((x - m) ** 3)
        std.append(math.sqrt(var))
        offset.append(m)
        if var > 0:
            skew.append(float(stats.skew(x)))
            k3r.append(k3 / var)
        else:
            skew.append(float("nan"))
            k3r.append(float("nan"))

    std, skew, k3r, offset = map(np.asarray, (std, skew, k3r, offset))
    return MomentScaling(
        gaps=gaps,
        specs=tuple(specs),
        std=std,
        skewness=skew,
        third_cumulant_ratio=k3r,
        mean_offset=offset,
        vol_exponent=_loglog_slope(gaps, std),
        skew_exponent=_loglog_slope(gaps, skew),
        third_cumulant_ratio_exponent=_loglog_slope(gaps, k3r),
    )
