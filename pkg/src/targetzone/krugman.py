"""Krugman's target-zone solution with a lower boundary.

The log-rate is ``s = m + v + A exp(-rho v)`` with ``rho = sqrt(2 / (gamma sigma**2))``,
where ``v`` is the fundamental (a Brownian motion with volatility ``sigma``).
Smooth pasting at the boundary point ``v_floor`` (``s(v_floor) = barrier`` and
``ds/dv = 0`` there) fixes

    v_floor = barrier - m - 1/rho,     A = exp(rho (barrier - m) - 1) / rho.

Writing ``z = rho (v - v_floor)`` the curve becomes
``s = barrier + (z - 1 + exp(-z)) / rho``, which is what the code evaluates;
it is the same function without the cancellation near the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError


@dataclass(frozen=True)
class KrugmanParams:
    """Model parameters plus the smooth-pasting constants.

    Build with :func:`solve_pasting` rather than directly.  ``log_A`` is kept
    alongside ``A`` because ``A`` overflows for large ``rho (barrier - m)``.
    """

    m: float
    gamma: float
    sigma: float
    barrier: float
    rho: float
    log_A: float
    v_floor: float

    @property
    def A(self) -> float:
        return math.exp(self.log_A)


def solve_pasting(m: float, gamma: float, sigma: float, barrier: float) -> KrugmanParams:
    """Closed-form smooth-pasting solution."""
    for name, val in (("gamma", gamma), ("sigma", sigma)):
        if not (val > 0 and math.isfinite(val)):
            raise DomainError(f"{name} must be positive, got {val!r}")
    rho = math.sqrt(2.0 / (gamma * sigma**2))
    v_floor = barrier - m - 1.0 / rho
    log_A = rho * (barrier - m) - 1.0 - math.log(rho)
    return KrugmanParams(m, gamma, sigma, barrier, rho, log_A, v_floor)


def solve_pasting_numeric(m: float, gamma: float, sigma: float, barrier: float) -> tuple[float, float]:
    """(log A, v_floor) from a two-equation root find of the pasting conditions.

    Solves ``s(v) = barrier`` and ``ds/dv = 0`` for ``(log A, v)`` directly
    from the untransformed curve ``m + v + A exp(-rho v)``, as an independent
    check on :func:`solve_pasting`.  The slope condition is solved in log form.
    """
    rho = math.sqrt(2.0 / (gamma * sigma**2))

    # slope condition in log form: log(rho A exp(-rho v)) = 0
    def equations(x):
        log_a, v = x
        return [m + v + math.exp(log_a - rho * v) - barrier, math.log(rho) + log_a - rho * v]

    def jacobian(x):
        log_a, v = x
        tail = math.exp(log_a - rho * v)
        return [[tail, 1.0 - rho * tail], [1.0, -rho]]

    # free-float guess for v, log A on the slope condition
    v0 = barrier - m
    sol = optimize.root(equations, [rho * v0 - math.log(rho), v0], jac=jacobian, method="hybr", options={"xtol": 1e-13})
    # hybr may stop with "no further improvement" once at machine precision
    scale = max(1.0, abs(barrier), abs(m))
    if not np.all(np.isfinite(sol.x)) or max(abs(r) for r in equations(sol.x)) > 1e-12 * scale * max(1.0, rho):
        raise ArithmeticError(f"pasting root find failed: {sol.message}")
    log_a, v = sol.x
    return float(log_a), float(v)


def _phi(z):
    """``z - 1 + exp(-z)`` for ``z >= 0``, accurate for small ``z``."""
    z = np.asarray(z, dtype=float)
    small = z < 1e-3
    out = np.where(small, 0.0, z + np.expm1(-np.where(small, 1.0, z)))
    zs = np.where(small, z, 0.0)
    series = zs * zs * (0.5 - zs * (1.0 / 6.0 - zs * (1.0 / 24.0 - zs / 120.0)))
    return np.where(small, series, out)


def s_of_v(p: KrugmanParams, v):
    """Log-rate as a function of the fundamental; pinned at the barrier for ``v < v_floor``."""
    v = np.asarray(v, dtype=float)
    z = np.maximum(p.rho * (v - p.v_floor), 0.0)
    out = p.barrier + _phi(z) / p.rho
    return out[()] if out.ndim == 0 else out


def free_float(p: KrugmanParams, v):
    """The no-target-zone line ``m + v``."""
    v = np.asarray(v, dtype=float)
    out = p.m + v
    return out[()] if out.ndim == 0 else out


def _v_of_s_scalar(p, s):
    if s < p.barrier:
        raise DomainError(f"s = {s!r} lies below the barrier {p.barrier!r}")
    target = p.rho * (s - p.barrier)
    if target == 0.0:
        return p.v_floor
    # bracket [v_floor, v_floor + max(1, 10/rho) + (s - barrier)] in units of z
    hi = max(p.rho, 10.0) + target
    while _phi(hi) < target:
        hi *= 2.0
    z = optimize.brentq(
        lambda z: float(_phi(z)) - target, 0.0, hi,
        xtol=min(1e-13, 1e-12 * p.rho), rtol=4 * np.finfo(float).eps,
    )
    return p.v_floor + z / p.rho


def v_of_s(p: KrugmanParams, s):
    """Inverse of :func:`s_of_v` on ``[v_floor, inf)``; no closed form exists.

    Raises :class:`DomainError` for ``s`` below the barrier.
    """
    s = np.asarray(s, dtype=float)
    out = np.vectorize(lambda x: _v_of_s_scalar(p, float(x)), otypes=[float])(s)
    return out[()] if out.ndim == 0 else out


def drift_vol_in_v(p: KrugmanParams, v):
    """Ito drift ``A sigma**2 rho**2 exp(-rho v) / 2`` and volatility ``sigma - sigma A rho exp(-rho v)``."""
    v = np.asarray(v, dtype=float)
    if np.any(v < p.v_floor):
        raise DomainError("v lies below the pasting point")
    # A rho exp(-rho v) == exp(-rho (v - v_floor)) by the pasting condition
    decay = np.exp(-p.rho * (v - p.v_floor))
    f = 0.5 * p.sigma**2 * p.rho * decay
    g = -p.sigma * np.expm1(-p.rho * (v - p.v_floor))
    if f.ndim == 0:
        return f[()], g[()]
    return f, g


def local_expansion(p: KrugmanParams) -> tuple[float, float]:
    """Drift ``alpha`` and volatility scale ``beta`` of the model close to the barrier.

    ``alpha = sigma / sqrt(2 gamma)`` and ``beta = 2**(3/4) sqrt(sigma) / gamma**(1/4)``,
    so ``sqrt(alpha) / beta = 1/2`` whatever the parameters.
    """
    alpha = p.sigma / math.sqrt(2.0 * p.gamma)
    beta = 2.0**0.75 * math.sqrt(p.sigma) / p.gamma**0.25
    return alpha, beta


def curve(p: KrugmanParams, v_min: float | None = None, v_max: float | None = None, n: int = 201):
    """(v, s(v), m + v) on a grid; defaults span a little below the pasting point to well above it."""
    if v_min is None:
        v_min = p.v_floor - 1.0 / p.rho
    if v_max is None:
        v_max = p.v_floor + 6.0 / p.rho
    v = np.linspace(v_min, v_max, n)
    return v, s_of_v(p, v), free_float(p, v)
