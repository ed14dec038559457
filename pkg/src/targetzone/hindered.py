"""Brownian particle near a wall.

Physical units (SI) are used only here: Einstein-Stokes diffusion
``D0 = kT / (6 pi nu R)`` in the bulk, the Lorentz correction
``D = D0 / (1 + 9R / (8 gap))`` close to a plane wall, and the link
``g = sqrt(2 D)`` to a volatility.  The Ito equation of a force-free particle
with volatility ``g(s)`` carries the noise-induced drift ``g(s) g'(s)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import constants

from .errors import DomainError

BOLTZMANN = constants.k


@dataclass(frozen=True)
class ParticleEnv:
    """Thermal energy ``kT`` (J), viscosity (Pa s), radius (m) and wall position (m)."""

    kT: float
    viscosity: float
    radius: float
    wall: float = 0.0

    def __post_init__(self):
        for name in ("kT", "viscosity", "radius"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise DomainError(f"{name} must be positive, got {val!r}")

    @classmethod
    def water(cls, radius: float, temperature: float = 293.0, viscosity: float = 1.0e-3, wall: float = 0.0):
        return cls(BOLTZMANN * temperature, viscosity, radius, wall)


def bulk_diffusion(env: ParticleEnv) -> float:
    """Einstein-Stokes diffusion coefficient in m^2/s."""
    return env.kT / (6.0 * math.pi * env.viscosity * env.radius)


def _gap(env, s):
    gap = np.asarray(s, dtype=float) - env.wall
    if np.any(gap <= 0):
        raise DomainError("position must lie strictly outside the wall")
    return gap


def lorentz_lambda(env: ParticleEnv, s):
    """Lorentz mobility correction ``1 + 9R / (8 (s - wall))``."""
    out = 1.0 + 9.0 * env.radius / (8.0 * _gap(env, s))
    return out[()] if out.ndim == 0 else out


def wall_diffusion(env: ParticleEnv, s):
    """``D0 / lambda`` at distance ``s - wall``."""
    return bulk_diffusion(env) / lorentz_lambda(env, s)


def linear_wall_diffusion(env: ParticleEnv, s):
    """First-order expansion ``8 D0 (s - wall) / (9 R)`` of :func:`wall_diffusion`."""
    out = 8.0 * bulk_diffusion(env) * _gap(env, s) / (9.0 * env.radius)
    return out[()] if out.ndim == 0 else out


def volatility_from_diffusion(D):
    """``g = sqrt(2 D)``."""
    D = np.asarray(D, dtype=float)
    if np.any(D < 0):
        raise DomainError("diffusion coefficient must be non-negative")
    out = np.sqrt(2.0 * D)
    return out[()] if out.ndim == 0 else out


def diffusion_profile(gap_over_R=None):
    """``(gap/R, D/D0, linear approximation / D0)`` of the Lorentz form, scale free."""
    if gap_over_R is None:
        gap_over_R = np.geomspace(1e-3, 1e3, 121)
    x = np.asarray(gap_over_R, dtype=float)
    env = ParticleEnv(1.0, 1.0, 1.0)
    d0 = bulk_diffusion(env)
    return x, wall_diffusion(env, x) / d0, linear_wall_diffusion(env, x) / d0


class DriftRegime(enum.Enum):
    """Behaviour of ``g g'`` at the wall for ``g = beta * gap**gamma``."""

    DIVERGENT = "divergent"
    CONSTANT = "constant"
    VANISHING = "vanishing"


def classify_exponent(gamma: float) -> DriftRegime:
    """``gamma < 1/2`` diverges, ``gamma = 1/2`` is constant, ``gamma > 1/2`` vanishes."""
    if not gamma > 0:
        raise DomainError(f"exponent must be positive, got {gamma!r}")
    if gamma < 0.5:
        return DriftRegime.DIVERGENT
    if gamma == 0.5:
        return DriftRegime.CONSTANT
    return DriftRegime.VANISHING


@dataclass(frozen=True)
class PowerProfile:
    """``g(s) = beta * (s - wall)**gamma``."""

    beta: float
    gamma: float
    wall: float = 0.0

    def __call__(self, s):
        return self.beta * (np.asarray(s, dtype=float) - self.wall) ** self.gamma


def SqrtProfile(beta: float, wall: float = 0.0) -> PowerProfile:
    return PowerProfile(beta, 0.5, wall)


def noise_induced_drift(g_profile: PowerProfile | Callable, s: float, *, wall: float | None = None,
                        numeric: bool = False) -> float:
    """Ito drift ``g(s) g'(s)`` of a force-free particle.

    Power profiles are differentiated analytically (``beta**2 gamma gap**(2 gamma - 1)``,
    equal to ``beta**2 / 2`` for the square root) unless ``numeric`` is set.
    Any other callable uses a central difference with step ``1e-6`` of the
    local scale: the gap to ``wall`` when given, else ``max(|s|, 1)``.

    Raises
    ------
    DomainError
        At or behind the wall when the derivative diverges there or the
        difference stencil would cross it.
    """
    s = float(s)
    if isinstance(g_profile, PowerProfile) and not numeric:
        gap = s - g_profile.wall
        b, gm = g_profile.beta, g_profile.gamma
        if gap < 0:
            raise DomainError("position behind the wall")
        if gap == 0:
            regime = classify_exponent(gm)
            if regime is DriftRegime.DIVERGENT:
                raise DomainError("drift diverges at the wall for exponent < 1/2")
            return 0.5 * b * b if regime is DriftRegime.CONSTANT else 0.0
        if gm == 0.5:
            return 0.5 * b * b
        return b * b * gm * gap ** (2.0 * gm - 1.0)

    if isinstance(g_profile, PowerProfile):
        wall = g_profile.wall
    if wall is not None:
        scale = s - wall
        if scale <= 0:
            raise DomainError("numerical derivative undefined at or behind the wall")
    else:
        scale = max(abs(s), 1.0)
    h = 1e-6 * scale
    g = float(g_profile(s))
    dg = (float(g_profile(s + h)) - float(g_profile(s - h))) / (2.0 * h)
    return g * dg
