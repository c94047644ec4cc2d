"""Velocity, momentum and proper-time relations for particle paths."""
from __future__ import annotations

import math

from lagrange_ca.errors import InputError, SimulationError


def lorentz_factor(p: float, mass: float, c: float) -> float:
    return math.sqrt(1.0 + (p / (mass * c)) ** 2)


def proper_timestep(p: float, mass: float, dt: float, relativistic: bool, c: float = 1.0) -> float:
    """Δτ = Δt/γ with γ = √(1 + (p/mc)²); Δτ = Δt when not relativistic."""
    if not (math.isfinite(p) and math.isfinite(mass)):
        raise InputError("particle mass and momentum must be finite")
    if not relativistic:
        return dt
    if mass <= 0:
        raise InputError("massless particles cannot use relativistic proper time")
    return dt / lorentz_factor(p, mass, c)


def velocity_of(p: float, mass: float, relativistic: bool, c: float = 1.0) -> float:
    if mass == 0:
        return math.copysign(c, p) if p else 0.0
    if relativistic:
        return p / (mass * lorentz_factor(p, mass, c))
    return p / mass


def momentum_of(v: float, mass: float, relativistic: bool, c: float = 1.0) -> float:
    if relativistic:
        if abs(v) >= c:
            raise SimulationError("massive particle reached the speed of light")
        return mass * v / math.sqrt(1.0 - (v / c) ** 2)
    return mass * v


def energy_of(p: float, mass: float, c: float = 1.0) -> float:
    return math.sqrt((p * c) ** 2 + (mass * c**2) ** 2)
