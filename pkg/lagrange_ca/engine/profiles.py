"""
Initial field profiles, potential landscapes and the start-up policies
that fill the lookback slice of second-order fields.
"""
from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from lagrange_ca.engine.grid import CellGrid
from lagrange_ca.errors import ContractViolation
from lagrange_ca.scenario.models import FieldSpec, PotentialSpec
from lagrange_ca.stencils.differences import spatial_derivatives

REST = "rest"
TRAVEL_RIGHT = "travel_right"
TRAVEL_LEFT = "travel_left"
SHIFTED_RIGHT = "shifted_right"
SHIFTED_LEFT = "shifted_left"


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------
def _wavenumber(spec: FieldSpec, grid: CellGrid) -> float:
    if spec.wavelength is not None:
        return 2 * math.pi / spec.wavelength
    return spec.wavenumber


def build_profile(spec: FieldSpec, grid: CellGrid, offset: float = 0.0) -> np.ndarray:
    """ψ(x) for the declared profile, displaced by `offset` along the first axis."""
    shape = grid.extents
    if spec.profile == "constant":
        return np.full(shape, spec.value * spec.amplitude, dtype=complex)

    if spec.profile == "impulse":
        if spec.cell >= grid.size:
            raise ContractViolation(f"impulse cell {spec.cell} is outside the grid")
        psi = np.zeros(grid.size, dtype=complex)
        psi[spec.cell] = spec.amplitude
        return psi.reshape(shape)

    centre = list(spec.center) + [0.0] * (grid.dims - len(spec.center))
    along = grid.displacement(0, centre[0] + offset)

    if spec.profile == "gaussian":
        r2 = along**2
        for axis in range(1, grid.dims):
            r2 = r2 + grid.displacement(axis, centre[axis]) ** 2
        envelope = spec.amplitude * np.exp(-r2 / (2 * spec.width**2))
        return envelope * np.exp(1j * (_wavenumber(spec, grid) * along + spec.phase))

    if spec.profile == "sine":
        k = _wavenumber(spec, grid) or 2 * math.pi / grid.lengths[0]
        x = grid.coordinates[0] - offset
        return (spec.amplitude * np.sin(k * x + spec.phase)).astype(complex)

    if spec.profile == "eigenmode":
        # n-th standing wave of a box whose walls sit one cell outside the grid
        box = (grid.extents[0] + 1) * grid.dx
        x = grid.coordinates[0] + grid.dx - offset
        return (spec.amplitude * np.sin(spec.mode * math.pi * x / box)).astype(complex)

    raise ContractViolation(f"unknown profile '{spec.profile}'")


def previous_slice(
    spec: FieldSpec,
    grid: CellGrid,
    psi: np.ndarray,
    dt: float,
    speed: float,
) -> np.ndarray:
    """ψ(t₋₁) for a second-order field under the declared init policy."""
    if spec.init == REST:
        return psi.copy()
    if spec.init in (TRAVEL_RIGHT, TRAVEL_LEFT):
        direction = 1.0 if spec.init == TRAVEL_RIGHT else -1.0
        first, _ = spatial_derivatives(psi, grid.dx, grid.boundary)
        rate = -direction * speed * first
        return psi - rate * dt
    if spec.init in (SHIFTED_RIGHT, SHIFTED_LEFT):
        direction = 1.0 if spec.init == SHIFTED_RIGHT else -1.0
        return build_profile(spec, grid, offset=-direction * speed * dt)
    raise ContractViolation(f"unknown init policy '{spec.init}'")


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------
def potential_functions(spec: PotentialSpec | None) -> tuple[Callable, Callable]:
    """(V(x), dV/dx(x)) as numpy-friendly callables."""
    if spec is None or spec.kind == "zero":
        return (lambda x: np.zeros_like(np.asarray(x, dtype=float))), (lambda x: 0.0 * np.asarray(x, dtype=float))

    s, c, w = spec.strength, spec.center, spec.width
    if spec.kind == "constant_force":
        return (lambda x: -s * np.asarray(x, dtype=float)), (lambda x: -s + 0.0 * np.asarray(x, dtype=float))
    if spec.kind == "harmonic":
        return (lambda x: 0.5 * s * (np.asarray(x) - c) ** 2), (lambda x: s * (np.asarray(x) - c))
    if spec.kind == "barrier":
        lo, hi = spec.start, spec.end

        def barrier(x):
            x = np.asarray(x, dtype=float)
            return np.where((x >= lo) & (x <= hi), s, 0.0)

        return barrier, (lambda x: 0.0 * np.asarray(x, dtype=float))
    if spec.kind == "gaussian":

        def bump(x):
            return s * np.exp(-((np.asarray(x) - c) ** 2) / (2 * w**2))

        return bump, (lambda x: -(np.asarray(x) - c) / w**2 * bump(x))
    raise ContractViolation(f"unknown potential '{spec.kind}'")


def sample_potential(spec: PotentialSpec | None, grid: CellGrid) -> np.ndarray | None:
    """V on the grid (first-axis coordinate), or None for no potential."""
    if spec is None or spec.kind == "zero":
        return None
    potential, _ = potential_functions(spec)
    return np.asarray(potential(grid.coordinates[0]), dtype=float)


def potential_gradient(spec: PotentialSpec | None) -> Callable[[float], float] | None:
    if spec is None or spec.kind == "zero":
        return None
    _, gradient = potential_functions(spec)
    return lambda x: float(gradient(x))
