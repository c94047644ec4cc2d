"""Five-step leapfrog update for second-order-in-time fields."""
from __future__ import annotations

import numpy as np

from lagrange_ca.dsl.polynomial import BoundPolynomial
from lagrange_ca.stencils.differences import spatial_derivatives


def field_bindings(psi: np.ndarray, dx: float, boundary: str, potential: np.ndarray | None) -> dict:
    first, second = spatial_derivatives(psi, dx, boundary)
    return {
        "psi": psi,
        "d(psi,x)": first,
        "d2(psi,x)": second,
        "V": 0.0 if potential is None else potential,
    }


def wave_step(
    psi: np.ndarray,
    prev: np.ndarray,
    dt: float,
    rhs: BoundPolynomial,
    dx: float,
    boundary: str,
    *,
    potential: np.ndarray | None = None,
    source: np.ndarray | None = None,
) -> np.ndarray:
    """ψ(t+Δt) from ψ(t) and ψ(t−Δt).

    `source` is an extra term added to Δ²ψdt, computed by the caller from
    other fields' current slices.
    """
    acceleration = rhs(field_bindings(psi, dx, boundary, potential))
    if source is not None:
        acceleration = acceleration + source
    return acceleration * dt**2 + 2 * psi - prev