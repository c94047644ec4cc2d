"""Six-step update for first-order-in-time fields."""
from __future__ import annotations

import numpy as np

from lagrange_ca.dsl.polynomial import BoundPolynomial
from lagrange_ca.stencils.wave import field_bindings

CORRECTED = "corrected"
LITERAL = "literal"
MODES = (CORRECTED, LITERAL)


def schrodinger_step(
    psi: np.ndarray,
    rate: np.ndarray,
    dt: float,
    rhs: BoundPolynomial,
    dx: float,
    boundary: str,
    *,
    mode: str = CORRECTED,
    potential: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (ψ(t+Δt), Δψdt to store).

    corrected: forward Euler with the freshly evaluated Δψdt.
    literal: step 5 also applies Δ²ψdt, taken as the change of Δψdt since
    the stored value, which makes the update a two-level extrapolation.
    """
    new_rate = rhs(field_bindings(psi, dx, boundary, potential))
    new_rate = np.broadcast_to(new_rate, psi.shape).astype(complex)
    applied = new_rate
    if mode == LITERAL:
        second = (new_rate - rate) / dt
        applied = new_rate + second * dt
    elif mode != CORRECTED:
        raise ValueError(f"unknown first-order mode '{mode}'")
    return psi + applied * dt, new_rate
