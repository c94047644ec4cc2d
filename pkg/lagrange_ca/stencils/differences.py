"""
Central finite differences on a lattice.

Boundaries are handled by padding one ghost layer: `periodic` wraps,
`fixed` pins the ghost cells to zero. No one-sided differences are used.
"""
import numpy as np

PERIODIC = "periodic"
FIXED = "fixed"
BOUNDARIES = (PERIODIC, FIXED)


def pad(lattice: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == PERIODIC:
        return np.pad(lattice, 1, mode="wrap")
    if boundary == FIXED:
        return np.pad(lattice, 1, mode="constant", constant_values=0)
    raise ValueError(f"unknown boundary '{boundary}'")


def _neighbour(padded: np.ndarray, axis: int, offset: int) -> np.ndarray:
    index = [slice(1, -1)] * padded.ndim
    index[axis] = slice(1 + offset, padded.shape[axis] - 1 + offset)
    return padded[tuple(index)]


def spatial_derivatives(lattice: np.ndarray, dx: float, boundary: str) -> tuple[np.ndarray, np.ndarray]:
    """(Δψdx, Δ²ψdx) per cell.

    Δψdx is the central first difference along the first axis; Δ²ψdx is the
    three-point second difference summed over all axes (the Laplacian in 2D).
    """
    padded = pad(lattice, boundary)
    first = (_neighbour(padded, 0, 1) - _neighbour(padded, 0, -1)) / (2 * dx)
    second = np.zeros_like(lattice)
    for axis in range(lattice.ndim):
        second = second + (
            _neighbour(padded, axis, 1) - 2 * lattice + _neighbour(padded, axis, -1)
        ) / dx**2
    return first, second
