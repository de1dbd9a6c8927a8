"""Deterministic direction sets and seeded point sampling.

Unit directions come from low-discrepancy constructions (golden-angle
spirals for n <= 3, Halton-driven Gaussian directions above), so every
report built on them is reproducible without a seed.  Random sweeps take
an explicit ``numpy.random.Generator`` and are reproducible given one.
"""

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Return ``count`` deterministic unit vectors in R^dim, one per row."""
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    if dim == 1:
        signs = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
        return signs.reshape(-1, 1)
    if dim == 2:
        theta = GOLDEN_ANGLE * np.arange(count)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        theta = GOLDEN_ANGLE * np.arange(count)
        return np.stack([rho * np.cos(theta), rho * np.sin(theta), z], axis=1)
    engine = qmc.Halton(d=dim, scramble=False)
    engine.fast_forward(1)  # first unscrambled point is the origin
    u = engine.random(count)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms


def sphere_points(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    """Seeded uniform points on the unit sphere, one per row."""
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms


def ball_points(rng: np.random.Generator, dim: int, radius: float, count: int) -> np.ndarray:
    """Seeded uniform points in the open ball of the given radius."""
    directions = sphere_points(rng, dim, count)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return directions * radii[:, None]


def rotation_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Seeded random rotation (special orthogonal matrix)."""
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
