"""Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth."""

from __future__ import annotations

import numpy as np

from .errors import DataError, DegenerateSampleError

DEFAULT_GRID = 512


def silverman_bandwidth(draws: np.ndarray) -> float:
    """h = 0.9 min(sd, IQR/1.34) N^(-1/5); falls back to sd when the IQR is zero."""
    x = np.asarray(draws, dtype=float)
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateSampleError("KDE needs draws with non-zero spread")
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    return 0.9 * spread * x.size ** (-0.2)


def kde_curve(draws, grid_points: int = DEFAULT_GRID) -> np.ndarray:
    """
    Evaluate the KDE on a uniform grid over [min - 3h, max + 3h].

    Returns
    -------
    ndarray of shape (grid_points, 2)
        Columns are x and the density estimate.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size < 10:
        raise DataError(f"KDE needs at least 10 draws, got {x.size}")
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, grid_points)
    z = (grid[:, None] - x[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (x.size * h * np.sqrt(2.0 * np.pi))
    return np.column_stack([grid, dens])


def kde_mode(draws, grid_points: int = DEFAULT_GRID) -> float:
    curve = kde_curve(draws, grid_points)
    return float(curve[np.argmax(curve[:, 1]), 0])
