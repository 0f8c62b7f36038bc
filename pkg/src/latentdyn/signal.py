"""Signal utilities: smoothing, differentiation, correlation, density, MSD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .errors import ConfigurationError, NumericsError, ShapeError

__all__ = [
    "SgConfig",
    "Series",
    "sg_filter",
    "estimate_derivative",
    "pearson",
    "scott_bandwidth",
    "kde_density",
    "mean_square_displacement",
]


@dataclass(frozen=True)
class SgConfig:
    """Savitzky-Golay window settings.

    ``window`` must be odd and ``order`` must satisfy ``0 <= order < window``.
    """

    window: int = 51
    order: int = 1

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigurationError(f"window must be a positive odd integer, got {self.window}")
        if not 0 <= self.order < self.window:
            raise ConfigurationError(
                f"order must satisfy 0 <= order < window, got order={self.order} "
                f"window={self.window}"
            )


@dataclass(frozen=True)
class Series:
    """A uniformly sampled scalar signal with its sampling interval."""

    values: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ShapeError(f"Series expects a 1-D array, got shape {v.shape}")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def sg_filter(values: np.ndarray, config: SgConfig) -> np.ndarray:
    """Savitzky-Golay smoothing: windowed least-squares polynomial fits.

    Interior samples take the value of a degree-``order`` polynomial fitted
    to the surrounding ``window`` samples and evaluated at the center; near
    the edges the polynomial fitted to the first (or last) full window is
    evaluated at the off-center positions, so no sample is left unfiltered.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"sg_filter expects a 1-D array, got shape {v.shape}")
    if config.window > v.size:
        raise ConfigurationError(
            f"window {config.window} exceeds signal length {v.size}"
        )
    return savgol_filter(v, config.window, config.order, mode="interp")


def estimate_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """First time derivative: central differences inside, one-sided second-order at the ends."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"estimate_derivative expects a 1-D array, got shape {v.shape}")
    if v.size < 3:
        raise ConfigurationError(f"need at least 3 samples for a derivative, got {v.size}")
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    return np.gradient(v, dt, edge_order=2)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length signals."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ShapeError(f"pearson expects equal-length 1-D arrays, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ConfigurationError("pearson needs at least 2 samples")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise NumericsError("pearson undefined: at least one input has zero variance")
    return float(np.corrcoef(x, y)[0, 1])


def scott_bandwidth(positions: np.ndarray) -> float:
    """Scott-rule bandwidth for 2-D data: ``n**(-1/6)`` times the mean per-axis std."""
    p = np.asarray(positions, dtype=np.float64)
    n = p.shape[0]
    return float(n ** (-1.0 / 6.0) * np.std(p, axis=0).mean())


def kde_density(
    positions: np.ndarray,
    grid_x: np.ndarray,
    grid_y: np.ndarray,
    bandwidth: float | None = None,
) -> np.ndarray:
    """Gaussian kernel density of 2-D points on a rectangular grid.

    Parameters
    ----------
    positions : (n, 2) array
        Point coordinates.
    grid_x, grid_y : 1-D arrays
        Grid axes; the result has shape ``(len(grid_y), len(grid_x))``.
    bandwidth : float, optional
        Isotropic kernel bandwidth.  Defaults to the Scott rule
        (:func:`scott_bandwidth`); when that degenerates to zero
        (e.g. all points coincide) a small fraction of the grid span
        is used instead.

    Returns
    -------
    (len(grid_y), len(grid_x)) array of densities, normalized so each
    kernel integrates to one over the plane.
    """
    p = np.asarray(positions, dtype=np.float64)
    gx = np.asarray(grid_x, dtype=np.float64)
    gy = np.asarray(grid_y, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ShapeError(f"positions must have shape (n, 2), got {p.shape}")
    if p.shape[0] == 0:
        raise ConfigurationError("kde_density needs at least one point")
    if bandwidth is None:
        bandwidth = scott_bandwidth(p)
        if bandwidth <= 0.0:
            span = max(np.ptp(gx), np.ptp(gy))
            bandwidth = 0.05 * span if span > 0 else 1.0
    if bandwidth <= 0.0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")

    # Sum of unit-mass Gaussians, averaged over points.
    dx = gx[None, :] - p[:, 0][:, None]          # (n, nx)
    dy = gy[None, :] - p[:, 1][:, None]          # (n, ny)
    ex = np.exp(-0.5 * (dx / bandwidth) ** 2)
    ey = np.exp(-0.5 * (dy / bandwidth) ** 2)
    norm = 1.0 / (2.0 * np.pi * bandwidth**2 * p.shape[0])
    return norm * (ey.T @ ex)


def mean_square_displacement(frames: np.ndarray) -> np.ndarray:
    """Mean square displacement from the initial frame.

    Parameters
    ----------
    frames : (T, 2k) array
        Rows are timesteps; columns alternate x and y per particle.

    Returns
    -------
    (T,) array: at each timestep, the squared distance from the particle's
    initial position, averaged over the k particles.
    """
    f = np.asarray(frames, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] == 0 or f.shape[1] % 2:
        raise ShapeError(f"frames must have shape (T, 2k), got {f.shape}")
    disp = f - f[0]
    sq = disp[:, 0::2] ** 2 + disp[:, 1::2] ** 2
    return sq.mean(axis=1)
