"""Synthetic driving signals sampled on a grid."""
from __future__ import annotations

import numpy as np

from .roughpath import GridPath


def oscillation_path(n_points: int, hurst: float = 0.3, levels: int = 10, dim: int = 1,
                     seed: int = 0, T: float = 1.0) -> GridPath:
    """Weierstrass-type sum Σ_k 2^{-kH} sin(2^k π t + φ_k) cut off after ``levels`` terms.

    Above the cutoff frequency the signal has Hölder exponent close to H;
    below it the truncation acts as a mollifier and the path is smooth.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, T, n_points)
    vals = np.zeros((n_points, dim))
    for d in range(dim):
        phases = rng.uniform(0, 2 * np.pi, levels + 1)
        for k in range(levels + 1):
            vals[:, d] += 2.0 ** (-k * hurst) * np.sin(2.0 ** k * np.pi * t / T + phases[k])
    return GridPath(t, vals)


def fbm_path(n_points: int, hurst: float = 0.3, dim: int = 1, seed: int = 0, T: float = 1.0) -> GridPath:
    """Fractional Brownian motion on a uniform grid by circulant embedding."""
    rng = np.random.default_rng(seed)
    m = n_points - 1
    k = np.arange(m + 1)
    cov = 0.5 * (np.abs(k + 1) ** (2 * hurst) - 2 * np.abs(k) ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([cov, cov[-2:0:-1]])
    eig = np.fft.fft(row).real
    eig = np.clip(eig, 0, None)
    L = len(row)
    vals = np.zeros((n_points, dim))
    for d in range(dim):
        w = rng.normal(size=L) + 1j * rng.normal(size=L)
        incr = np.fft.fft(np.sqrt(eig / L) * w).real[:m]
        vals[1:, d] = np.cumsum(incr) * (T / m) ** hurst
    return GridPath(np.linspace(0, T, n_points), vals)


def linear_path(n_points: int, velocity, T: float = 1.0) -> GridPath:
    t = np.linspace(0.0, T, n_points)
    v = np.atleast_1d(np.asarray(velocity, float))
    return GridPath(t, t[:, None] * v[None, :])


def resample(path: GridPath, n_coarse: int) -> GridPath:
    """Piecewise-linear interpolation through ``n_coarse`` equally spaced samples, read back on the fine grid."""
    tc = np.linspace(path.times[0], path.times[-1], n_coarse)
    vals = np.stack([np.interp(path.times, tc, np.interp(tc, path.times, path.values[:, d]))
                     for d in range(path.dim)], axis=1)
    return GridPath(path.times, vals)
