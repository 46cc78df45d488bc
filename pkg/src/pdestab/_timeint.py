"""Cumulative time integrals used by the comparison construction.

For a time grid starting at t0 computes

    I(t) = int_{t0}^t dtau / g(tau)
    J(t) = int_{t0}^t n(tau) exp(-c I(tau)) dtau

with composite Gauss-Legendre on each sub-interval and a nested
Gauss-Legendre rule for I at the quadrature nodes.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

H_MAX = 0.25
_X, _W = leggauss(8)


def _vec(fn, shape_like):
    return np.broadcast_to(np.asarray(fn(shape_like), dtype=float), shape_like.shape)


def refine(times, t0, h_max=H_MAX):
    """Sorted union of t0, ``times`` and a uniform grid of spacing <= h_max."""
    times = np.asarray(times, dtype=float)
    t_end = max(float(times.max()) if times.size else t0, t0)
    n = max(int(np.ceil((t_end - t0) / h_max)), 1)
    base = np.linspace(t0, t_end, n + 1)
    return np.unique(np.concatenate([[t0], base, times]))


def cumulative(grid, g_fn, n_fn=None, c=0.0):
    """I and J (J is None when n_fn is None) at every point of ``grid``."""
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    tau = a[:, None] + half[:, None] * (1 + _X[None, :])
    w = half[:, None] * _W[None, :]
    dI = (w / _vec(g_fn, tau)).sum(axis=1)
    I = np.concatenate([[0.0], np.cumsum(dI)])
    if n_fn is None:
        return I, None

    # I at each node tau_ij via a nested rule on [a_i, tau_ij]
    inner_half = 0.5 * (tau - a[:, None])
    sig = a[:, None, None] + inner_half[:, :, None] * (1 + _X[None, None, :])
    I_tau = I[:-1, None] + (inner_half[:, :, None] * _W / _vec(g_fn, sig)).sum(axis=2)
    dJ = (w * _vec(n_fn, tau) * np.exp(-c * I_tau)).sum(axis=1)
    J = np.concatenate([[0.0], np.cumsum(dJ)])
    return I, J


def at_times(times, t0, g_fn, n_fn=None, c=0.0, h_max=H_MAX):
    """I(t), J(t) evaluated at the requested times (all >= t0)."""
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < t0:
        raise ValueError("times must be >= t0")
    grid = refine(times, t0, h_max)
    I, J = cumulative(grid, g_fn, n_fn, c)
    idx = np.searchsorted(grid, times)
    return I[idx], (None if J is None else J[idx])
