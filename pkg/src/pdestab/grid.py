"""Uniform grid on [0, pi]: finite differences, Simpson quadrature and the d-norm."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

# derivative order used by the norms and functionals; the plain dx/dxx
# operators default to second order
NORM_ORDER = 4


@functools.lru_cache(maxsize=None)
def fd_weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Finite-difference weights for the given stencil offsets (unit spacing)."""
    offs = np.asarray(offsets, dtype=float)
    n = len(offs)
    V = np.vander(offs, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(V, rhs)


@dataclass(frozen=True)
class Grid:
    n_interior: int = 199

    def __post_init__(self):
        if self.n_interior < 3 or (self.n_interior + 1) % 2:
            raise ValueError("n_interior must be >= 3 with n_interior + 1 even")

    @property
    def n_nodes(self) -> int:
        return self.n_interior + 2

    @property
    def spacing(self) -> float:
        return math.pi / (self.n_interior + 1)

    @functools.cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.spacing

    @functools.cached_property
    def simpson_weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * self.spacing / 3.0


@dataclass(frozen=True)
class GridState:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-D arrays of equal length")
        if self.u[0] != 0 or self.u[-1] != 0 or self.v[0] != 0 or self.v[-1] != 0:
            raise ValueError("state must vanish at both boundary nodes")

    @classmethod
    def from_arrays(cls, u, v, tol=1e-12):
        """Build a state, zeroing boundary values that are within ``tol`` of 0."""
        u = np.array(u, dtype=float)
        v = np.array(v, dtype=float)
        for arr in (u, v):
            if abs(arr[0]) > tol or abs(arr[-1]) > tol:
                raise ValueError("boundary values must vanish")
            arr[0] = arr[-1] = 0.0
        return cls(u, v)

    @classmethod
    def zeros(cls, grid: Grid):
        return cls(np.zeros(grid.n_nodes), np.zeros(grid.n_nodes))

    def scaled(self, c: float) -> "GridState":
        return GridState(c * self.u, c * self.v)


def _check_len(s, grid):
    s = np.asarray(s, dtype=float)
    if s.shape != (grid.n_nodes,):
        raise ValueError(f"expected {grid.n_nodes} nodal values, got shape {s.shape}")
    return s


def _apply(s, grid, deriv, order):
    """Central differences in the interior, one-sided at the ends."""
    s = _check_len(s, grid)
    half = order // 2 + (deriv - 1) // 2  # central half-width
    width = deriv + order  # one-sided stencil length
    out = np.empty_like(s)
    n = len(s)
    w = fd_weights(tuple(range(-half, half + 1)), deriv)
    out[half:n - half] = sum(wj * s[j:n - 2 * half + j] for j, wj in enumerate(w))
    for i in range(half):
        offs = tuple(range(-i, width - i))
        out[i] = fd_weights(offs, deriv) @ s[:width]
        out[n - 1 - i] = fd_weights(tuple(-o for o in offs), deriv) @ s[::-1][:width]
    return out / grid.spacing**deriv


def dx(s, grid: Grid, order: int = 2) -> np.ndarray:
    return _apply(s, grid, 1, order)


def dxx(s, grid: Grid, order: int = 2) -> np.ndarray:
    return _apply(s, grid, 2, order)


def integrate(s, grid: Grid) -> float:
    """Composite Simpson over all nodes."""
    return float(grid.simpson_weights @ _check_len(s, grid))


def d_norm_eps(state: GridState, eps: float, grid: Grid) -> float:
    u = state.u
    ux = dx(u, grid, NORM_ORDER)
    uxx = dxx(u, grid, NORM_ORDER)
    sq = integrate(eps**2 * uxx**2 + ux**2 + u**2 + state.v**2, grid)
    return math.sqrt(max(sq, 0.0))


def d_norm(state: GridState, t: float, spec, grid: Grid) -> float:
    """The weighted distance from the null solution at time t."""
    return d_norm_eps(state, spec.eps_at(t), grid)


def poincare_ratio(phi, grid: Grid) -> float:
    """Ratio int(phi_x^2) / int(phi^2); +inf for the zero function."""
    phi = _check_len(phi, grid)
    den = integrate(phi**2, grid)
    if den < 1e-300:
        return math.inf
    return integrate(dx(phi, grid, NORM_ORDER) ** 2, grid) / den
