"""Gelfand-Levitan equation by the Nystrom method.

For fixed x the kernel row K(x, .) solves

    f(x, y) + K(x, y) + int_0^x K(x, t) f(t, y) dt = 0,   0 <= y <= x,

discretized on composite Gauss-Legendre nodes.  The potential follows from
q(x) = 2 d/dx K(x, x).  None of this touches the vessel code, which is the
point: it is the independent route the vessel potential is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .measures import SpectralMeasure, kernel_f, sqrt_node

PANEL_ORDER = 8
MAX_COND = 1e12


class IllConditionedError(ArithmeticError):
    def __init__(self, x: float, cond: float):
        super().__init__(f"Gelfand-Levitan system at x={x} is ill-conditioned (cond {cond:.3g})")
        self.x = x
        self.cond = cond


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_gauss_legendre(a: float, b: float, n_points: int, panel_order: int = PANEL_ORDER):
    """Nodes and weights of equal-width Gauss-Legendre panels on [a, b].

    ``n_points`` must be a multiple of ``panel_order``; fewer than one panel's
    worth uses a single panel of ``n_points`` nodes.
    """
    order = min(panel_order, n_points)
    if n_points < 1 or n_points % order:
        raise ValueError(f"n_points={n_points} is not a multiple of the panel order {order}")
    n_panels = n_points // order
    t, w = _leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class GLRow:
    """Solution K(x, t_j) on the quadrature nodes of [0, x]."""

    x: float
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    cond: float
    min_singular: float

    def extend(self, m: SpectralMeasure, y) -> np.ndarray | float:
        """K(x, y) at arbitrary y by Nystrom interpolation through the equation itself."""
        y = np.asarray(y, dtype=float)
        ft = kernel_f(self.nodes, y[..., None], m)
        out = -kernel_f(self.x, y, m) - ft @ (self.weights * self.values)
        return out[()] if np.ndim(out) == 0 else out

    def diagonal(self, m: SpectralMeasure) -> float:
        return float(self.extend(m, self.x))


def solve_gl(m: SpectralMeasure, x: float, n_points: int = 64, check: bool = True) -> GLRow:
    """Solve (I + F W) k = -f(x, .) for k_j ~ K(x, t_j).

    The system is solved in the similar symmetric form
    (I + W^1/2 F W^1/2) z = -W^1/2 f with k = W^-1/2 z, whose singular values
    are >= 1 whenever the measure is positive.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    t, w = composite_gauss_legendre(0.0, x, n_points)
    if m.size == 0:
        return GLRow(x, t, w, np.zeros_like(t), 1.0, 1.0)
    sw = np.sqrt(w)
    M = np.eye(t.size) + sw[:, None] * kernel_f(t[:, None], t[None, :], m) * sw[None, :]
    sv = np.linalg.svd(M, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if check and cond > MAX_COND:
        raise IllConditionedError(x, cond)
    k = np.linalg.solve(M, -sw * kernel_f(x, t, m)) / sw
    return GLRow(x, t, w, k, cond, float(sv[-1]))


def kernel_diagonal(m: SpectralMeasure, x: float, n_points: int = 64) -> float:
    """K(x, x); zero at x = 0 is not assumed (K(0, 0) = -f(0, 0))."""
    if x == 0:
        return -float(kernel_f(0.0, 0.0, m))
    return solve_gl(m, x, n_points).diagonal(m)


def _diff4(v: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid; one-sided five-point stencils at the ends."""
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    d[-1] = -(-25 * v[-1] + 48 * v[-2] - 36 * v[-3] + 16 * v[-4] - 3 * v[-5]) / (12 * h)
    d[-2] = -(-3 * v[-1] - 10 * v[-2] + 18 * v[-3] - 6 * v[-4] + v[-5]) / (12 * h)
    return d


def q_from_K(m: SpectralMeasure, x_grid, n_points: int = 64) -> np.ndarray:
    """q = 2 dK(x,x)/dx on a uniform grid of at least five points.

    Fourth-order differences: a second-order stencil at h = 1e-3 leaves
    errors near 1e-3 for atoms as deep as lam = -9.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.size < 5:
        raise ValueError("need at least five grid points")
    h = x_grid[1] - x_grid[0]
    if not np.allclose(np.diff(x_grid), h, rtol=1e-9, atol=0):
        raise ValueError("x_grid must be uniform")
    diag = np.array([kernel_diagonal(m, x, n_points) for x in x_grid])
    return 2.0 * _diff4(diag, h)


def q_at(m: SpectralMeasure, x: float, h: float = 1e-3, n_points: int = 64) -> float:
    """q at a single point from a five-point stencil of K(x, x); one-sided when x < 2h."""
    if x < 2 * h:
        return float(q_from_K(m, x + h * np.arange(5), n_points)[0])
    return float(q_from_K(m, x + h * np.arange(-2, 3), n_points)[2])


def phi_from_K(m: SpectralMeasure, x: float, mu: float, n_points: int = 64) -> float:
    """phi(x, mu) = cos(sqrt(mu) x) + int_0^x K(x, t) cos(sqrt(mu) t) dt."""
    k = sqrt_node(mu)
    if x == 0:
        return 1.0
    row = solve_gl(m, x, n_points)
    val = np.cos(k * x) + np.dot(row.weights * row.values, np.cos(k * row.nodes))
    return float(np.real(val))


def cos_from_phi(m: SpectralMeasure, x: float, mu: float, n_points: int = 64) -> float:
    """Rebuild cos(sqrt(mu) x) = phi(x) - int_0^x K1(x, t) phi(t) dt with K1(x, t) = K(t, x).

    K(t, x) for x > t comes from the extended GL row at outer point t.
    """
    if x == 0:
        return 1.0
    t, w = composite_gauss_legendre(0.0, x, n_points)
    k1 = np.array([float(solve_gl(m, s, n_points).extend(m, x)) for s in t])
    ph = np.array([phi_from_K(m, s, mu, n_points) for s in t])
    return phi_from_K(m, x, mu, n_points) - float(np.dot(w * k1, ph))


@dataclass(frozen=True)
class KernelGrid:
    """Triangular table K(x_i, t_j), t_j in [0, x_i], one GL row per outer x."""

    x_max: float
    n_panels: int
    rows: tuple[GLRow, ...]

    @property
    def x(self) -> np.ndarray:
        return np.array([r.x for r in self.rows])


def kernel_grid(m: SpectralMeasure, x_max: float, n_outer: int, n_panels: int = 8) -> KernelGrid:
    xs = np.linspace(x_max / n_outer, x_max, n_outer)
    rows = tuple(solve_gl(m, x, n_panels * PANEL_ORDER) for x in xs)
    return KernelGrid(x_max, n_panels, rows)
