"""Sturm-Liouville layer: potential, eigensolutions and the Backlund check.

Convention: the SL spectral value mu relates to the vessel parameter by
``lam = i mu``; the output equation reads ``-y'' + q y = -i lam y``.
The potential is ``q = -2 (ln tau)''``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _fd
from .vessel import FiniteVessel, SLVessel


def potential(v: FiniteVessel, x: float) -> float:
    """q(x) from the linkage entries of H0 = B* X^-1 B.

    tau'/tau = H0[0,0] and tau''/tau = i (H0[1,0] - H0[0,1]), hence
    q = -2 (tau''/tau - (tau'/tau)^2) without differentiating anything.
    """
    H = v.h0(x)
    a = H[0, 0]
    tau2 = 1j * (H[1, 0] - H[0, 1])
    q = -2.0 * (tau2 - a * a)
    return float(q.real)


def potential_fd(v: FiniteVessel, x: float, h: float = 1e-3) -> float:
    """-2 (ln tau)'' by a central second difference."""
    return float(-2.0 * _fd.d2(lambda s: np.log(abs(v.tau(s))), x, h))


def log_tau_derivative(v: FiniteVessel, x: float) -> float:
    return float(v.h0(x)[0, 0].real)


def phi_nodes(v: SLVessel, x: float) -> np.ndarray:
    """phi(x, lam_n) at every atom: the solution of X(x) phi = cos(k x)."""
    c1 = v.b_matrix(x)[:, 0]
    return (v.solve(x, c1) / v.sqrt_w).real


def phi(v: SLVessel, mu_index: int, x: float) -> float:
    if not 0 <= mu_index < v.rank:
        raise IndexError(f"atom index {mu_index} out of range for rank {v.rank}")
    return float(phi_nodes(v, x)[mu_index])


def kernel_K(v: SLVessel, x: float, y) -> np.ndarray | float:
    """Transformation kernel K(x, y) = -sum_n b_n phi(x, lam_n) cos(k_n y).

    Defined for any y, which gives the natural extension beyond y <= x.
    """
    if v.rank == 0:
        return np.zeros_like(np.asarray(y, float))[()]
    rhs = v.solve(x, v.b_matrix(x)[:, 0])
    y = np.asarray(y, dtype=float)
    cos_y = np.cos(np.multiply.outer(y, v.k)) * (v.sqrt_w * v.sign)
    out = -(cos_y @ rhs).real
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Eigensolution:
    """phi(., mu) at the atom mu = lambda_sl.

    phi(0) = 1 and phi'(0) = K(0, 0) = -(total mass): a finite positive
    measure belongs to the boundary condition phi'(0) = -sum(b) phi(0).
    """

    lambda_sl: float
    phi: Callable[[float], float]


def eigensolution(v: SLVessel, mu_index: int) -> Eigensolution:
    lam = float(v.measure.nodes[mu_index])
    return Eigensolution(lambda_sl=lam, phi=lambda x: phi(v, mu_index, x))


def input_solution(lam: complex, x):
    """Solution of the free input equation: u1 = cos(kappa x), kappa^2 = -i lam, u2 = -i u1'."""
    kappa = np.sqrt(-1j * complex(lam))
    x = np.asarray(x, dtype=float)
    return np.stack([np.cos(kappa * x), 1j * kappa * np.sin(kappa * x)], axis=-1)


def backlund_output(v: FiniteVessel, lam: complex, x: float) -> np.ndarray:
    """y(lam, x) = S(lam, x) u(lam, x)."""
    return v.transfer(lam, x) @ input_solution(lam, x)


def backlund_residuals(v: FiniteVessel, lam: complex, x_grid) -> np.ndarray:
    """Output-equation residual at the interior points of a uniform grid.

    Returns ``|| -sigma1 y' + (sigma2 lam + gamma_*(x)) y ||`` with y' taken by
    central differences over the grid spacing.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    h = x_grid[1] - x_grid[0]
    if not np.allclose(np.diff(x_grid), h, rtol=1e-9, atol=0):
        raise ValueError("x_grid must be uniform")
    lam = complex(lam)
    p = v.params
    ys = np.array([backlund_output(v, lam, x) for x in x_grid])
    dy = (ys[2:] - ys[:-2]) / (2 * h)
    out = np.empty(len(x_grid) - 2)
    for i, x in enumerate(x_grid[1:-1]):
        r = -p.sigma1 @ dy[i] + (lam * p.sigma2 + v.gamma_star(x)) @ ys[i + 1]
        out[i] = np.linalg.norm(r)
    return out


def backlund_residual(v: FiniteVessel, lam: complex, x_grid) -> float:
    return float(np.max(backlund_residuals(v, lam, x_grid)))


def backlund_scalar_residual(v: FiniteVessel, lam: complex, x_grid) -> float:
    """max |-y1'' + q y1 + i lam y1| over interior grid points."""
    x_grid = np.asarray(x_grid, dtype=float)
    h = x_grid[1] - x_grid[0]
    y1 = np.array([backlund_output(v, lam, x)[0] for x in x_grid])
    d2 = (y1[2:] - 2 * y1[1:-1] + y1[:-2]) / (h * h)
    q = np.array([potential(v, x) for x in x_grid[1:-1]])
    return float(np.max(np.abs(-d2 + q * y1[1:-1] + 1j * complex(lam) * y1[1:-1])))
