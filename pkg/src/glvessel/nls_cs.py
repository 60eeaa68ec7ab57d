"""Vessels with gamma = 0: the NLS hierarchy and static canonical systems.

With gamma = 0 and diagonal A the translation equation decouples row by row,

    d/dx B_n = -a_n B_n M,     M = sigma2 sigma1^-1,

and the time flow d/dt B = i A d/dx B adds a factor ``-i a_n^2 M t``.  When
M has a spectral decomposition sum_j mu_j E_j every row is a finite sum of
exponentials, so the Gram matrix integrals are closed form too.
"""

from __future__ import annotations

import numpy as np

from . import _fd
from ._integrals import exp_integral
from .vessel import FiniteVessel, VesselParams

NLS_PARAMS = VesselParams(
    sigma1=np.eye(2),
    sigma2=np.diag([0.5, -0.5]),
    gamma=np.zeros((2, 2)),
)

DEGENERATE_TOL = 1e-12


def canonical_params() -> VesselParams:
    return VesselParams(
        sigma1=[[0, 1j], [-1j, 0]],
        sigma2=np.eye(2),
        gamma=np.zeros((2, 2)),
    )


def _spectral_projectors(M: np.ndarray):
    mu, V = np.linalg.eig(M)
    if abs(np.linalg.det(V)) < 1e-10:
        raise ValueError("sigma2 sigma1^-1 is not diagonalizable")
    W = np.linalg.inv(V)
    E = np.stack([np.outer(V[:, j], W[j, :]) for j in range(mu.size)])
    return mu, E


def lyapunov_x0(a, B0, sigma1, coupling: complex = 0.0) -> np.ndarray:
    """Hermitian X0 with a_n X0_nm + X0_nm conj(a_m) + (B0 sigma1 B0*)_nm = 0.

    Pairs with a_n + conj(a_m) = 0 leave X0_nm free; they require the
    right-hand side to vanish there and take ``coupling`` (its conjugate
    below the diagonal).  A purely imaginary a_n is rejected outright.
    """
    a = np.asarray(a, dtype=complex)
    B0 = np.asarray(B0, dtype=complex).reshape(a.size, 2)
    rhs = B0 @ np.asarray(sigma1) @ B0.conj().T
    den = a[:, None] + a.conj()[None, :]
    degenerate = np.abs(den) <= DEGENERATE_TOL * max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.any(np.diag(degenerate)):
        raise ValueError("generator values on the imaginary axis make the Lyapunov equation singular")
    if np.any(np.abs(rhs[degenerate]) > 1e-12 * max(1.0, float(np.max(np.abs(rhs), initial=0.0)))):
        raise ValueError("B0 rows of a degenerate pair (a_n + conj a_m = 0) must be sigma1-orthogonal")
    X0 = np.where(degenerate, 0.0, -rhs / np.where(degenerate, 1.0, den))
    upper = np.triu(degenerate, 1)
    X0[upper] = coupling
    X0.T[upper] = np.conj(coupling)
    return X0


class ExponentialVessel(FiniteVessel):
    """Vessel with gamma = 0, diagonal generator ``a`` and B(0, 0) = B0, frozen at time ``t``."""

    def __init__(self, params: VesselParams, a, B0, X0, t: float = 0.0, gram_perturbation: float = 0.0):
        if np.any(np.abs(params.gamma) > 0):
            raise ValueError("exponential vessels need gamma = 0")
        super().__init__(params, a, gram_perturbation)
        self.B0 = np.asarray(B0, dtype=complex).reshape(self.rank, 2)
        self.X0 = np.asarray(X0, dtype=complex)
        self.t = float(t)
        mu, E = _spectral_projectors(params.sigma2 @ np.linalg.inv(params.sigma1))
        self.mu, self.E = mu, E
        a = self.generator
        # exponents of component j of row n: c x + d t
        self.c = -np.outer(a, mu)
        self.d = -1j * np.outer(a * a, mu)
        # rows B0_n E_j, shape (j, n, 2)
        self._rows0 = np.einsum("nk,jkl->jnl", self.B0, E)
        # Q[j, l] = (B0 E_j) sigma2 (B0 E_l)^*
        self._Q = np.einsum("jnk,kp,lmp->jlnm", self._rows0, params.sigma2, self._rows0.conj())

    def at(self, t: float) -> "ExponentialVessel":
        return ExponentialVessel(self.params, self.generator, self.B0, self.X0, t, self.gram_perturbation)

    def b_matrix(self, x) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((0, 2), complex)
        phase = np.exp(self.c * x + self.d * self.t)  # (n, j)
        return np.einsum("nj,jnl->nl", phase, self._rows0)

    def _parts(self, x) -> list[np.ndarray]:
        a = self.generator
        cc = self.c[:, None, :, None] + self.c.conj()[None, :, None, :]  # (n, m, j, l)
        dd = self.d[:, None, :, None] + self.d.conj()[None, :, None, :]
        Q = np.transpose(self._Q, (2, 3, 0, 1))  # (n, m, j, l)
        space = np.sum(Q * np.exp(dd * self.t) * exp_integral(cc, x), axis=(2, 3))
        time = 1j * (a[:, None] - a.conj()[None, :]) * np.sum(Q * exp_integral(dd, self.t), axis=(2, 3))
        return [self.X0.copy(), space, time]

    @property
    def x_matrix0(self) -> np.ndarray:
        return self.X0


def nls_vessel(a, B0, coupling: complex = 0.0, t: float = 0.0, gram_perturbation: float = 0.0) -> ExponentialVessel:
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    X0 = lyapunov_x0(a, B0, NLS_PARAMS.sigma1, coupling)
    return ExponentialVessel(NLS_PARAMS, a, B0, X0, t, gram_perturbation)


def canonical_vessel(a, B0, coupling: complex = 0.0, gram_perturbation: float = 0.0) -> ExponentialVessel:
    p = canonical_params()
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    return ExponentialVessel(p, a, B0, lyapunov_x0(a, B0, p.sigma1, coupling), 0.0, gram_perturbation)


def skew_residual(v: FiniteVessel, x: float) -> float:
    g = v.gamma_star(x)
    return float(np.max(np.abs(g + g.conj().T)))


def nls_beta(v: ExponentialVessel, x: float) -> complex:
    """beta(x) = gamma_*(x)[0, 1]; checks that gamma_* = [[0, beta], [-conj beta, 0]]."""
    g = v.gamma_star(x)
    scale = max(1.0, float(np.max(np.abs(v.h0(x)))))
    if max(abs(g[0, 0]), abs(g[1, 1]), abs(g[1, 0] + np.conj(g[0, 1]))) > 1e-10 * scale:
        raise ArithmeticError(f"gamma_* at x={x} does not have the NLS structure: {g}")
    return complex(g[0, 1])


def enls_residual(v: ExponentialVessel, x: float, t: float, h: float = 1e-2) -> float:
    """|i beta_t + beta_xx + 2 |beta|^2 beta| with central differences of step h."""
    here = v.at(t)
    b = lambda s: nls_beta(here, s)  # noqa: E731
    b_t = (nls_beta(v.at(t + h), x) - nls_beta(v.at(t - h), x)) / (2 * h)
    b0 = b(x)
    return float(abs(1j * b_t + _fd.d2(b, x, h) + 2 * abs(b0) ** 2 * b0))
