"""Finite-rank vessels: B(x), the Gram operator, tau, linkage and transfer function.

Everything is expressed in a symmetrized basis.  For a measure with weights
b_n the Hilbert space is weighted by diag(b); conjugating by diag(sqrt(b))
turns the Gram operator into an ordinary Hermitian matrix

    Xs(x) = I + [sqrt(b_n b_m) G_nm(x)]

and the N x 2 matrix ``C(x)`` with rows ``sqrt(b_n) * B_n(x)`` absorbs the
weighted adjoint, so ``B* X^-1 B == C^H Xs^-1 C``.  Determinants and every
product of that shape are invariant under the similarity.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._integrals import cos_integral
from .measures import SpectralMeasure

SPECTRUM_GUARD = 1e-8
SINGULAR_COND = 1e13


class VesselError(ArithmeticError):
    pass


class SingularGramError(VesselError):
    """The Gram matrix is not invertible at ``x`` (a zero of tau)."""

    def __init__(self, x, cond: float):
        super().__init__(f"Gram matrix singular at x={float(x)!r} (condition number {cond:.3g})")
        self.x = x
        self.cond = cond


class SpectrumProximityError(VesselError):
    def __init__(self, lam, distance: float):
        super().__init__(f"lambda={lam!r} lies {distance:.3g} from the spectrum of A")
        self.lam = lam
        self.distance = distance


@dataclass(frozen=True)
class VesselParams:
    """Constant coefficient triple (sigma1, sigma2, gamma)."""

    sigma1: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        s1, s2, g = (np.array(a, dtype=complex) for a in (self.sigma1, self.sigma2, self.gamma))
        if not np.allclose(s1, s1.conj().T, atol=1e-14):
            raise ValueError("sigma1 must be Hermitian")
        if abs(np.linalg.det(s1)) < 1e-14:
            raise ValueError("sigma1 must be invertible")
        if not np.allclose(s2, s2.conj().T, atol=1e-14):
            raise ValueError("sigma2 must be Hermitian")
        if not np.allclose(g, -g.conj().T, atol=1e-14):
            raise ValueError("gamma must be skew-Hermitian")
        for name, arr in (("sigma1", s1), ("sigma2", s2), ("gamma", g)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


SL_PARAMS = VesselParams(
    sigma1=[[0, 1], [1, 0]],
    sigma2=[[1, 0], [0, 0]],
    gamma=[[0, 0], [0, 1j]],
)


def gram_entry(k_n, k_m, x):
    """Integral of cos(k_n y) cos(k_m y) over [0, x]; broadcasts."""
    k_n, k_m = np.asarray(k_n, complex), np.asarray(k_m, complex)
    return 0.5 * (cos_integral(k_n - k_m, 0.0, x) + cos_integral(k_n + k_m, 0.0, x))


class FiniteVessel:
    """Shared machinery for a rank-N vessel with diagonal generator.

    Subclasses provide ``b_matrix(x)`` (the symmetrized N x 2 matrix C),
    ``x_matrix(x)`` and ``x_matrix0``.  Nothing here mutates the vessel; the
    factorization cache is guarded by a lock so instances can be shared
    across threads.
    """

    cache_size = 64

    def __init__(self, params: VesselParams, generator, gram_perturbation: float = 0.0):
        self.params = params
        self.generator = np.asarray(generator, dtype=complex)
        self.gram_perturbation = float(gram_perturbation)
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    @property
    def rank(self) -> int:
        return int(self.generator.size)

    def b_matrix(self, x) -> np.ndarray:
        raise NotImplementedError

    def b_adjoint(self, x) -> np.ndarray:
        """2 x N matrix of B*(x) in the working basis; C^H unless the metric is indefinite."""
        return self.b_matrix(x).conj().T

    def _parts(self, x) -> list[np.ndarray]:
        """Summands of X(x); their magnitudes set the scale for singularity tests."""
        raise NotImplementedError

    def _assemble(self, x):
        parts = self._parts(x)
        X = parts[0].copy()
        for p in parts[1:]:
            X += p
        ref = np.zeros(X.shape[0])
        for p in parts:
            ref += np.abs(np.diag(p))
        return self._perturb(X), ref

    def x_matrix(self, x) -> np.ndarray:
        return self._assemble(x)[0]

    @property
    def x_matrix0(self) -> np.ndarray:
        raise NotImplementedError

    def _perturb(self, X: np.ndarray) -> np.ndarray:
        # Test hook: a non-Hermitian defect that breaks the Lyapunov identity.
        if self.gram_perturbation:
            X = X + self.gram_perturbation * np.triu(np.ones_like(X), 1)
        return X

    def _cache_key(self, x):
        return float(x)

    def _factor(self, x):
        """LU of the equilibrated matrix Y = D^-1 X D^-1.

        D is the square root of the summed magnitudes of the terms making up
        each diagonal entry.  Rows of B grow exponentially for deep atoms, so
        X spans many orders of magnitude while Y stays O(1); a small singular
        value of Y means genuine cancellation, which is a zero of tau.
        """
        key = self._cache_key(x)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        X, ref = self._assemble(x)
        d = np.sqrt(ref)
        d[~(d > 0) | ~np.isfinite(d)] = 1.0
        Y = X / np.outer(d, d)
        sv = np.linalg.svd(Y, compute_uv=False)
        cond = max(1.0, sv[0]) / sv[-1] if sv[-1] > 0 else np.inf
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularGramError(x, cond)
        entry = (d, sla.lu_factor(Y, check_finite=False))
        with self._lock:
            self._cache[key] = entry
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return entry

    def solve(self, x, rhs) -> np.ndarray:
        """Xs(x)^-1 rhs."""
        rhs = np.asarray(rhs, dtype=complex)
        if self.rank == 0:
            return rhs
        d, lu = self._factor(x)
        scale = d if rhs.ndim == 1 else d[:, None]
        return sla.lu_solve(lu, rhs / scale, check_finite=False) / scale

    def tau(self, x) -> float:
        """det(X0^-1 X(x)), taken on the equilibrated matrix for accuracy.  May be <= 0 off the vessel interval."""
        if self.rank == 0:
            return 1.0
        X, ref = self._assemble(x)
        d = np.sqrt(ref)
        d[~(d > 0) | ~np.isfinite(d)] = 1.0
        s, ld = np.linalg.slogdet(X / np.outer(d, d))
        s0, ld0 = np.linalg.slogdet(self.x_matrix0)
        return float(np.real(s / s0) * np.exp(ld + 2.0 * np.sum(np.log(d)) - ld0))

    def h0(self, x) -> np.ndarray:
        """The 2x2 matrix B*(x) X^-1(x) B(x)."""
        C = self.b_matrix(x) if self.rank else None
        if self.rank == 0 or not np.any(C):
            # B = 0 gives H0 = 0 for any X, including the X = 0 that B0 = 0 forces
            return np.zeros((2, 2), dtype=complex)
        return self.b_adjoint(x) @ self.solve(x, C)

    def gamma_star(self, x) -> np.ndarray:
        p = self.params
        H = self.h0(x)
        return p.gamma + p.sigma2 @ H @ p.sigma1 - p.sigma1 @ H @ p.sigma2

    def _check_spectrum(self, lam):
        if self.rank:
            dist = float(np.min(np.abs(lam - self.generator)))
            if dist < SPECTRUM_GUARD:
                raise SpectrumProximityError(lam, dist)

    def transfer(self, lam, x) -> np.ndarray:
        """S(lam, x) = I - B* X^-1 (lam - A)^-1 B sigma1."""
        lam = complex(lam)
        self._check_spectrum(lam)
        C = self.b_matrix(x) if self.rank else None
        if self.rank == 0 or not np.any(C):
            return np.eye(2, dtype=complex)
        RC = C / (lam - self.generator)[:, None]
        return np.eye(2) - self.b_adjoint(x) @ self.solve(x, RC) @ self.params.sigma1

    def lyapunov_matrix(self, x) -> np.ndarray:
        """A X + X A* + B sigma1 B*, entrywise in the symmetrized basis."""
        if self.rank == 0:
            return np.zeros((0, 0), dtype=complex)
        a = self.generator
        X = self.x_matrix(x)
        C = self.b_matrix(x)
        return a[:, None] * X + X * a.conj()[None, :] + C @ self.params.sigma1 @ self.b_adjoint(x)

    def lyapunov_residual(self, x) -> float:
        L = self.lyapunov_matrix(x)
        return float(np.max(np.abs(L))) if L.size else 0.0

    def resolvent_lyapunov_matrix(self, lam, x) -> np.ndarray:
        """X R*(-conj lam) + R(lam) X - R(lam) B sigma1 B* R*(-conj lam)."""
        lam = complex(lam)
        self._check_spectrum(lam)
        self._check_spectrum(-lam.conjugate())
        if self.rank == 0:
            return np.zeros((0, 0), dtype=complex)
        a = self.generator
        r = 1.0 / (lam - a)
        rs = np.conj(1.0 / (-lam.conjugate() - a))
        X = self.x_matrix(x)
        C = self.b_matrix(x)
        BsB = C @ self.params.sigma1 @ self.b_adjoint(x)
        return X * rs[None, :] + r[:, None] * X - r[:, None] * BsB * rs[None, :]

    def symmetry_residual(self, lam, x) -> float:
        """max-norm of S*(-conj lam) sigma1 S(lam) - sigma1."""
        lam = complex(lam)
        s1 = self.params.sigma1
        S = self.transfer(lam, x)
        Sm = self.transfer(-lam.conjugate(), x)
        return float(np.max(np.abs(Sm.conj().T @ s1 @ S - s1)))


class SLVessel(FiniteVessel):
    """Sturm-Liouville vessel of a finite spectral measure.

    A is multiplication by i*lam, X0 = I, B0 = (1, 0).  The rows of B are
    ``[cos(k x), -i k sin(k x)]``; this sign is the one for which the
    translation equation, Lyapunov identity and linkage hold together with
    sigma1 = [[0,1],[1,0]], sigma2 = diag(1, 0), gamma = diag(0, i).
    """

    def __init__(self, measure: SpectralMeasure, gram_perturbation: float = 0.0):
        super().__init__(SL_PARAMS, 1j * measure.nodes, gram_perturbation)
        self.measure = measure
        self.k = measure.k
        self.sqrt_w = np.sqrt(np.abs(measure.weights)) + 0j
        # signed (perturbed) measures: D^(1/2) X D^(-1/2) with D = diag(b) needs sign bookkeeping
        self.sign = np.sign(measure.weights) if measure.size else np.zeros(0)

    def _phase(self):
        return np.zeros_like(self.k)

    def b_row(self, n: int, x) -> np.ndarray:
        """Unweighted row n of B(x)."""
        if not 0 <= n < self.rank:
            raise IndexError(f"atom index {n} out of range for rank {self.rank}")
        u = self.k[n] * x - self._phase()[n]
        return np.array([np.cos(u), -1j * self.k[n] * np.sin(u)])

    def b_matrix(self, x) -> np.ndarray:
        u = self.k * x - self._phase()
        rows = np.stack([np.cos(u), -1j * self.k * np.sin(u)], axis=1)
        return self.sqrt_w[:, None] * rows

    def b_adjoint(self, x) -> np.ndarray:
        return self.b_matrix(x).conj().T * self.sign[None, :]

    def _weight_outer(self):
        # sqrt(b_n b_m) with signs kept on the column side so that X stays
        # Hermitian for positive measures and similar to the true operator otherwise
        return np.outer(self.sqrt_w, self.sqrt_w * self.sign)

    def gram(self, x) -> np.ndarray:
        """Unweighted integrals G_nm(x) of cos(k_n y) cos(k_m y)."""
        return gram_entry(self.k[:, None], self.k[None, :], x)

    def _parts(self, x) -> list[np.ndarray]:
        return [np.eye(self.rank), (self._weight_outer() * self.gram(x)).real]

    @property
    def x_matrix0(self) -> np.ndarray:
        return np.eye(self.rank)
