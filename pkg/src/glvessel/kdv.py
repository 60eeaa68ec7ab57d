"""KdV time evolution of the Sturm-Liouville vessel.

Rows of B move as ``cos(k x - k^3 t)``, and the Gram matrix picks up a
time-boundary integral at x = 0.  Both integrals are done in closed form, so
the KdV residual checks only see finite-difference truncation error.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _fd
from ._integrals import cos_integral
from .measures import SpectralMeasure
from .sl import potential
from .vessel import FiniteVessel, SLVessel


class EvolvedVessel(SLVessel):
    """The SL vessel frozen at time ``t``.  At t == 0 it is the static vessel, bit for bit."""

    def __init__(self, measure: SpectralMeasure, t: float = 0.0, gram_perturbation: float = 0.0):
        super().__init__(measure, gram_perturbation)
        self.t = float(t)
        self.omega = self.k**3

    def _phase(self):
        return self.omega * self.t

    def _time_term(self) -> np.ndarray:
        # int_0^t [i A B s2 B* - i B s2 B* A* + i B g B*](0, s) ds, unweighted
        lam = self.measure.nodes
        k, w = self.k, self.omega
        i_minus = cos_integral(w[:, None] - w[None, :], 0.0, self.t)
        i_plus = cos_integral(w[:, None] + w[None, :], 0.0, self.t)
        cc = 0.5 * (i_minus + i_plus)
        ss = 0.5 * (i_minus - i_plus)
        return -(lam[:, None] + lam[None, :]) * cc - np.outer(k, k) * ss

    def gram(self, x) -> np.ndarray:
        if self.t == 0.0:
            return super().gram(x)
        th = self._phase()
        kn, km = self.k[:, None], self.k[None, :]
        tn, tm = th[:, None], th[None, :]
        return 0.5 * (cos_integral(kn - km, tn - tm, x) + cos_integral(kn + km, tn + tm, x))

    def _parts(self, x) -> list[np.ndarray]:
        parts = super()._parts(x)
        if self.t != 0.0:
            parts.append((self._weight_outer() * self._time_term()).real)
        return parts


def evolve(measure: SpectralMeasure, t: float, gram_perturbation: float = 0.0) -> EvolvedVessel:
    return EvolvedVessel(measure, t, gram_perturbation)


def b_row_t(s: EvolvedVessel, n: int, x: float) -> np.ndarray:
    return s.b_row(n, x)


def x_matrix_t(s: EvolvedVessel, x: float) -> np.ndarray:
    return s.x_matrix(x)


def dxt_rhs(v: FiniteVessel, x: float) -> np.ndarray:
    """i A B s2 B* - i B s2 B* A* + i B g B* in the working basis."""
    a = v.generator
    C, Ca = v.b_matrix(x), v.b_adjoint(x)
    P = C @ v.params.sigma2 @ Ca
    return 1j * a[:, None] * P - 1j * P * a.conj()[None, :] + 1j * C @ v.params.gamma @ Ca


def q_xt(measure: SpectralMeasure, x: float, t: float) -> float:
    """q(x, t) = -2 d^2/dx^2 ln tau(x, t) by the analytic route at frozen t."""
    return potential(EvolvedVessel(measure, t), x)


def q_xt_grid(measure: SpectralMeasure, xs, ts) -> np.ndarray:
    """q on the tensor grid xs x ts; one vessel per time slice."""
    out = np.empty((len(xs), len(ts)))
    for j, t in enumerate(ts):
        v = EvolvedVessel(measure, t)
        out[:, j] = [potential(v, x) for x in xs]
    return out


def kdv_residual(measure: SpectralMeasure, x: float, t: float, h: float = 1e-2) -> float:
    """q_t + (3/2) q q_x - (1/4) q_xxx with central differences of step h.

    Evaluation points within 2h of the quadrant edges reach into x < 0 or
    t < 0, where the formulas still hold as long as tau does not vanish.
    """
    vessels = {dt: EvolvedVessel(measure, t + dt) for dt in (-h, 0.0, h)}
    q0 = lambda s: potential(vessels[0.0], s)  # noqa: E731
    q_t = (potential(vessels[h], x) - potential(vessels[-h], x)) / (2 * h)
    return float(q_t + 1.5 * q0(x) * _fd.d1(q0, x, h) - 0.25 * _fd.d3(q0, x, h))


def boundary_trace(measure: SpectralMeasure, t: float) -> float:
    """2 sum_n b_n k_n sin(k_n^3 t), the closed-form boundary value of q(0, t)."""
    if measure.size == 0:
        return 0.0
    k = measure.k
    terms = measure.weights * k * np.sin(k**3 * t)
    val = 2.0 * np.sum(terms)
    assert abs(val.imag) <= 1e-12 * max(1.0, 2.0 * np.sum(np.abs(terms)))
    return float(val.real)


class PerturbationError(ValueError):
    def __init__(self, violation: float, tol: float):
        super().__init__(f"perturbation is not orthogonal: max |sum nu cos cos| = {violation:.3g} > {tol:.3g}")
        self.violation = violation


def orthogonality_violation(nu: Sequence[tuple[float, float]], grid_max: float = 2.0, grid_n: int = 10) -> float:
    """max over a grid_n x grid_n grid of |sum_n nu_n cos(k_n x) cos(k_n y)|."""
    if len(nu) == 0:
        return 0.0
    signed = SpectralMeasure(atoms=tuple(nu), signed=True)
    if signed.size == 0:
        return 0.0
    g = np.linspace(0.0, grid_max, grid_n)
    cos = np.cos(np.multiply.outer(g, signed.k))
    vals = np.einsum("in,jn,n->ij", cos, cos, signed.weights)
    return float(np.max(np.abs(vals)))


def perturb(
    measure: SpectralMeasure,
    nu: Sequence[tuple[float, float]],
    tol: float = 1e-10,
    grid_max: float = 2.0,
    grid_n: int = 10,
) -> SpectralMeasure:
    """omega + nu for a signed measure nu orthogonal to every cos(k x) cos(k y).

    Such a nu leaves f(x, y), hence q(x, 0), unchanged and shifts the
    boundary trace by the nu-part of :func:`boundary_trace`.
    """
    nu = tuple((float(a), float(b)) for a, b in nu)
    violation = orthogonality_violation(nu, grid_max, grid_n)
    if violation > tol:
        raise PerturbationError(violation, tol)
    out = SpectralMeasure(atoms=measure.atoms + nu, density_nodes=measure.density_nodes, signed=True)
    if np.all(out.weights > 0):
        # cancellations only: fall back to an ordinary positive measure on the merged nodes
        out = SpectralMeasure(atoms=tuple(zip(out.nodes.tolist(), out.weights.tolist())))
    return out
