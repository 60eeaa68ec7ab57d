"""Closed-form elementary integrals, stable as the frequency goes to zero."""

import numpy as np

_SERIES_CUT = 1e-4


def sinc(z):
    """sin(z)/z for complex z (unnormalized; ``np.sinc`` is the normalized one)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_CUT
    safe = np.where(small, 1.0, z)
    z2 = z * z
    out = np.where(small, 1.0 - z2 / 6.0 + z2 * z2 / 120.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def exprel(z):
    """(exp(z) - 1)/z for complex z."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_CUT
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 + z / 2.0 + z * z / 6.0 + z**3 / 24.0, np.expm1(safe) / safe)
    return out[()] if out.ndim == 0 else out


def cos_integral(omega, phase, x):
    """Integral of cos(omega*y - phase) for y from 0 to x.

    Written as ``x * sinc(omega x / 2) * cos(omega x / 2 - phase)`` so the
    degenerate-frequency limit ``x cos(phase)`` needs no special branch.
    """
    half = np.asarray(omega) * x / 2.0
    return x * sinc(half) * np.cos(half - phase)


def exp_integral(c, x):
    """Integral of exp(c*y) for y from 0 to x."""
    return x * exprel(np.asarray(c) * x)
