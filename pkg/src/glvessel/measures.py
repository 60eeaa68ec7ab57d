"""Discrete spectral measures and the kernels they generate.

A measure is a finite list of (node, weight) pairs.  Absolutely continuous
parts are discretized to Gauss-Legendre nodes up front, so everything
downstream only ever sees atoms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

MERGE_TOL = 1e-12
ZERO_NODE_TOL = 1e-14


class MeasureError(ValueError):
    """Invalid spectral data.  ``key`` names the offending config entry, if any."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


def sqrt_node(lam):
    """Square root with the cos/cosh convention: ``sqrt_node(-a) = i*sqrt(a)``.

    Works elementwise on arrays.  Nonnegative input gives the nonnegative real
    root, so ``cos(sqrt_node(lam) * x)`` is ``cosh(sqrt(|lam|) x)`` for lam < 0.
    """
    lam = np.asarray(lam, dtype=float)
    root = np.where(lam >= 0, np.sqrt(np.abs(lam)) + 0j, 1j * np.sqrt(np.abs(lam)))
    return root[()] if root.ndim == 0 else root


def _merge(pairs: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lam, w in sorted(pairs):
        if merged and abs(lam - merged[-1][0]) <= MERGE_TOL:
            merged[-1][1] += w
        else:
            merged.append([lam, w])
    return [(lam, w) for lam, w in merged]


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite spectral measure: point masses plus pre-discretized density nodes.

    ``signed=True`` disables the positivity check.  Only :func:`glvessel.kdv.perturb`
    builds such measures.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density_nodes: tuple[tuple[float, float], ...] = ()
    signed: bool = False
    _lam: np.ndarray = field(init=False, repr=False, compare=False)
    _w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple((float(a), float(b)) for a, b in self.atoms)
        dens = tuple((float(a), float(b)) for a, b in self.density_nodes)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density_nodes", dens)
        for i, (lam, w) in enumerate(atoms + dens):
            if not (np.isfinite(lam) and np.isfinite(w)):
                raise MeasureError(f"non-finite node or weight ({lam}, {w})", key=f"atoms[{i}]")
            if not self.signed and w <= 0:
                raise MeasureError(f"weight must be positive, got {w}", key=f"atoms[{i}].weight")
        merged = [(lam, w) for lam, w in _merge(atoms + dens) if w != 0.0]
        lam = np.array([p[0] for p in merged], dtype=float)
        w = np.array([p[1] for p in merged], dtype=float)
        lam.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "_lam", lam)
        object.__setattr__(self, "_w", w)

    @property
    def nodes(self) -> np.ndarray:
        """Merged energy nodes, ascending."""
        return self._lam

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def k(self) -> np.ndarray:
        return np.atleast_1d(sqrt_node(self._lam)) if self._lam.size else np.zeros(0, complex)

    @property
    def size(self) -> int:
        return int(self._lam.size)

    @property
    def total_mass(self) -> float:
        return float(self._w.sum())

    def __len__(self) -> int:
        return self.size


def omega_from_rho(rho_atoms: Sequence[tuple[float, float]]) -> SpectralMeasure:
    """Effective measure of a purely atomic spectral function.

    The free-problem subtraction ``(2/pi) sqrt(lam)`` on ``lam > 0`` is
    absolutely continuous, so it carries no atoms and the point masses pass
    through unchanged.
    """
    return SpectralMeasure(atoms=tuple(rho_atoms))


def discretize_density(points: Sequence[Sequence[float]], quad_order: int) -> tuple[tuple[float, float], ...]:
    """Gauss-Legendre discretization of a tabulated density.

    ``points`` is a table of ``(lam, density)`` pairs, linearly interpolated
    over its span.  Returns ``(node, weight)`` pairs; nodes where the density
    vanishes are dropped.
    """
    table = np.asarray(points, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise MeasureError("expected at least two [lambda, value] pairs", key="density.points")
    if quad_order < 1:
        raise MeasureError("must be >= 1", key="density.quad_order")
    order = np.argsort(table[:, 0])
    lam_tab, val_tab = table[order, 0], table[order, 1]
    if np.any(val_tab < 0):
        raise MeasureError("density values must be nonnegative", key="density.points")
    a, b = lam_tab[0], lam_tab[-1]
    t, w = np.polynomial.legendre.leggauss(quad_order)
    nodes = 0.5 * (b - a) * t + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w * np.interp(nodes, lam_tab, val_tab)
    return tuple((float(x), float(v)) for x, v in zip(nodes, weights) if v > 0)


def measure_from_dict(doc: dict[str, Any]) -> SpectralMeasure:
    """Build a measure from the JSON schema ``{"atoms": [...], "density": {...}}``."""
    if not isinstance(doc, dict):
        raise MeasureError("measure document must be a JSON object", key="measure")
    atoms_doc = doc.get("atoms", [])
    if not isinstance(atoms_doc, list):
        raise MeasureError("must be a list", key="atoms")
    atoms = []
    for i, item in enumerate(atoms_doc):
        if not isinstance(item, dict):
            raise MeasureError("must be an object with 'lambda' and 'weight'", key=f"atoms[{i}]")
        for name in ("lambda", "weight"):
            if name not in item:
                raise MeasureError("missing", key=f"atoms[{i}].{name}")
            if not isinstance(item[name], (int, float)) or isinstance(item[name], bool):
                raise MeasureError("must be a number", key=f"atoms[{i}].{name}")
        atoms.append((float(item["lambda"]), float(item["weight"])))
    density = ()
    dens_doc = doc.get("density")
    if dens_doc is not None:
        if not isinstance(dens_doc, dict):
            raise MeasureError("must be an object", key="density")
        if dens_doc.get("kind") != "table":
            raise MeasureError(f"unsupported kind {dens_doc.get('kind')!r}", key="density.kind")
        if "points" not in dens_doc:
            raise MeasureError("missing", key="density.points")
        order = dens_doc.get("quad_order", 16)
        if not isinstance(order, int) or isinstance(order, bool):
            raise MeasureError("must be an integer", key="density.quad_order")
        density = discretize_density(dens_doc["points"], order)
    return SpectralMeasure(atoms=tuple(atoms), density_nodes=density)


def load_measure(path: str | Path) -> SpectralMeasure:
    with open(path) as fh:
        return measure_from_dict(json.load(fh))


def measure_to_dict(m: SpectralMeasure) -> dict[str, Any]:
    return {"atoms": [{"lambda": float(l), "weight": float(w)} for l, w in zip(m.nodes, m.weights)]}


def random_measure(
    seed: int,
    n_atoms: int | None = None,
    lam_range: tuple[float, float] = (-9.0, -0.25),
    max_weight: float = 2.0,
    max_atoms: int = 5,
) -> SpectralMeasure:
    """Seeded random atomic measure with weights in (0, max_weight]."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_atoms + 1)) if n_atoms is None else n_atoms
    lam = rng.uniform(*lam_range, size=n)
    w = max_weight * (1.0 - rng.random(n))
    return SpectralMeasure(atoms=tuple(zip(lam.tolist(), w.tolist())))


def _cos_table(x, m: SpectralMeasure) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.cos(np.multiply.outer(x, m.k))


def kernel_f(x, y, m: SpectralMeasure):
    """``f(x, y) = sum_n b_n cos(k_n x) cos(k_n y)``; broadcasts over x and y."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if m.size == 0:
        out = np.zeros(x.shape)
    else:
        # the product of cosines first, so f(x, y) == f(y, x) bit for bit
        terms = m.weights * (_cos_table(x, m) * _cos_table(y, m))
        val = np.sum(terms, axis=-1)
        scale = np.sum(np.abs(terms), axis=-1)
        assert np.all(np.abs(val.imag) <= 1e-12 * np.maximum(scale, 1.0))
        out = val.real
    return out[()] if out.ndim == 0 else out


def kernel_F(x, y, m: SpectralMeasure):
    """``F(x, y) = sum_n b_n sin(k_n x) sin(k_n y) / lam_n``, with the ``x*y`` limit at lam = 0."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if m.size == 0:
        out = np.zeros(x.shape)
    else:
        k = m.k
        small = np.abs(m.nodes) < ZERO_NODE_TOL
        lam = np.where(small, 1.0, m.nodes)
        terms = np.sin(np.multiply.outer(x, k)) * np.sin(np.multiply.outer(y, k)) / lam
        terms = np.where(small, np.multiply.outer(x * y, np.ones(k.size)), terms)
        out = np.sum(m.weights * terms, axis=-1).real
    return out[()] if out.ndim == 0 else out
