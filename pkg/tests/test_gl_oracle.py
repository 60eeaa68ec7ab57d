import numpy as np
import pytest

from glvessel import gl_oracle as gl
from glvessel import sl
from glvessel.measures import SpectralMeasure, random_measure
from glvessel.vessel import SLVessel

ONE = SpectralMeasure(atoms=((-1.0, 1.0),))
EMPTY = SpectralMeasure()


def rank_one_K(x, y, kappa=1.0, c=1.0):
    G = x / 2 + np.sinh(2 * kappa * x) / (4 * kappa)
    return -c * np.cosh(kappa * x) * np.cosh(kappa * y) / (1 + c * G)


def test_composite_rule_exact_for_polynomials():
    t, w = gl.composite_gauss_legendre(0.0, 2.0, 32)
    assert np.sum(w * t**15) == pytest.approx(2.0**16 / 16, rel=1e-14)
    with pytest.raises(ValueError):
        gl.composite_gauss_legendre(0.0, 1.0, 12)


class TestSolve:
    def test_empty(self):
        row = gl.solve_gl(EMPTY, 1.0)
        assert np.all(row.values == 0)

    @pytest.mark.parametrize("kappa, c", [(1.0, 1.0), (2.0, 0.5)])
    def test_rank_one_oracle(self, kappa, c):
        m = SpectralMeasure(atoms=((-kappa**2, c),))
        for x in (0.3, 1.0, 2.0):
            row = gl.solve_gl(m, x, 64)
            np.testing.assert_allclose(row.values, rank_one_K(x, row.nodes, kappa, c), atol=1e-8)
            assert row.diagonal(m) == pytest.approx(rank_one_K(x, x, kappa, c), abs=1e-8)

    @pytest.mark.parametrize("seed", range(3))
    def test_vessel_identity(self, seed):
        m = random_measure(seed)
        v = SLVessel(m)
        for x in (0.5, 1.5):
            row = gl.solve_gl(m, x)
            np.testing.assert_allclose(row.values, sl.kernel_K(v, x, row.nodes), atol=1e-7)

    def test_well_posed(self):
        for seed in range(10):
            row = gl.solve_gl(random_measure(seed), 2.0)
            assert row.min_singular >= 0.99

    def test_ill_conditioned_reported(self):
        # a strongly negative weight makes I + F W nearly singular
        m = SpectralMeasure(atoms=((-1.0, -1.0 / (0.5 + np.sinh(2.0) / 4)),), signed=True)
        with pytest.raises(gl.IllConditionedError):
            gl.solve_gl(m, 1.0, 64)

    def test_x_must_be_positive(self):
        with pytest.raises(ValueError):
            gl.solve_gl(ONE, 0.0)

    def test_nystrom_convergence(self):
        m = SpectralMeasure(atoms=((-9.0, 1.0),))
        x = 3.0
        errs = []
        for n in (8, 16, 32):
            row = gl.solve_gl(m, x, n)
            errs.append(np.max(np.abs(row.values - rank_one_K(x, row.nodes, 3.0, 1.0))))
        assert errs[0] / errs[1] >= 4
        assert errs[1] / errs[2] >= 4


class TestPotential:
    def test_empty(self):
        np.testing.assert_array_equal(gl.q_from_K(EMPTY, np.linspace(0.1, 1, 10)), 0)

    def test_rank_one_oracle(self):
        xs = np.linspace(0.05, 2, 40)
        q = [gl.q_at(ONE, x, 1e-3, 64) for x in xs]
        G = xs / 2 + np.sinh(2 * xs) / 4
        q_exact = 2 * (-np.sinh(2 * xs) / (1 + G) + np.cosh(xs) ** 4 / (1 + G) ** 2)
        np.testing.assert_allclose(q, q_exact, atol=1e-5)

    def test_grid_and_point_agree(self):
        xs = 0.5 + 1e-3 * np.arange(9)
        grid = gl.q_from_K(ONE, xs)
        assert grid[4] == pytest.approx(gl.q_at(ONE, xs[4]), abs=1e-12)

    def test_one_sided_near_origin(self):
        v = SLVessel(ONE)
        assert gl.q_at(ONE, 0.0) == pytest.approx(sl.potential(v, 0.0), abs=1e-5)

    @pytest.mark.parametrize("seed", range(10))
    def test_vessel_equivalence(self, seed):
        m = random_measure(seed)
        v = SLVessel(m)
        xs = np.linspace(0.1, 2.0, 12)
        diff = [abs(gl.q_at(m, x) - sl.potential(v, x)) for x in xs]
        assert max(diff) <= 1e-5

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            gl.q_from_K(ONE, [0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            gl.q_from_K(ONE, [0.1, 0.2, 0.3, 0.5, 0.6])


class TestRepresentations:
    def test_empty(self):
        assert gl.phi_from_K(EMPTY, 1.2, 4.0) == pytest.approx(np.cos(2.4))

    def test_phi_matches_vessel(self):
        v = SLVessel(ONE)
        for x in (0.5, 1.5):
            assert gl.phi_from_K(ONE, x, -1.0) == pytest.approx(sl.phi(v, 0, x), abs=1e-7)

    @pytest.mark.parametrize("mu", [-2.0, -1.0, 3.0])
    def test_inverse_representation(self, mu):
        x = 1.2
        k = np.sqrt(complex(mu))
        assert gl.cos_from_phi(ONE, x, mu, 32) == pytest.approx(np.cos(k * x).real, abs=1e-6)

    def test_extended_row_is_transpose_kernel(self):
        # K1(x, y) = K(y, x): row at outer point y, extended to x > y
        row = gl.solve_gl(ONE, 0.6)
        assert row.extend(ONE, 1.4) == pytest.approx(rank_one_K(0.6, 1.4), abs=1e-10)


def test_kernel_grid():
    g = gl.kernel_grid(ONE, 2.0, 4, n_panels=4)
    np.testing.assert_allclose(g.x, [0.5, 1.0, 1.5, 2.0])
    for r in g.rows:
        assert r.nodes.size == 32
        assert np.all((r.nodes >= 0) & (r.nodes <= r.x))
