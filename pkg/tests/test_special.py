"""Special-function kernels against independent extended-precision oracles."""

import math

import mpmath as mp
import numpy as np
import pytest

from qotto.special import QuadratureSpec, bessel_i0, hyp2f1_half, laguerre, periodic_quadrature

mp.mp.dps = 40


def laguerre_series(n: int, x: float) -> float:
    """Series oracle sum_k C(n,k) (-x)^k / k! in extended precision."""
    with mp.workdps(60):
        total = mp.mpf(0)
        for k in range(n + 1):
            total += mp.binomial(n, k) * (-mp.mpf(x)) ** k / mp.factorial(k)
        return float(total)


def bessel_series(z: float, terms: int = 40) -> float:
    """Power-series oracle sum_k (z^2/4)^k / (k!)^2 in extended precision."""
    with mp.workdps(60):
        q = mp.mpf(z) ** 2 / 4
        return float(sum(q**k / mp.factorial(k) ** 2 for k in range(terms)))


def table_integral_oracle(c: float, d: float, m: int, nodes: int = 200_000) -> float:
    """Dense Riemann sum of (1/2pi) int c^m / (c + d cos^2)^m dtheta."""
    th = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
    vals = (c / (c + d * np.cos(th) ** 2)) ** m
    return float(vals.mean())


class TestLaguerre:
    def test_order_zero_is_one(self):
        assert laguerre(0, 3.7) == 1.0

    def test_order_one(self):
        assert laguerre(1, 2.0) == -1.0

    def test_at_origin(self):
        assert laguerre(5, 0.0) == 1.0

    def test_against_series_oracle(self):
        assert laguerre(10, 4.0) == pytest.approx(1.3792592592592593, rel=1e-12)

    def test_recurrence_matches_series_sweep(self):
        rng = np.random.default_rng(2024)
        for _ in range(60):
            n = int(rng.integers(0, 33))
            x = float(rng.uniform(-50, 50))
            expected = laguerre_series(n, x)
            assert laguerre(n, x) == pytest.approx(expected, rel=1e-10, abs=1e-300)

    def test_vectorized_argument(self):
        x = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(laguerre(1, x), 1.0 - x)

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            laguerre(-1, 0.0)


class TestBesselI0:
    def test_at_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_against_series_oracle(self):
        assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-13)
        for z in (0.3, 2.5, 7.0, 19.0):
            assert bessel_i0(z) == pytest.approx(bessel_series(z, 80), rel=1e-13)

    def test_even(self):
        assert bessel_i0(-1.0) == bessel_i0(1.0)

    def test_monotone_and_lower_bound(self):
        grid = np.linspace(0.0, 12.0, 200)
        vals = [bessel_i0(z) for z in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(v >= 1.0 + z * z / 4.0 for z, v in zip(grid, vals))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            bessel_i0(math.inf)


class TestHyp2f1Half:
    def test_at_zero_argument(self):
        assert hyp2f1_half(3, 0.0) == 1.0

    def test_m1_closed_form(self):
        # 2F1(1/2, 1; 1; z) = (1-z)^(-1/2)
        assert hyp2f1_half(1, -0.5) == pytest.approx(1.5 ** -0.5, rel=1e-14)

    def test_against_quadrature_oracle(self):
        got = hyp2f1_half(4, -0.3)
        assert got == pytest.approx(table_integral_oracle(1.0, 0.3, 4), abs=1e-10)

    def test_quadrature_sweep(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            m = int(rng.integers(1, 41))
            z = float(rng.uniform(-0.95, 0.0))
            oracle = table_integral_oracle(1.0, -z, m)
            assert hyp2f1_half(m, z) == pytest.approx(oracle, abs=1e-10)

    def test_worst_corner(self):
        assert hyp2f1_half(40, -0.95) == pytest.approx(
            table_integral_oracle(1.0, 0.95, 40), abs=1e-10
        )

    def test_rejects_positive_argument(self):
        with pytest.raises(ValueError):
            hyp2f1_half(3, 0.1)

    def test_rejects_m_below_one(self):
        with pytest.raises(ValueError):
            hyp2f1_half(0, -0.5)


class TestPeriodicQuadrature:
    def test_constant(self):
        spec = QuadratureSpec(16)
        assert periodic_quadrature(lambda th: np.ones_like(th), spec) == pytest.approx(
            2.0 * np.pi, rel=1e-15
        )

    def test_cosine_squared(self):
        spec = QuadratureSpec(8)
        got = periodic_quadrature(lambda th: np.cos(th) ** 2, spec)
        assert got == pytest.approx(np.pi, rel=1e-14)

    def test_bessel_identity(self):
        # int_0^{2pi} exp(cos t) dt = 2 pi I0(1)
        spec = QuadratureSpec(64)
        got = periodic_quadrature(lambda th: np.exp(np.cos(th)), spec)
        assert got == pytest.approx(7.954926521012845, rel=1e-13)

    def test_trig_polynomial_exact(self):
        rng = np.random.default_rng(5)
        spec = QuadratureSpec(32)
        coeffs = rng.normal(size=(2, 15))

        def poly(th):
            out = np.full_like(th, 1.3)
            for k in range(1, 16):
                out += coeffs[0, k - 1] * np.cos(k * th) + coeffs[1, k - 1] * np.sin(k * th)
            return out

        assert periodic_quadrature(poly, spec) == pytest.approx(2.0 * np.pi * 1.3, rel=1e-12)

    def test_scalar_callable_fallback(self):
        spec = QuadratureSpec(16)
        assert periodic_quadrature(lambda th: 1.0, spec) == pytest.approx(2.0 * np.pi)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(6)
        with pytest.raises(ValueError):
            QuadratureSpec(9)
