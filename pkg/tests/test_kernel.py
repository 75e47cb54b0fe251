import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegel_bergman.geometry import CPoint, DomainError, random_domain_points, rho, rho2_v, rho_v, sigma
from siegel_bergman.integrate import integrate_U
from siegel_bergman.kernel import (
    MAX_FACTORIAL_DIM,
    bergman_kernel,
    bergman_kernel_v,
    factorial,
    forelli_rudin_constant,
    forelli_rudin_integral,
    gamma,
    growth_bound_check,
    kernel_bound,
    kernel_constant,
    kernel_norm,
    kernel_norm_constant,
    mean_value_constant,
    normalized_kernel,
)
from siegel_bergman.measures import KernelFunction, NormalizedKernel, ZeroFunction

from conftest import axis, domain_points, point_pairs


class TestGamma:
    def test_classical_values(self):
        assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)
        assert gamma(0.5) == pytest.approx(1.7724538509055160, rel=1e-14)
        assert gamma(5.0) == pytest.approx(24.0, rel=1e-14)

    @given(st.floats(1e-3, 170.0))
    def test_against_math_gamma(self, x):
        assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            gamma(0.0)
        with pytest.raises((OverflowError, ValueError)):
            gamma(172.0)

    def test_factorial(self):
        assert factorial(0) == 1
        assert factorial(5) == 120
        with pytest.raises(ValueError):
            factorial(MAX_FACTORIAL_DIM + 1)


class TestKernel:
    def test_at_i(self):
        assert bergman_kernel(axis(1), axis(1)) == pytest.approx(1 / (4 * math.pi), rel=1e-15)

    def test_off_diagonal(self):
        assert bergman_kernel(axis(1), axis(1, 2.0)) == pytest.approx(1 / (9 * math.pi), rel=1e-14)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            bergman_kernel(CPoint((), 1.0), axis(1))

    @given(point_pairs())
    def test_hermitian(self, pair):
        z, w = pair
        assert bergman_kernel(z, w) == pytest.approx(bergman_kernel(w, z).conjugate(), rel=1e-12)

    def test_bound_random_pairs(self, rng):
        for n in (1, 2, 3):
            Z = random_domain_points(n, 20_000, rng, (1e-3, 1e3))
            W = random_domain_points(n, 20_000, rng, (1e-3, 1e3))
            lhs = np.abs(bergman_kernel_v(Z, W))
            assert np.all(lhs <= kernel_bound(n, rho_v(Z), rho_v(W)) * (1 + 1e-9))

    @given(point_pairs())
    def test_transformation_law(self, pair):
        z, w = pair
        n = z.dim
        lhs = bergman_kernel(z, w)
        rhs = bergman_kernel(axis(n), sigma(z, w)) * rho(z) ** (-(n + 1))
        assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


class TestNormalizedKernel:
    def test_at_i(self):
        assert normalized_kernel(axis(1), axis(1)) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)

    @given(point_pairs())
    def test_modulus_squared(self, pair):
        z, w = pair
        n = z.dim
        lhs = abs(normalized_kernel(z, w)) ** 2
        rhs = kernel_constant(n) * rho(z) ** (n + 1) / abs(rho2_v(z.array, w.array)) ** (2 * (n + 1))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    @given(domain_points())
    def test_diagonal(self, z):
        assert normalized_kernel(z, z).real == pytest.approx(math.sqrt(bergman_kernel(z, z).real), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_unit_norm_quadrature(self, n):
        ia = axis(n).array
        res = integrate_U(lambda W: np.abs(bergman_kernel_v(W, ia)) ** 2 / kernel_constant(n), n, 200_000, 3, center=ia)
        assert res.within(1.0)


class TestForelliRudin:
    def test_examples(self):
        assert forelli_rudin_constant(1, 4, 0) == pytest.approx(4 * math.pi, rel=1e-14)
        assert forelli_rudin_constant(1, 2, 0) == math.inf
        assert forelli_rudin_constant(2, 6, 0) == pytest.approx(2 * math.pi**2, rel=1e-14)

    def test_integral_examples(self):
        assert forelli_rudin_integral(axis(1), 4, 0) == pytest.approx(4 * math.pi, rel=1e-14)
        assert forelli_rudin_integral(axis(1, 2.0), 4, 0) == pytest.approx(math.pi, rel=1e-14)
        assert forelli_rudin_integral(axis(1), 4, -1) == math.inf

    @given(st.integers(1, 4), st.floats(-0.99, 3.0), st.floats(0.05, 6.0))
    def test_convergent_region_finite(self, n, t, excess):
        assert math.isfinite(forelli_rudin_constant(n, t + n + 1 + excess, t))
        assert forelli_rudin_constant(n, t + n + 1, t) == math.inf

    @pytest.mark.parametrize("s,t", [(4, 0), (5, 1), (6, 0)])
    def test_quadrature_n1(self, s, t):
        z = axis(1, 2.0)
        za = z.array
        res = integrate_U(lambda W: rho_v(W) ** t / np.abs(rho2_v(za, W)) ** s, 1, 200_000, 1, center=za)
        assert res.within(forelli_rudin_integral(z, s, t))


class TestKernelNorm:
    def test_examples(self):
        assert kernel_norm(axis(1), 2.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)
        assert kernel_norm(axis(1, 2.0), 2.0) == pytest.approx(1 / (4 * math.sqrt(math.pi)), rel=1e-14)
        expected = (1 / (4 * math.pi)) * (6 * math.pi) ** (1 / 3)
        assert kernel_norm(axis(1), 3.0) == pytest.approx(expected, rel=1e-13)

    @given(domain_points())
    def test_p2_is_sqrt_diagonal(self, z):
        assert kernel_norm(z, 2.0) == pytest.approx(math.sqrt(bergman_kernel(z, z).real), rel=1e-12)

    def test_requires_p_above_one(self):
        with pytest.raises(ValueError):
            kernel_norm_constant(1, 1.0)

    def test_quadrature_p3(self):
        ia = axis(1).array
        res = integrate_U(lambda W: np.abs(bergman_kernel_v(W, ia)) ** 3, 1, 200_000, 5)
        assert res.within(kernel_norm(axis(1), 3.0) ** 3)


class TestGrowthBound:
    def test_normalized_kernel_at_i(self):
        # |k_i(i)| = 1/(2 sqrt(pi)) against (4/pi)^{1/2}
        assert growth_bound_check(NormalizedKernel(axis(1)), 2.0, axis(1))

    def test_zero_function(self):
        assert growth_bound_check(ZeroFunction(), 2.0, axis(2), norm=0.0)

    @given(point_pairs(), st.floats(1.1, 5.0))
    def test_kernel_functions(self, pair, p):
        w, z = pair
        assert growth_bound_check(KernelFunction(w), p, z)

    def test_infinite_norm_rejected(self):
        with pytest.raises(ValueError):
            growth_bound_check(KernelFunction(axis(1)), 2.0, axis(1), norm=math.inf)

    def test_mean_value_constant(self):
        assert mean_value_constant(1, 1.0) == pytest.approx(4 / (math.pi * math.tanh(1.0) ** 2), rel=1e-15)
