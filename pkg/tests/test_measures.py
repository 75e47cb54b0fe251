import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegel_bergman.geometry import CPoint, DomainError
from siegel_bergman.integrate import RegionSpec
from siegel_bergman.kernel import bergman_kernel, forelli_rudin_constant, kernel_constant
from siegel_bergman.measures import (
    Atomic,
    KernelFunction,
    KernelPower,
    Lebesgue,
    NamedDensity,
    NormalizedKernel,
    ResolventPower,
    SchemaError,
    ZeroFunction,
    averaging,
    averaging_from_mass,
    ball_mass,
    berezin,
    density_v,
    eval_test_function,
    measure_from_json,
    measure_to_json,
    mplus_check,
    salpha_sup,
    test_function_norm,
)
from siegel_bergman.metric import BergmanBall, ball_volume, bergman_distance

from conftest import axis, domain_points

ATOM_I = Atomic(1, ((axis(1), 1.0),))


class TestSchema:
    def test_atomic_round_trip(self):
        mu = Atomic(2, ((CPoint((0.5j,), 1 + 2j), 1.5), (axis(2), 0.25)))
        assert measure_from_json(measure_to_json(mu)) == mu

    def test_density_round_trip(self):
        mu = NamedDensity(1, "rho_power", -0.5, restriction=RegionSpec(0.0, 1.0))
        obj = measure_to_json(mu)
        assert obj == {"type": "density", "dim": 1, "family": "rho_power", "exponent": -0.5,
                       "restriction": {"rho_min": 0.0, "rho_max": 1.0, "max_abs": "inf"}}
        assert measure_from_json(obj) == mu

    def test_lebesgue_round_trip(self):
        mu = Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0)))
        assert measure_from_json(measure_to_json(mu)) == mu
        assert measure_from_json({"type": "lebesgue", "dim": 3}) == Lebesgue(3)

    @pytest.mark.parametrize(
        "obj",
        [
            [],
            {"type": "atomic"},
            {"type": "atomic", "dim": 1, "atoms": [{"point": {"zprime": [], "zn": [0, 1]}, "weight": 0}]},
            {"type": "atomic", "dim": 1, "atoms": [{"point": {"zprime": [], "zn": [0, -1]}, "weight": 1}]},
            {"type": "atomic", "dim": 2, "atoms": [{"point": {"zprime": [], "zn": [0, 1]}, "weight": 1}]},
            {"type": "density", "dim": 1, "family": "gaussian"},
            {"type": "density", "dim": 1, "family": "constant", "scale": -1},
            {"type": "lebesgue", "dim": 0},
            {"type": "lebesgue", "dim": 1, "restriction": {"rho_min": 2, "rho_max": 1}},
            {"type": "comb", "dim": 1},
        ],
    )
    def test_malformed(self, obj):
        with pytest.raises(SchemaError):
            measure_from_json(obj)


class TestDensity:
    def test_values(self):
        W = np.array([[4j], [0.25j]])
        np.testing.assert_allclose(density_v(NamedDensity(1, "rho_power", -0.5), W), [0.5, 2.0])
        np.testing.assert_allclose(density_v(NamedDensity(1, "constant", scale=3.0), W), [3.0, 3.0])
        np.testing.assert_allclose(density_v(Lebesgue(1, RegionSpec(0.0, 1.0)), W), [0.0, 1.0])

    def test_atomic_has_none(self):
        with pytest.raises(TypeError):
            density_v(ATOM_I, np.array([[1j]]))


class TestBerezin:
    def test_atom_at_i(self):
        res = berezin(ATOM_I, axis(1))
        assert res.value == pytest.approx(1 / (4 * math.pi), rel=1e-15)
        assert res.std_error == 0.0 and res.strategy == "exact"

    def test_atom_off_center(self):
        mu = Atomic(1, ((axis(1, 2.0), 1.0),))
        assert berezin(mu, axis(1)).value == pytest.approx(4 / (81 * math.pi), rel=1e-14)
        assert 4 / (81 * math.pi) == pytest.approx(0.015719, abs=1e-6)

    @given(domain_points())
    def test_single_atom_at_probe_is_kernel_diagonal(self, z):
        mu = Atomic(z.dim, ((z, 1.0),))
        assert berezin(mu, z).value == pytest.approx(bergman_kernel(z, z).real, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_lebesgue_is_one(self, n):
        for y in (0.01, 1.0, 100.0):
            z = CPoint((0.2,) * (n - 1), 3 + 1j * (y + 0.04 * (n - 1)))
            assert berezin(Lebesgue(n), z, 100_000, 1).within(1.0)

    def test_requires_domain(self):
        with pytest.raises(DomainError):
            berezin(ATOM_I, CPoint((), 0j))

    def test_empty_atomic(self):
        assert berezin(Atomic(1), axis(1)).value == 0.0


class TestAveraging:
    def test_lebesgue_exact(self):
        for z in (axis(1, 0.01), CPoint((0.3j,), 5 + 2j)):
            assert averaging(Lebesgue(z.dim), z, 0.7).value == pytest.approx(1.0, rel=1e-12)

    def test_atom_inside(self):
        assert averaging(ATOM_I, axis(1), 1.0).value == pytest.approx(1 / (math.pi * math.sinh(2.0) ** 2), rel=1e-14)
        assert 1 / (math.pi * math.sinh(2.0) ** 2) == pytest.approx(0.02419850, abs=1e-8)

    def test_atom_outside(self):
        assert averaging(ATOM_I, axis(1, 2.0), 0.3).value == 0.0

    @given(domain_points(), st.floats(0.05, 3.0), st.floats(0.01, 100.0))
    def test_closed_form_ratio(self, z, r, mass):
        direct = mass / ball_volume(z, r)
        assert averaging_from_mass(mass, z, r) == pytest.approx(direct, rel=1e-10)

    def test_restricted_lebesgue_mass(self):
        # D(i, 1) inside D(i, 2): mass of the restriction is the smaller volume
        mu = Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0)))
        res = ball_mass(mu, axis(1), 2.0, 100_000, 0)
        assert res.within(ball_volume(axis(1), 1.0))

    def test_density_mass(self):
        # rho^{-1/2} over D(i, r) via the exact mean over the ball, oracle by shell quadrature
        from scipy import integrate

        mu = NamedDensity(1, "rho_power", -0.5)
        r = 0.5
        # D(i, r) is the disc |z_n - i cosh 2r| < sinh 2r
        c, s = math.cosh(2 * r), math.sinh(2 * r)
        exact, _ = integrate.quad(lambda y: y**-0.5 * 2 * math.sqrt(max(s * s - (y - c) ** 2, 0.0)), c - s, c + s)
        res = ball_mass(mu, axis(1), r, 200_000, 0)
        assert res.within(exact)

    def test_nonpositive_radius(self):
        with pytest.raises(ValueError):
            averaging(ATOM_I, axis(1), 0.0)


class TestMplus:
    def test_atom(self):
        res = mplus_check(ATOM_I, 2.0)
        assert res.value == 0.25 and res.strategy == "exact"

    @pytest.mark.parametrize("n", [1, 2])
    def test_lebesgue_finite(self, n):
        alpha = 2.0 * (n + 1)
        res = mplus_check(Lebesgue(n), alpha, 200_000, 0)
        assert not res.divergent
        # 2|rho(z, i)| = |z_n + i| turns the integral into a Forelli-Rudin one at z = i
        assert res.within(2.0**-alpha * forelli_rudin_constant(n, alpha, 0.0))

    @pytest.mark.parametrize("n", [1, 2])
    def test_lebesgue_divergent(self, n):
        res = mplus_check(Lebesgue(n), float(n + 1), 100_000, 0)
        assert res.divergent and res.value == math.inf

    def test_restricted_to_ball(self):
        mu = Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0)))
        res = mplus_check(mu, 1.0, 20_000, 0)
        assert not res.divergent and res.strategy == "mc_region"

    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            mplus_check(ATOM_I, 0.0)


class TestTestFunctions:
    def test_examples(self):
        assert eval_test_function(ResolventPower(2.0), axis(1)) == pytest.approx(-0.25, abs=1e-16)
        assert eval_test_function(KernelPower(axis(1), 2.0), axis(1)) == pytest.approx(1.0, abs=1e-15)
        assert eval_test_function(NormalizedKernel(axis(1)), axis(1)) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)
        assert eval_test_function(ZeroFunction(), axis(2)) == 0
        assert eval_test_function(ResolventPower(2.0), axis(1, 2.0)) == pytest.approx(-1 / 9, rel=1e-15)

    @given(domain_points(1), domain_points(1), st.floats(1.1, 6.0))
    def test_kernel_power_modulus(self, a, z, p):
        # |g_a|^p is the Berezin kernel up to the kernel constant
        lhs = abs(eval_test_function(KernelPower(a, p), z)) ** p
        rhs = abs(bergman_kernel(z, a)) ** 2 / bergman_kernel(a, a).real / kernel_constant(1)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_norms(self):
        assert test_function_norm(ZeroFunction(), 2.0) == 0.0
        assert test_function_norm(NormalizedKernel(axis(1)), 2.0) == pytest.approx(1.0, rel=1e-14)
        assert test_function_norm(KernelFunction(axis(1)), 2.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)
        with pytest.raises(ValueError):
            test_function_norm(ResolventPower(2.0), 2.0)

    def test_resolvent_norm_quadrature(self):
        from siegel_bergman.integrate import integrate_U

        res = integrate_U(lambda W: np.abs(W[:, -1] + 1j) ** -6.0, 1, 200_000, 0)
        assert res.within(test_function_norm(ResolventPower(3.0), 2.0, n=1) ** 2)


class TestSalpha:
    def test_exact_cancellation(self):
        scan = salpha_sup(ResolventPower(2.0), 2.0, 1)
        assert scan.value == pytest.approx(1.0, rel=1e-12)
        assert not scan.unbounded

    def test_unbounded_trend(self):
        scan = salpha_sup(ResolventPower(2.0), 3.0, 1)
        assert scan.unbounded
        assert float(scan) > 1e5

    def test_zero(self):
        scan = salpha_sup(ZeroFunction(), 2.0, 2)
        assert scan.value == 0.0 and scan.argmax is None

    def test_deterministic(self):
        assert salpha_sup(NormalizedKernel(axis(2)), 1.0, 2, seed=3) == salpha_sup(NormalizedKernel(axis(2)), 1.0, 2, seed=3)
