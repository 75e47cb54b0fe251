import csv
import io
import json
import math

import pytest
from hypothesis import given

from siegel_bergman.carleson import (
    CARLESON,
    INCONCLUSIVE,
    NOT_CARLESON,
    NOT_VANISHING,
    VANISHING,
    DiagnoseConfig,
    _combine,
    carleson_condition_b_integral,
    diagnose,
    duality_check,
    probe_grid,
    toeplitz_apply,
    truncation_schedule,
)
from siegel_bergman.geometry import CPoint, rho
from siegel_bergman.integrate import RegionSpec
from siegel_bergman.kernel import bergman_kernel, kernel_constant
from siegel_bergman.measures import (
    Atomic,
    Lebesgue,
    NamedDensity,
    ResolventPower,
    ZeroFunction,
    berezin,
    eval_test_function,
)
from siegel_bergman.metric import BergmanBall

from conftest import axis, domain_points

ATOM_I = Atomic(1, ((axis(1), 1.0),))
TWO_ATOMS = Atomic(1, ((axis(1), 1.0), (axis(1, 2.0), 0.5)))
FAST = DiagnoseConfig(r=1.0, seed=7, samples=20_000, lattice_samples=1024)
PROBES = [CPoint((), 1j), CPoint((), 2j), CPoint((), 0.5 + 0.25j), CPoint((), -3 + 1j), CPoint((), 10 + 4j)]


class TestToeplitz:
    def test_unit_atom(self):
        w0 = axis(1, 2.0)
        f = ResolventPower(2.0)
        z = CPoint((), 1 + 0.5j)
        res = toeplitz_apply(Atomic(1, ((w0, 1.0),)), f, z)
        assert res.value == pytest.approx(bergman_kernel(z, w0) * eval_test_function(f, w0), rel=1e-14)

    @pytest.mark.parametrize("z", PROBES)
    def test_reproducing(self, z):
        f = ResolventPower(2.0)
        res = toeplitz_apply(Lebesgue(1), f, z, 200_000, 0)
        assert not res.divergent
        assert res.within(eval_test_function(f, z))

    def test_zero_function(self):
        mu = Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0)))
        res = toeplitz_apply(mu, ZeroFunction(), axis(1), 1000, 0)
        assert res.value == 0

    def test_divergent_flag(self):
        # rho^{-1} is not integrable toward the boundary
        res = toeplitz_apply(NamedDensity(1, "rho_power", -1.0), ResolventPower(2.0), axis(1), 50_000, 0)
        assert res.divergent
        assert math.isnan(res.value.real)


class TestDuality:
    def test_single_atom(self):
        d = duality_check(ATOM_I, ResolventPower(2.0), ResolventPower(2.0), 2.0, 200_000, 0)
        assert d.rhs == pytest.approx(1 / 16, rel=1e-15)
        assert d.agrees
        assert d.sigma <= 0.02 * abs(d.rhs)

    def test_two_atoms(self):
        d = duality_check(TWO_ATOMS, ResolventPower(2.0), ResolventPower(2.0), 2.0, 200_000, 0)
        assert d.rhs == pytest.approx(1 / 16 + 0.5 / 81, rel=1e-14)
        assert d.agrees

    def test_asymmetric_exponents(self):
        d = duality_check(TWO_ATOMS, ResolventPower(2.5), ResolventPower(1.8), 2.0, 200_000, 0)
        assert d.agrees
        assert d.sigma <= 0.02 * abs(d.rhs)

    def test_empty(self):
        d = duality_check(Atomic(1), ResolventPower(2.0), ResolventPower(2.0))
        assert d.lhs == 0 and d.rhs == 0 and d.agrees

    def test_range_violations(self):
        with pytest.raises(ValueError):
            duality_check(ATOM_I, ResolventPower(1.2), ResolventPower(2.0), 2.0)
        with pytest.raises(ValueError):
            duality_check(ATOM_I, ResolventPower(2.0), ResolventPower(1.4), 2.0)
        with pytest.raises(ValueError):
            duality_check(ATOM_I, ResolventPower(2.0), ResolventPower(2.0), 1.0)

    def test_atomic_only(self):
        with pytest.raises(TypeError):
            duality_check(Lebesgue(1), ResolventPower(2.0), ResolventPower(2.0))

    def test_json(self):
        d = duality_check(ATOM_I, ResolventPower(2.0), ResolventPower(2.0), 2.0, 1000, 0)
        obj = d.to_json()
        assert obj["rhs"][0] == pytest.approx(0.0625, rel=1e-15)
        assert set(obj) == {"lhs", "rhs", "sigma", "samples"}


class TestConditionB:
    def test_lebesgue(self):
        res = carleson_condition_b_integral(Lebesgue(1), CPoint((), 2 + 3j), 200_000, 0)
        assert res.within(4 * math.pi)

    @given(domain_points())
    def test_atom_at_a(self, a):
        res = carleson_condition_b_integral(Atomic(a.dim, ((a, 1.0),)), a)
        assert res.value == pytest.approx(rho(a) ** (-(a.dim + 1)), rel=1e-10)

    def test_atom_at_i(self):
        assert carleson_condition_b_integral(ATOM_I, axis(1)).value == pytest.approx(1.0, rel=1e-15)

    @given(domain_points(2))
    def test_bridge_atomic(self, z):
        mu = Atomic(2, ((CPoint((0.2j,), 1 + 1j), 1.0), (CPoint((0.5,), -2 + 3j), 2.5)))
        a = berezin(mu, z).value
        b = carleson_condition_b_integral(mu, z).value
        assert abs(a - kernel_constant(2) * b) <= 1e-12 * abs(a)

    def test_bridge_density_same_samples(self):
        mu = NamedDensity(1, "rho_power", 0.5, restriction=RegionSpec(0.0, 1.0))
        z = CPoint((), 0.3 + 0.7j)
        a = berezin(mu, z, 20_000, 5)
        b = carleson_condition_b_integral(mu, z, 20_000, 5)
        assert a.value == pytest.approx(kernel_constant(1) * b.value, rel=1e-12)


class TestProbeGrid:
    @pytest.mark.parametrize("n", [1, 2])
    def test_in_domain_and_tagged(self, n):
        P, tags = probe_grid(n, 10)
        assert P.shape == (len(tags), n)
        assert all(CPoint.from_array(p).in_domain for p in P)
        assert {t[0] for t in tags} == {"rho", "abs"}
        assert sorted({t[1] for t in tags}) == list(range(11))

    def test_shell_geometry(self):
        P, tags = probe_grid(1, 10)
        for p, (regime, k) in zip(P, tags):
            if regime == "rho":
                assert p[-1].imag == pytest.approx(2.0**-k)
            else:
                assert abs(p[-1]) == pytest.approx(2.0**k)


class TestSchedule:
    def test_unbounded_support_uses_slabs(self):
        regs = truncation_schedule(Lebesgue(1), 1.0)
        assert len(regs) == 3
        assert all(r.ball is None and r.bounded for r in regs)
        assert regs[0].rho_min > regs[1].rho_min > regs[2].rho_min

    def test_bounded_support_uses_balls(self):
        mu = Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0)))
        regs = truncation_schedule(mu, 1.0)
        assert [r.ball.radius for r in regs] == [1.5, 2.0, 2.5]

    def test_atom_support(self):
        regs = truncation_schedule(ATOM_I, 0.5)
        assert regs[0].ball.center == axis(1)


class TestCombine:
    def test_rules(self):
        assert _combine([True, True, True], CARLESON, NOT_CARLESON) == CARLESON
        assert _combine([False, False], CARLESON, NOT_CARLESON) == NOT_CARLESON
        assert _combine([True, False], CARLESON, NOT_CARLESON) == INCONCLUSIVE
        assert _combine([True, None], CARLESON, NOT_CARLESON) == INCONCLUSIVE

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DiagnoseConfig(r=0.0)
        with pytest.raises(ValueError):
            DiagnoseConfig(samples=0)


@pytest.fixture(scope="module")
def lebesgue_report():
    return diagnose(Lebesgue(1), FAST)


class TestDiagnose:
    def test_lebesgue(self, lebesgue_report):
        rep = lebesgue_report
        assert rep.verdict_bounded == CARLESON
        assert rep.verdict_vanishing == NOT_VANISHING
        assert rep.berezin_sup[0] == pytest.approx(1.0, abs=0.05)
        assert rep.averaging_probe_sup[0] == pytest.approx(1.0, rel=1e-12)

    def test_rho_power(self):
        rep = diagnose(NamedDensity(1, "rho_power", -0.5), FAST)
        assert rep.verdict_bounded == NOT_CARLESON
        assert rep.verdict_vanishing == NOT_VANISHING
        assert rep.slopes["rho_averaging"] == pytest.approx(-0.5, abs=0.1)

    def test_restricted_rho_power(self):
        mu = NamedDensity(1, "rho_power", 0.5, restriction=RegionSpec(0.0, 1.0))
        rep = diagnose(mu, FAST)
        assert rep.verdict_bounded == CARLESON
        assert rep.verdict_vanishing == NOT_VANISHING

    def test_atom(self):
        rep = diagnose(ATOM_I, FAST)
        assert rep.verdict_bounded == CARLESON
        assert rep.verdict_vanishing == VANISHING

    def test_ball_lebesgue(self):
        rep = diagnose(Lebesgue(1, RegionSpec(ball=BergmanBall(axis(1), 1.0))), FAST)
        assert rep.verdict_bounded == CARLESON
        assert rep.verdict_vanishing == VANISHING

    def test_witnesses_are_members(self, lebesgue_report):
        rep = lebesgue_report
        assert rep.berezin_sup[1] in rep.probes
        assert rep.averaging_probe_sup[1] in rep.probes
        assert rep.averaging_sup[1] is not None

    def test_condition_b_bridge(self):
        rep = diagnose(ATOM_I, FAST)
        probes = rep.probes
        for cb, z in zip(rep.condition_b, probes):
            assert cb * kernel_constant(1) == pytest.approx(berezin(ATOM_I, z).value, rel=1e-12)

    def test_shell_schedule(self, lebesgue_report):
        shells = lebesgue_report.shell_trend
        assert [s.k for s in shells if s.regime == "rho"] == list(range(11))
        assert [s.k for s in shells if s.regime == "abs"] == list(range(11))

    def test_json_round_trip(self, lebesgue_report):
        text = json.dumps(lebesgue_report.to_json(), sort_keys=True)
        again = json.dumps(json.loads(text), sort_keys=True)
        assert text == again
        obj = json.loads(text)
        assert obj["config"]["seed"] == 7
        assert obj["verdict_bounded"] == CARLESON

    def test_csv(self, lebesgue_report):
        rows = list(csv.DictReader(io.StringIO(lebesgue_report.shell_csv())))
        assert len(rows) == 22
        assert float(rows[0]["averaging_mean"]) == pytest.approx(1.0)

    def test_deterministic(self):
        a = diagnose(ATOM_I, FAST).to_json()
        b = diagnose(ATOM_I, FAST).to_json()
        assert a == b
