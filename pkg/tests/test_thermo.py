"""Closed-form cycle thermodynamics against frozen oracles and property sweeps."""

import math

import numpy as np
import pytest

from qotto.thermo import (
    CycleMode,
    QuasistaticCycle,
    Reservoir,
    clausius_residuals,
    cooling_limit,
    nu_kappa,
    quasistatic_report,
    stage_entropy,
    thermal_occupation,
)


def random_cycle(rng) -> QuasistaticCycle:
    omega_c = float(rng.uniform(0.1, 5.0))
    omega_h = omega_c * float(rng.uniform(1.01, 5.0))
    return QuasistaticCycle(
        cold=Reservoir(omega_c, float(rng.uniform(0.1, 10.0))),
        hot=Reservoir(omega_h, float(rng.uniform(0.1, 10.0))),
    )


class TestOccupation:
    def test_log2_point(self):
        # exp(ln 2) - 1 = 1
        assert thermal_occupation(math.log(2.0), 1.0) == pytest.approx(1.0, rel=1e-14)

    def test_reference_value(self):
        assert thermal_occupation(1.0, 2.0) == pytest.approx(1.5414940825367983, rel=1e-14)

    def test_low_temperature_limit(self):
        assert thermal_occupation(30.0, 1.0) == pytest.approx(9.357622968841051e-14, rel=1e-10)

    def test_nu_kappa_reference(self):
        nu, kappa = nu_kappa(1.0, 2.0)
        assert nu == pytest.approx(2.0414940825367983, rel=1e-14)
        assert kappa == pytest.approx(0.24491866240370913, rel=1e-14)

    def test_nu_kappa_identity_sweep(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            nu, kappa = nu_kappa(float(rng.uniform(0.05, 20)), float(rng.uniform(0.05, 20)))
            assert abs(kappa * 2.0 * nu - 1.0) < 1e-14

    def test_ground_state_limit(self):
        nu, kappa = nu_kappa(1.0, 1e-3)
        assert nu == pytest.approx(0.5, abs=1e-12)
        assert kappa == pytest.approx(1.0, abs=1e-12)


class TestStageEntropy:
    def test_reference_value(self):
        assert stage_entropy(0.5, 1.0) == pytest.approx(1.7034991708355878, rel=1e-13)

    def test_ground_state_limit(self):
        s = stage_entropy(40.0, 1.0)
        assert 0.0 <= s < 1e-12

    def test_positive_everywhere(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            assert stage_entropy(float(rng.uniform(0.01, 30)), float(rng.uniform(0.05, 20))) >= 0.0


class TestQuasistaticReport:
    def test_heat_engine_example(self):
        rep = quasistatic_report(
            QuasistaticCycle(cold=Reservoir(1.0, 1.0), hot=Reservoir(2.0, 4.0))
        )
        assert rep.lam == pytest.approx(0.5)
        assert rep.mode is CycleMode.HEAT_ENGINE
        assert rep.eta == pytest.approx(0.5)
        assert rep.zeta is None
        assert rep.eta_carnot == pytest.approx(0.75)
        assert rep.nu_c == pytest.approx(1.0819767068693265, rel=1e-12)
        assert rep.nu_h == pytest.approx(2.0414940825367983, rel=1e-12)
        assert rep.R == pytest.approx(0.9595173756674715, rel=1e-12)
        assert rep.Q1 == pytest.approx(1.9190347513349430, rel=1e-12)
        assert rep.C_BC > 0.0 and rep.C_DA > 0.0

    def test_refrigerator_example(self):
        rep = quasistatic_report(
            QuasistaticCycle(cold=Reservoir(1.0, 2.0), hot=Reservoir(2.0, 1.0))
        )
        assert rep.lam == pytest.approx(-1.5)
        assert rep.mode is CycleMode.REFRIGERATOR
        assert rep.zeta == pytest.approx(1.0)
        assert rep.eta is None

    def test_degenerate_point(self):
        rep = quasistatic_report(
            QuasistaticCycle(cold=Reservoir(1.0, 1.0), hot=Reservoir(2.0, 2.0))
        )
        assert rep.lam == 0.0
        assert rep.mode is CycleMode.DEGENERATE
        assert rep.R == pytest.approx(0.0, abs=1e-15)
        assert rep.Q1 == pytest.approx(0.0, abs=1e-15)
        assert rep.Q2 == pytest.approx(0.0, abs=1e-15)
        assert rep.C_BC == pytest.approx(0.0, abs=1e-15)
        assert rep.C_DA == pytest.approx(0.0, abs=1e-15)

    def test_rejects_bad_frequency_order(self):
        with pytest.raises(ValueError, match="omega"):
            QuasistaticCycle(cold=Reservoir(2.0, 1.0), hot=Reservoir(1.0, 4.0))

    def test_eta_independent_of_temperatures(self):
        etas = set()
        for (t_c, t_h) in [(1.0, 4.0), (0.5, 3.0), (2.0, 9.0), (0.1, 0.9)]:
            rep = quasistatic_report(
                QuasistaticCycle(cold=Reservoir(1.0, t_c), hot=Reservoir(2.0, t_h))
            )
            assert rep.mode is CycleMode.HEAT_ENGINE
            etas.add(rep.eta)
        assert len(etas) == 1

    def test_property_sweep(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            cycle = random_cycle(rng)
            rep = quasistatic_report(cycle)
            # first law around the closed cycle
            assert abs(rep.R - (rep.Q1 + rep.Q2)) < 1e-12
            assert rep.R == pytest.approx(rep.R1 + rep.R2, abs=1e-12)
            # opposite-sign stroke works and heats
            assert rep.R1 * rep.R2 <= 0.0
            assert rep.Q1 * rep.Q2 <= 0.0
            # direction parameter
            assert math.copysign(1.0, rep.R) == math.copysign(1.0, rep.lam) or rep.R == 0.0
            assert (rep.nu_h - rep.nu_c) * rep.lam >= 0.0
            # Clausius residuals on both isochores
            assert rep.C_BC >= -1e-12
            assert rep.C_DA >= -1e-12
            if rep.mode is CycleMode.HEAT_ENGINE:
                assert rep.eta < rep.eta_carnot
            # occupation-difference identity
            x_c = 0.5 * cycle.cold.omega / cycle.cold.temperature
            x_h = 0.5 * cycle.hot.omega / cycle.hot.temperature
            ident = math.sinh(x_c - x_h) / (math.sinh(x_c) * math.sinh(x_h))
            assert rep.nu_h - rep.nu_c == pytest.approx(ident, rel=1e-9, abs=1e-12)

    def test_clausius_standalone_matches_report(self):
        cycle = QuasistaticCycle(cold=Reservoir(1.0, 1.0), hot=Reservoir(2.0, 4.0))
        rep = quasistatic_report(cycle)
        c_bc, c_da = clausius_residuals(cycle)
        assert rep.C_BC == c_bc and rep.C_DA == c_da


class TestCoolingLimit:
    def test_reference_ratio(self):
        assert cooling_limit(Reservoir(2.0, 4.0), 1.0, 2.0) == pytest.approx(2.0)

    def test_no_contrast_no_cooling(self):
        t = cooling_limit(Reservoir(2.0, 4.0), 2.0 * (1 - 1e-9), 2.0)
        assert t == pytest.approx(4.0, rel=1e-8)

    def test_limit_sits_on_degenerate_line(self):
        t_c = cooling_limit(Reservoir(2.0, 4.0), 1.0, 2.0)
        rep = quasistatic_report(
            QuasistaticCycle(cold=Reservoir(1.0, t_c), hot=Reservoir(2.0, 4.0))
        )
        assert rep.lam == 0.0

    def test_rejects_bad_frequencies(self):
        with pytest.raises(ValueError):
            cooling_limit(Reservoir(2.0, 4.0), 2.0, 1.0)


class TestValidation:
    def test_reservoir_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Reservoir(0.0, 1.0)
        with pytest.raises(ValueError):
            Reservoir(1.0, -1.0)
