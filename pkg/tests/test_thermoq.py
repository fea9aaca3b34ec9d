import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from genhamilton import thermoq as tq
from genhamilton.thermoq import TemperatureWave, TGrid, ThermoLevel

LN2 = math.log(2.0)
# 4 ln 4 - 3 ln 3, computed with mpmath at 30 digits
DENOM_21 = 2.249340578475233


class TestEntropy:
    def test_fermi_values(self):
        assert tq.entropy_fermi(0.5) == pytest.approx(LN2, abs=1e-12)
        assert tq.entropy_fermi(0.0) == 0.0
        assert tq.entropy_fermi(1.0) == 0.0
        # 4 S_F(1/4) = 4 ln 4 - 3 ln 3
        assert 4 * tq.entropy_fermi(0.25) == pytest.approx(DENOM_21, rel=1e-14)

    def test_bose_values(self):
        assert tq.entropy_bose(1.0) == pytest.approx(2 * LN2, abs=1e-12)
        assert tq.entropy_bose(2.0) == pytest.approx(1.9095425048844385, rel=1e-14)

    def test_bose_small_occupation(self):
        # mpmath: -(n ln n - (1+n) ln(1+n)) at n = 1e-7
        assert tq.entropy_bose(1e-7) == pytest.approx(1.7118095700958318e-06, rel=1e-10)
        assert tq.entropy_bose(1e-12) < 1e-10

    @pytest.mark.parametrize("bad", [-0.1, 1.1, np.nan])
    def test_fermi_domain(self, bad):
        with pytest.raises(ValueError):
            tq.entropy_fermi(bad)

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.inf])
    def test_bose_domain(self, bad):
        with pytest.raises(ValueError):
            tq.entropy_bose(bad)

    def test_vectorised(self):
        out = tq.entropy_fermi(np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(out, [0.0, LN2, 0.0], atol=1e-15)

    def test_statistics_dispatch(self):
        assert tq.level_entropy(0.5, "fermi") == tq.entropy_fermi(0.5)
        assert tq.level_entropy(0.5, "bose") == tq.entropy_bose(0.5)
        with pytest.raises(ValueError):
            tq.level_entropy(0.5, "boltzmann")

    def test_occupation_spec_validates(self):
        with pytest.raises(ValueError):
            tq.OccupationSpec("fermi", 1.5)

    @given(st.floats(0.0, 1.0))
    def test_fermi_symmetric_and_bounded(self, n):
        s = tq.entropy_fermi(n)
        assert 0.0 <= s <= LN2 + 1e-15
        assert s == pytest.approx(tq.entropy_fermi(1.0 - n), abs=1e-12)

    @given(st.floats(0.01, 0.49), st.floats(0.51, 0.99))
    def test_fermi_concave(self, a, b):
        mid = tq.entropy_fermi((a + b) / 2)
        assert mid >= (tq.entropy_fermi(a) + tq.entropy_fermi(b)) / 2 - 1e-12

    @given(st.floats(1e-6, 1e3), st.floats(1.001, 2.0))
    def test_bose_increasing(self, n, factor):
        assert tq.entropy_bose(n * factor) > tq.entropy_bose(n)

    @given(st.floats(1e-6, 1.0))
    def test_bose_exceeds_fermi(self, n):
        if n < 1.0:
            assert tq.entropy_bose(n) >= tq.entropy_fermi(n)


class TestLevels:
    def test_hydrogen_level(self):
        lv = ThermoLevel.hydrogen(3)
        assert lv.degeneracy == 9
        assert lv.occupation == pytest.approx(1 / 9)
        assert lv.base_energy == pytest.approx(-tq.RYDBERG_ENERGY / 9)

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_hydrogen_rejects(self, n):
        with pytest.raises(ValueError):
            ThermoLevel.hydrogen(n)

    def test_degeneracy_floor(self):
        with pytest.raises(ValueError):
            ThermoLevel(1, -1.0, 0.5, 0.5)

    @pytest.mark.parametrize("n", [0.0, 1.0])
    def test_determinate_level_uncorrected(self, n):
        lv = ThermoLevel(1, -3.0e-19, 1, n)
        assert tq.corrected_level(lv, 500.0) == lv.base_energy

    def test_ground_state_uncorrected(self):
        lv = ThermoLevel.hydrogen(1)
        assert tq.corrected_level(lv, 1e4) == lv.base_energy

    def test_n2_correction(self):
        # mpmath: k_B * 100 * (4 ln 4 - 3 ln 3)
        lv = ThermoLevel.hydrogen(2)
        shift = tq.corrected_level(lv, 100.0) - lv.base_energy
        assert shift == pytest.approx(3.105549820331252e-21, rel=1e-12)
        assert shift == pytest.approx(tq.energy_correction(lv, "fermi", 100.0), rel=1e-14)

    def test_correction_raises_level(self):
        for lv in tq.hydrogen_levels(6)[1:]:
            assert tq.corrected_level(lv, 10.0) > lv.base_energy

    def test_corrected_level_linear_in_T0(self):
        lv = ThermoLevel.hydrogen(4)
        d1 = tq.corrected_level(lv, 50.0) - lv.base_energy
        d2 = tq.corrected_level(lv, 100.0) - lv.base_energy
        assert d2 == pytest.approx(2 * d1, rel=1e-9)


class TestSpectrum:
    def test_uncorrected_lyman_alpha(self):
        # infinite nuclear mass: 3/4 R c
        from scipy.constants import Rydberg, c
        nu = tq.uncorrected_frequency(ThermoLevel.hydrogen(2), ThermoLevel.hydrogen(1))
        assert nu == pytest.approx(0.75 * Rydberg * c, rel=1e-12)

    def test_zero_T0_matches_uncorrected(self):
        up, lo = ThermoLevel.hydrogen(3), ThermoLevel.hydrogen(2)
        assert tq.transition_frequency(up, lo, 0.0) == pytest.approx(tq.uncorrected_frequency(up, lo), rel=1e-15)

    def test_order_enforced(self):
        with pytest.raises(ValueError):
            tq.transition_frequency(ThermoLevel.hydrogen(1), ThermoLevel.hydrogen(2), 10.0)

    def test_denominators(self):
        # mpmath references
        assert tq.t0_denominator(2, 1) == pytest.approx(DENOM_21, rel=1e-15)
        assert tq.t0_denominator(3, 1) == pytest.approx(3.139488862587287, rel=1e-14)
        assert tq.t0_denominator(3, 2) == pytest.approx(0.8901482841120536, rel=1e-14)
        assert tq.t0_denominator(6, 5) == pytest.approx(0.3708959389361574, rel=1e-13)

    def test_denominator_is_entropy_difference(self):
        for m, n in [(4, 2), (5, 1), (6, 3)]:
            lm, ln_ = ThermoLevel.hydrogen(m), ThermoLevel.hydrogen(n)
            diff = lm.degeneracy * tq.entropy_fermi(lm.occupation) - ln_.degeneracy * tq.entropy_fermi(ln_.occupation)
            assert tq.t0_denominator(m, n) == pytest.approx(diff, rel=1e-12)

    @pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (0, -1), (2.5, 1)])
    def test_denominator_domain(self, m, n):
        with pytest.raises(ValueError):
            tq.t0_denominator(m, n)

    def test_roundtrip_all_pairs(self):
        for m in range(2, 7):
            for n in range(1, m):
                up, lo = ThermoLevel.hydrogen(m), ThermoLevel.hydrogen(n)
                nu = tq.transition_frequency(up, lo, 321.0)
                T0 = tq.extract_T0(nu, tq.uncorrected_frequency(up, lo), m, n)
                assert abs(T0 / 321.0 - 1) < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1.0, 1e5), st.integers(2, 6), st.data())
    def test_roundtrip_property(self, T0, m, data):
        n = data.draw(st.integers(1, m - 1))
        up, lo = ThermoLevel.hydrogen(m), ThermoLevel.hydrogen(n)
        got = tq.extract_T0(tq.transition_frequency(up, lo, T0), tq.uncorrected_frequency(up, lo), m, n)
        assert abs(got / T0 - 1) < 1e-10

    def test_no_shift_gives_zero(self):
        assert tq.extract_T0(1e15, 1e15, 2, 1) == 0.0


class TestTemperatureEigenproblem:
    grid = TGrid(50.0, 500.0, 257)

    def test_order_two(self):
        wave = TemperatureWave(100.0)
        r1 = tq.temp_eigen_residual(wave, self.grid)
        r2 = tq.temp_eigen_residual(wave, self.grid.refined())
        assert 3.6 <= r1 / r2 <= 4.4

    def test_non_solution_rejected(self):
        wave = TemperatureWave(100.0)
        good = tq.temp_eigen_residual(wave, self.grid)
        for trial in (lambda T: np.exp(-T / 100.0), lambda T: np.exp(-50.0 / T), lambda T: T / 500.0):
            assert tq.temp_eigen_residual(wave, self.grid, phi=trial) > 1e3 * good

    def test_T0_zero_constant(self):
        assert tq.temp_eigen_residual(TemperatureWave(0.0), self.grid) == 0.0

    def test_T0_out_of_range(self):
        with pytest.raises(ValueError):
            tq.temp_eigen_residual(TemperatureWave(600.0), self.grid)

    def test_wavefunction_values(self):
        wave = TemperatureWave(100.0, A=2.0)
        assert wave(100.0) == pytest.approx(2.0 / math.e, rel=1e-15)
        with pytest.raises(ValueError):
            wave(0.0)

    def test_high_temperature_asymptote(self):
        wave = TemperatureWave(100.0, A=3.0)
        assert abs(wave(1e6 * 100.0) - 3.0) < 1e-6 * 3.0

    def test_ode_matches_closed_form(self):
        wave = TemperatureWave(100.0)
        errs = []
        for grid in (self.grid, self.grid.refined()):
            phi = tq.integrate_temperature_ode(100.0, grid, wave(grid.Tmin))
            errs.append(np.max(np.abs(phi / wave(grid.T) - 1)))
        assert errs[0] < 1e-7
        assert 14 < errs[0] / errs[1] < 18

    def test_grid_invariants(self):
        with pytest.raises(ValueError):
            TGrid(0.0, 10.0, 64)
        with pytest.raises(ValueError):
            TGrid(10.0, 5.0, 64)
        assert TGrid(1.0, 2.0, 17).refined().n == 33


class TestOperatorIdentities:
    def test_adjoint_defect_order_two(self):
        f, g = tq.bump(250.0, 150.0), tq.bump(260.0, 120.0)
        d1 = abs(tq.adjoint_defect(f, g, TGrid(50.0, 500.0, 1025)))
        d2 = abs(tq.adjoint_defect(f, g, TGrid(50.0, 500.0, 2049)))
        assert 3.6 <= d1 / d2 <= 4.4

    def test_symmetric_part(self):
        grid = TGrid(1.0, 11.0, 4096)
        f = tq.bump(6.0, 3.0)
        norm = tq._inner(f(grid.T), f(grid.T), grid.T).real
        assert abs(tq.symmetric_part(f, grid) + norm) < 1e-6

    def test_not_hermitian(self):
        grid = TGrid(50.0, 500.0, 1025)
        f = lambda T: tq.bump(250.0, 150.0)(T) * np.exp(1j * T / 20.0)
        assert abs(tq.hermiticity_gap(f, grid)) > 1e-3

    def test_edge_requirement(self):
        with pytest.raises(ValueError):
            tq.adjoint_defect(lambda T: np.ones_like(T), tq.bump(250.0, 100.0), TGrid(50.0, 500.0, 257))

    def test_bump_support(self):
        b = tq.bump(0.0, 1.0)
        np.testing.assert_array_equal(b(np.array([-2.0, -1.0, 1.0, 3.0])), 0.0)
        assert b(np.array([0.0]))[0] == pytest.approx(math.exp(-1))

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8))
    def test_commutator_exact(self, coeffs):
        T = np.linspace(1.0, 2.0, 7)
        out = tq.commutator_check(Polynomial(coeffs), T)
        scale = max(1.0, max(abs(c) for c in coeffs)) * 2.0 ** len(coeffs) * len(coeffs)
        assert np.max(np.abs(out)) <= 1e-13 * scale

    def test_commutator_zero_on_small_integers(self):
        assert np.all(tq.commutator_check([1, 2, 3], [1.0, 2.0, 3.0]) == 0.0)


class TestPlaneWave:
    def test_free_dispersion_satisfied(self):
        p, m = 1.3, 2.0
        x, t, T = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(0, 1, 4), np.linspace(100, 300, 3))
        assert tq.plane_wave_residual(p, p * p / (2 * m), 150.0, x, t, T, mass=m) < 1e-14

    def test_wrong_energy_detected(self):
        assert tq.plane_wave_residual(1.0, 0.7, 150.0, 0.0, 0.0, 300.0) > 0.05
