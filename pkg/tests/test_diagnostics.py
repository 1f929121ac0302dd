import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eulerlab import (DegenerateFit, DomainError, ParamError,
                      SolutionParams, fit_blowup_exponent,
                      energy_eps_study, energy_scaling_ratio,
                      sup_velocity_gradient, sup_vorticity)
from eulerlab.diagnostics import (bkm_integral, bkm_reference,
                                  energy_radius_fit, gradient_history)


class TestBlowupFit:
    @settings(max_examples=60, deadline=None)
    @given(st.floats(-3.0, 3.0), st.floats(0.1, 50.0))
    def test_recovers_power_law(self, s, c):
        t_star = 1.0
        times = np.array([0.0, 0.2, 0.45, 0.6, 0.8])
        samples = [(t, c * (t_star - t) ** s) for t in times]
        fit = fit_blowup_exponent(samples, t_star)
        assert fit.exponent == pytest.approx(s, rel=1e-10, abs=1e-10)
        assert fit.prefactor == pytest.approx(c, rel=1e-10)
        assert fit.rms_log_residual <= 1e-12
        assert fit.sample_count == 5

    def test_needs_four_samples(self):
        samples = [(0.0, 1.0), (0.2, 2.0), (0.4, 3.0)]
        with pytest.raises(ParamError):
            fit_blowup_exponent(samples, 1.0)

    def test_rejects_invalid_samples(self):
        with pytest.raises(DomainError):
            fit_blowup_exponent([(0.0, 1.0), (0.2, -1.0), (0.4, 1.0),
                                 (0.6, 1.0)], 1.0)
        with pytest.raises(DomainError):
            fit_blowup_exponent([(0.0, 1.0), (0.2, 1.0), (0.4, 1.0),
                                 (1.2, 1.0)], 1.0)

    def test_degenerate_times(self):
        samples = [(0.5, 1.0)] * 4
        with pytest.raises(DegenerateFit):
            fit_blowup_exponent(samples, 1.0)


class TestGradientGrowth:
    def test_axial_entry_value(self, preset):
        # d v3 / d x3 = -2a/tau, so its magnitude is 2/tau at a = 1
        assert sup_velocity_gradient(preset, 0.0, entry=(2, 2)) == \
            pytest.approx(2.0, rel=1e-12)
        assert sup_velocity_gradient(preset, 0.5, entry=(2, 2)) == \
            pytest.approx(4.0, rel=1e-12)

    def test_fitted_exponent_is_type_one(self, preset):
        times = [f * preset.t_star for f in (0.0, 0.3, 0.6, 0.8)]
        samples = gradient_history(preset, times, entry=(2, 2))
        fit = fit_blowup_exponent(samples, preset.t_star)
        assert abs(fit.exponent + 1.0) <= 0.01
        assert fit.prefactor == pytest.approx(2.0, rel=1e-10)

    def test_full_norm_dominates_entry(self, preset):
        entry = sup_velocity_gradient(preset, 0.3, entry=(2, 2))
        full = sup_velocity_gradient(preset, 0.3)
        assert full >= entry


class TestVorticitySup:
    def test_preset_unit_value(self, preset):
        # |omega| = k r^-3 / tau peaks at the inner radius
        assert sup_vorticity(preset, 0.0, r_range=(1.0, 2.0)) == \
            pytest.approx(1.0, rel=1e-12)

    def test_grows_like_inverse_tau(self, preset):
        s0 = sup_vorticity(preset, 0.0, r_range=(1.0, 2.0))
        s1 = sup_vorticity(preset, 0.75, r_range=(1.0, 2.0))
        assert s1 / s0 == pytest.approx(4.0, rel=1e-12)


class TestVorticityIntegral:
    def test_log_growth(self, preset):
        got = bkm_integral(preset, 0.5, r_range=(1.0, 2.0))
        assert got == pytest.approx(math.log(2.0), rel=1e-12)

    def test_tracks_reference(self, preset):
        for t1 in (0.5, 0.8, 0.9):
            got = bkm_integral(preset, t1, r_range=(1.0, 2.0))
            ref = bkm_reference(preset, t1, r_range=(1.0, 2.0))
            assert abs(got - ref) <= 0.01 * ref

    def test_halving_tau_adds_ln_two(self, preset):
        v1 = bkm_integral(preset, 0.5, r_range=(1.0, 2.0))
        v2 = bkm_integral(preset, 0.75, r_range=(1.0, 2.0))
        assert v2 - v1 == pytest.approx(math.log(2.0), rel=1e-10)

    def test_time_validation(self, preset):
        with pytest.raises(DomainError):
            bkm_integral(preset, 0.0)
        with pytest.raises(DomainError):
            bkm_integral(preset, 1.0)


class TestEnergyScaling:
    def test_fixed_region_ratio(self, preset):
        ratio = energy_scaling_ratio(preset, 0.0, 0.5, eps=0.1, r_max=2.0)
        assert abs(ratio - 4.0) <= 1e-6

    def test_eps_study_monotone(self, preset):
        study = energy_eps_study(preset, 0.0, 2.0)
        values = [e for _, e in study]
        assert values[0] < values[1] < values[2]

    def test_eps_divergence_rate(self, preset):
        # the swirl integral behaves as eps^(-2) for a = 1, so the two
        # smallest radii differ by close to a factor of 100
        study = dict(energy_eps_study(preset, 0.0, 2.0))
        ratio = study[0.001] / study[0.01]
        assert ratio == pytest.approx(100.0, rel=0.01)

    def test_radius_growth_law(self, preset):
        # at large outer radius the meridional terms dominate and the
        # integral grows like R^5 (R^4 from r^3 dr, one more from z)
        fit = energy_radius_fit(preset, 0.0, eps=0.05,
                                radii=(8.0, 16.0, 32.0, 64.0))
        assert fit.exponent == pytest.approx(5.0, abs=0.2)
