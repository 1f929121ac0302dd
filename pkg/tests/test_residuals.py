import json
import math

import numpy as np
import pytest

from eulerlab import (CylPoint, DomainError, ParamError, SamplingSpec,
                      SolutionParams, Variant, VariantMismatch,
                      applicable_equations, energy_ball, mutation_scan,
                      paper_gradient_discrepancy, residual_at, verify)
from eulerlab.residuals import EquationId, check_applicable
from conftest import random_params


class TestEquationCatalog:
    def test_euler_set(self):
        eqs = applicable_equations(Variant.EULER)
        assert set(eqs) == {"SwirlTransport", "VorticityTransport",
                            "StreamPoisson", "BiotSavart",
                            "Incompressibility", "CartesianMomentum",
                            "PressurePoisson"}

    def test_ns_sets_share_viscous_swirl(self):
        for variant in (Variant.NS_INVERSE_R, Variant.NS_DECAYING_SWIRL):
            eqs = applicable_equations(variant)
            assert "NSSwirlMomentum" in eqs
            assert "Incompressibility" in eqs
            assert "CartesianMomentum" in eqs
            assert "SwirlTransport" not in eqs

    def test_wrong_variant_rejected(self, preset, ns_inverse):
        with pytest.raises(VariantMismatch):
            check_applicable(preset, "NSSwirlMomentum")
        with pytest.raises(VariantMismatch):
            check_applicable(ns_inverse, "SwirlTransport")


class TestSamplingSpec:
    def test_region_validation(self):
        with pytest.raises(DomainError):
            SamplingSpec(r_lo=0.0, r_hi=2.0, z_lo=-1.0, z_hi=1.0,
                         t_hi=None, count=10, seed=1)
        with pytest.raises(DomainError):
            SamplingSpec(r_lo=1.5, r_hi=0.5, z_lo=-1.0, z_hi=1.0,
                         t_hi=None, count=10, seed=1)

    def test_count_positive(self):
        with pytest.raises(ParamError):
            SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0,
                         t_hi=None, count=0, seed=1)


class TestVerify:
    def test_preset_passes_all_equations(self, preset):
        report = verify(preset, spec=SamplingSpec(
            r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0, t_hi=None,
            count=200, seed=11))
        assert report.passed
        assert {r.equation for r in report.results} == \
            set(applicable_equations(Variant.EULER))
        for r in report.results:
            assert r.max_abs_residual <= 1e-10
            assert r.samples == 200

    def test_random_draw_passes(self, rng):
        params = random_params(rng)
        report = verify(params, spec=SamplingSpec(
            r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0, t_hi=None,
            count=100, seed=5))
        assert report.passed

    def test_subset_selection(self, preset):
        report = verify(preset, eqs=["Incompressibility"],
                        spec=SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0,
                                          z_hi=1.0, t_hi=None, count=50,
                                          seed=3))
        assert [r.equation for r in report.results] == ["Incompressibility"]

    def test_deterministic_reports(self, preset):
        spec = SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0,
                            t_hi=None, count=64, seed=9)
        r1 = verify(preset, spec=spec)
        r2 = verify(preset, spec=spec)
        d1 = json.dumps([res.to_dict() for res in r1.results],
                        sort_keys=True)
        d2 = json.dumps([res.to_dict() for res in r2.results],
                        sort_keys=True)
        assert d1 == d2

    def test_result_serialization_keys(self, preset):
        report = verify(preset, eqs=["StreamPoisson"],
                        spec=SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0,
                                          z_hi=1.0, t_hi=None, count=20,
                                          seed=2))
        d = report.results[0].to_dict()
        assert set(d) >= {"equation", "max_abs_residual", "argmax_point",
                          "samples", "pass"}
        assert set(d["argmax_point"]) == {"t", "r", "z"}

    def test_failure_reported_not_raised(self, preset):
        # an impossible tolerance flips pass to False
        report = verify(preset, eqs=["PressurePoisson"],
                        spec=SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0,
                                          z_hi=1.0, t_hi=None, count=50,
                                          seed=4),
                        tol=0.0)
        assert not report.passed


def worst_component(value):
    return np.abs(np.atleast_1d(np.asarray(value, dtype=float))).max()


class TestResidualAt:
    def test_pointwise_zero(self, preset):
        pt = CylPoint(0.25, 1.1, -0.6)
        for eq in applicable_equations(Variant.EULER):
            assert worst_component(residual_at(preset, eq, pt)) <= 1e-11

    def test_ns_variants_zero(self, ns_inverse, ns_decaying):
        pt = CylPoint(0.25, 1.1, -0.6)
        for params in (ns_inverse, ns_decaying):
            for eq in applicable_equations(params.variant):
                assert worst_component(residual_at(params, eq, pt)) <= 1e-11

    def test_ns_swirl_balance_holds_for_any_viscosity(self):
        # transport and viscous parts vanish separately for both swirl
        # profiles, so the balance is independent of nu
        pt = CylPoint(0.25, 1.1, -0.6)
        for variant in (Variant.NS_INVERSE_R, Variant.NS_DECAYING_SWIRL):
            for nu in (0.0, 0.5, 2.0):
                params = SolutionParams(a=0.5, k=0.8, t_star=1.0, nu=nu,
                                        variant=variant)
                res = residual_at(params, "NSSwirlMomentum", pt)
                assert worst_component(res) <= 1e-11


class TestMutationScan:
    def test_all_mutations_detected(self, preset):
        report = mutation_scan(preset)
        assert report.passed
        assert len(report.cases) == 30
        for case in report.cases:
            assert case.detected
            assert case.max_residual > report.threshold

    def test_case_metadata(self, preset):
        report = mutation_scan(preset, constants=("swirl_exponent",),
                               deltas=(1e-3,))
        case = report.cases[0]
        assert case.constant == "swirl_exponent"
        assert case.delta == 1e-3
        assert case.equation in applicable_equations(Variant.EULER)


class TestEnergyBall:
    def test_analytic_value(self, preset):
        # 2 pi / tau^2 * [4 z_h (I_3 + I_-3) + (8/3) z_h^3 I_1]
        eps, r_max = 0.1, 2.0
        i3 = (r_max ** 4 - eps ** 4) / 4.0
        im3 = (eps ** -2 - r_max ** -2) / 2.0
        i1 = (r_max ** 2 - eps ** 2) / 2.0
        zh = r_max
        want = 2.0 * math.pi * (2.0 * zh * (i3 + im3)
                                + (8.0 / 3.0) * zh ** 3 * i1)
        got = energy_ball(preset, 0.0, eps, r_max)
        assert got == pytest.approx(want, rel=1e-12)

    def test_time_scaling(self, preset):
        # fixed region, a = 1: E scales as 1/tau^2
        e0 = energy_ball(preset, 0.0, 0.1, 2.0)
        e1 = energy_ball(preset, 0.5, 0.1, 2.0)
        assert e1 / e0 == pytest.approx(4.0, rel=1e-12)

    def test_region_validation(self, preset):
        with pytest.raises(DomainError):
            energy_ball(preset, 0.0, 0.0, 2.0)
        with pytest.raises(DomainError):
            energy_ball(preset, 1.0, 0.1, 2.0)


class TestPrintedGradientCrossCheck:
    def test_mismatch_set(self, preset):
        rep = paper_gradient_discrepancy(preset)
        assert rep.mismatched_entries == ((0, 0), (0, 2), (1, 1), (1, 2))
        assert rep.matched_max_gap <= 1e-12
        assert rep.third_row_max_gap <= 1e-12

    def test_mismatches_are_large(self, preset):
        rep = paper_gradient_discrepancy(preset)
        for (i, j) in rep.mismatched_entries:
            assert rep.entry_max_gap[i][j] > rep.mismatch_floor
