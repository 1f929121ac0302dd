"""End-to-end acceptance gate.

Eight criteria, one test each, every one timed against a wall-clock
budget. Each test prints a single pass/fail summary line (run with -s
to see them) and then asserts the individual bounds, so a failure
report names the precise check that broke.
"""

import time
from fractions import Fraction

import numpy as np

from conftest import PRESET, random_params
from eulerlab import (SamplingSpec, SolutionParams, Variant, verify,
                      trajectory_closed_form)
from eulerlab.characteristics import (flow_closed_form, flow_numeric,
                                      rk4_order_estimate, swirl_drift)
from eulerlab.derivation import replay_derivation
from eulerlab.diagnostics import (bkm_curve, bkm_reference,
                                  energy_eps_study, energy_scaling_ratio,
                                  fit_blowup_exponent, gradient_history)
from eulerlab.residuals import mutation_scan, paper_gradient_discrepancy
from eulerlab.simulator import (AnnulusGrid, GridField, convergence_study,
                                exact_stream_bc, solve_stream)
from eulerlab.solutions import stream_value

REGION = dict(r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0)


def _spec(count=1000, seed=0):
    return SamplingSpec(count=count, seed=seed, **REGION)


def _line(number, ok, elapsed, budget, label):
    flag = "PASS" if ok else "FAIL"
    print(f"[{flag}] criterion {number}: {label} "
          f"({elapsed:.2f}s of {budget:g}s budget)")


def test_criterion_1_euler_family_residuals():
    budget, t0 = 10.0, time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    all_ok = True
    for i in range(20):
        params = random_params(rng)
        report = verify(params, spec=_spec(seed=1000 + i), tol=1e-10)
        worst = max(worst, max(r.max_abs_residual
                               for r in report.results))
        all_ok = all_ok and report.passed
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed <= budget
    _line(1, ok, elapsed, budget,
          f"20 random Euler members, worst residual {worst:.2e}")
    assert all_ok, f"residual above 1e-10: worst {worst:.3e}"
    assert elapsed <= budget


def test_criterion_2_ns_variant_residuals():
    budget, t0 = 5.0, time.perf_counter()
    rng = np.random.default_rng(202)
    eqs = ["Incompressibility", "NSSwirlMomentum", "CartesianMomentum"]
    worst = 0.0
    all_ok = True
    for variant in (Variant.NS_INVERSE_R, Variant.NS_DECAYING_SWIRL):
        for i in range(10):
            params = random_params(rng, variant=variant, a_hi=1.0,
                                   k_hi=2.0, t_star_hi=2.0)
            report = verify(params, eqs=eqs, spec=_spec(seed=2000 + i),
                            tol=1e-10)
            worst = max(worst, max(r.max_abs_residual
                                   for r in report.results))
            all_ok = all_ok and report.passed
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed <= budget
    _line(2, ok, elapsed, budget,
          f"both swirl families, worst residual {worst:.2e}")
    assert all_ok, f"residual above 1e-10: worst {worst:.3e}"
    assert elapsed <= budget


def test_criterion_3_exponent_replay():
    budget, t0 = 1.0, time.perf_counter()
    replay = replay_derivation()
    assignments = {sym: str(val)
                   for stage in replay.stages
                   for sym, val in
                   stage.outcome.principal.assignments.items()}
    expected = {"p": "1", "q": "1", "b": "-2*a", "abar": "-a",
                "p1": "0", "q1": "(-a - 1)/a"}
    symbolic_ok = assignments == expected
    concrete_ok = (
        str(replay_derivation(a_value=Fraction(1)).swirl_exponent) == "-2"
        and str(replay_derivation(
            a_value=Fraction(-1, 2)).swirl_exponent) == "1")
    members_ok = True
    for a in (1.0, -0.5):
        params = SolutionParams(a=a, k=1.0, t_star=1.0)
        members_ok = members_ok and verify(
            params, spec=_spec(seed=33), tol=1e-10).passed
    elapsed = time.perf_counter() - t0
    ok = symbolic_ok and concrete_ok and members_ok and elapsed <= budget
    _line(3, ok, elapsed, budget, "exponent replay and both members")
    assert symbolic_ok, assignments
    assert concrete_ok
    assert members_ok
    assert elapsed <= budget


def test_criterion_4_perturbation_detection():
    budget, t0 = 5.0, time.perf_counter()
    report = mutation_scan(PRESET)
    elapsed = time.perf_counter() - t0
    missed = [c for c in report.cases if not c.detected]
    ok = report.passed and not missed and elapsed <= budget
    _line(4, ok, elapsed, budget,
          f"{len(report.cases)} perturbed constants all detected")
    assert len(report.cases) == 30
    assert all(abs(c.delta) >= 1e-3 for c in report.cases)
    assert report.threshold == 1e-5
    assert not missed, [(c.constant, c.delta) for c in missed]
    assert elapsed <= budget


def test_criterion_5_characteristic_integration():
    budget, t0 = 5.0, time.perf_counter()
    t_end = 0.5
    numeric = flow_numeric(PRESET, 0.0, 1.0, 0.5, t_end, 1e-3)
    r_ref, z_ref = flow_closed_form(PRESET, 0.0, 1.0, 0.5, t_end)
    _, r_num, z_num = numeric.final()
    gap = float(np.hypot(r_num - r_ref, z_num - z_ref))
    closed = trajectory_closed_form(PRESET, 0.0, 1.0, 0.5, t_end)
    drift_closed = swirl_drift(PRESET, closed)
    drift_numeric = swirl_drift(PRESET, numeric)
    orders = rk4_order_estimate(PRESET, 0.0, 1.0, 0.5, t_end)
    orders_ok = all(3.7 <= o <= 4.3 for o in orders)
    elapsed = time.perf_counter() - t0
    ok = (gap <= 1e-7 and drift_closed <= 1e-9
          and drift_numeric <= 1e-7 and orders_ok and elapsed <= budget)
    _line(5, ok, elapsed, budget,
          f"endpoint gap {gap:.2e}, orders "
          + "/".join(f"{o:.2f}" for o in orders))
    assert gap <= 1e-7
    assert drift_closed <= 1e-9
    assert drift_numeric <= 1e-7
    assert orders_ok, orders
    assert elapsed <= budget


def test_criterion_6_advection_convergence():
    budget, t0 = 60.0, time.perf_counter()
    study = convergence_study(PRESET, resolutions=(65, 129),
                              t_end=0.5 * PRESET.t_star,
                              velocity_source="ExactMeridional",
                              **REGION)
    coarse = study.entries[0].rel_linf
    orders_ok = all(1.7 <= o <= 2.3 for o in study.orders)

    grid = AnnulusGrid(nr=65, nz=65, **REGION)
    omega = GridField(grid, np.zeros((grid.nr, grid.nz)), 0.0)
    psi = solve_stream(grid, omega, exact_stream_bc(PRESET, grid, 0.0),
                       tol=1e-10)
    rr, zz = grid.mesh()
    psi_err = float(np.max(np.abs(
        psi.values - stream_value(PRESET, 0.0, rr, zz))))
    elapsed = time.perf_counter() - t0
    ok = (coarse <= 0.01 and orders_ok and psi_err <= 1e-8
          and elapsed <= budget)
    _line(6, ok, elapsed, budget,
          f"coarse error {coarse:.2e}, order "
          + "/".join(f"{o:.2f}" for o in study.orders)
          + f", stream error {psi_err:.2e}")
    assert coarse <= 0.01
    assert orders_ok, study.orders
    assert psi_err <= 1e-8
    assert elapsed <= budget


def test_criterion_7_blowup_diagnostics():
    budget, t0 = 10.0, time.perf_counter()
    times = [f * PRESET.t_star for f in (0.0, 0.3, 0.6, 0.8)]
    fit = fit_blowup_exponent(
        gradient_history(PRESET, times, entry=(2, 2)), PRESET.t_star)
    fit_ok = abs(fit.exponent + 1.0) <= 0.01

    t1s = [f * PRESET.t_star for f in (0.5, 0.8, 0.9)]
    curve = bkm_curve(PRESET, t1s)
    bkm_err = max(abs(v / bkm_reference(PRESET, t1) - 1.0)
                  for t1, v in curve)

    ratio = energy_scaling_ratio(PRESET, 0.0, 0.5 * PRESET.t_star,
                                 eps=0.1, r_max=2.0)
    study = energy_eps_study(PRESET, 0.0, 2.0,
                             eps_values=(0.1, 0.01, 0.001))
    energies = [e for _, e in study]
    monotone = all(b > a for a, b in zip(energies, energies[1:]))
    elapsed = time.perf_counter() - t0
    ok = (fit_ok and bkm_err <= 0.01 and abs(ratio - 4.0) <= 1e-6
          and monotone and elapsed <= budget)
    _line(7, ok, elapsed, budget,
          f"exponent {fit.exponent:.4f}, vorticity-integral error "
          f"{bkm_err:.2e}, energy ratio {ratio:.8f}")
    assert fit_ok, fit.exponent
    assert bkm_err <= 0.01
    assert abs(ratio - 4.0) <= 1e-6
    assert monotone, energies
    assert elapsed <= budget


def test_criterion_8_printed_gradient_audit():
    budget, t0 = 1.0, time.perf_counter()
    report = paper_gradient_discrepancy(PRESET)
    elapsed = time.perf_counter() - t0
    expected = ((0, 0), (0, 2), (1, 1), (1, 2))
    set_ok = report.mismatched_entries == expected
    rows_ok = (report.matched_max_gap <= 1e-12
               and report.third_row_max_gap <= 1e-12)
    ok = set_ok and rows_ok and elapsed <= budget
    _line(8, ok, elapsed, budget,
          f"mismatched entries {report.mismatched_entries}, "
          f"matched gap {report.matched_max_gap:.1e}")
    assert set_ok, report.mismatched_entries
    assert rows_ok, (report.matched_max_gap, report.third_row_max_gap)
    assert elapsed <= budget
