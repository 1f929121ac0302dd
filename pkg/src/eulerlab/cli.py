"""Command-line front end.

Subcommands: verify, derive, trace, simulate, diagnose, all. Exit code
0 when every check passes, 1 when a check fails, 2 on configuration
errors; diagnostics go to stderr. Each run writes report.json, CSV
series, and rendered figures into the output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from . import figures
from .characteristics import (conserved_swirl, flow_closed_form,
                              flow_numeric, rk4_order_estimate,
                              swirl_drift, trajectory_closed_form)
from .config import RunConfig, build_run_config, load_config_file
from .derivation import (OPERATORS, apply_operator, format_replay,
                         replay_derivation, solve_exponent_constraints)
from .diagnostics import (bkm_curve, bkm_reference, energy_eps_study,
                          energy_scaling_ratio, fit_blowup_exponent,
                          gradient_history)
from .errors import (CFLViolation, ConfigError, DegenerateFit, DomainError,
                     EulerLabError, MissingField, NoConvergence, ParamError,
                     StepError, UnsupportedForm, VariantError)
from .jets import CENTRAL_DIFFERENCE, EXACT, EXACT_JET, DiffConfig
from .monomials import parse_monomial_sum
from .params import Variant
from .reporting import (build_report, write_report, write_snapshot_csv,
                        write_trajectory_csv)
from .residuals import EquationId, SamplingSpec, verify
from .simulator import (AdvectLog, AnnulusGrid, GridField, SimConfig,
                        SolveInfo, VELOCITY_SOURCES, advect_swirl,
                        convergence_study, error_report, exact_stream_bc,
                        exact_swirl_field, solve_stream)
from .solutions import stream_value

_CONFIG_ERRORS = (ConfigError, ParamError, UnsupportedForm, VariantError,
                  DomainError, StepError, MissingField)


def _flag(status: bool) -> str:
    return "[PASS]" if status else "[FAIL]"


def _say(*parts) -> None:
    print(" ".join(str(p) for p in parts))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--a", type=float, dest="a")
    common.add_argument("--k", type=float, dest="k")
    common.add_argument("--t-star", type=float, dest="t_star")
    common.add_argument("--nu", type=float, dest="nu")
    common.add_argument("--variant",
                        choices=[v.value for v in Variant])
    common.add_argument("--r-lo", type=float, dest="r_lo")
    common.add_argument("--r-hi", type=float, dest="r_hi")
    common.add_argument("--z-lo", type=float, dest="z_lo")
    common.add_argument("--z-hi", type=float, dest="z_hi")
    common.add_argument("--nr", type=int)
    common.add_argument("--nz", type=int)
    common.add_argument("--cfl", type=float)
    common.add_argument("--t-end", type=float, dest="t_end")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--diff-mode", choices=[EXACT_JET,
                                                CENTRAL_DIFFERENCE],
                        default=EXACT_JET,
                        help="derivative engine for residual checks")
    common.add_argument("--diff-h", type=float, default=1e-4,
                        help="step for the central-difference mode")

    parser = argparse.ArgumentParser(
        prog="eulerlab",
        description="verification lab for a self-similar axisymmetric "
                    "flow family")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser(
        "verify", parents=[common],
        help="sample the governing-equation residuals")
    p_verify.add_argument("--count", type=int, default=1000,
                          help="sample points per equation")
    p_verify.add_argument("--equations", nargs="+", metavar="EQ",
                          help="subset of equation names")

    p_derive = sub.add_parser(
        "derive", parents=[common],
        help="replay the power-law ansatz solve")
    p_derive.add_argument("--preset", default="euler-selfsimilar",
                          choices=["euler-selfsimilar"])
    p_derive.add_argument("--rational-a", metavar="FRAC",
                          help="concrete rational a, e.g. -1/2")
    p_derive.add_argument("--verbose", action="store_true")
    p_derive.add_argument("--field", action="append", metavar="ROLE=EXPR",
                          help="custom ansatz entry, e.g. "
                               "vr='a*r^p*tau^-1' (repeatable)")
    p_derive.add_argument("--require", action="append", metavar="OP",
                          choices=list(OPERATORS),
                          help="operator equations the custom ansatz "
                               "must satisfy")
    p_derive.add_argument("--nonzero", default="a,k",
                          help="symbols assumed nonzero (comma list)")

    p_trace = sub.add_parser(
        "trace", parents=[common],
        help="follow one meridional particle path")
    p_trace.add_argument("--t0", type=float, default=0.0)
    p_trace.add_argument("--r0", type=float, default=1.0)
    p_trace.add_argument("--z0", type=float, default=0.5)
    p_trace.add_argument("--dt", type=float, default=1e-3)
    p_trace.add_argument("--method", default="both",
                         choices=["both", "closed", "rk4"])

    p_sim = sub.add_parser(
        "simulate", parents=[common],
        help="advect the swirl on a grid and compare with the family")
    p_sim.add_argument("--velocity-source", default="ExactMeridional",
                       choices=list(VELOCITY_SOURCES))
    p_sim.add_argument("--convergence", action="store_true",
                       help="run a resolution ladder with one shared "
                            "time step")
    p_sim.add_argument("--resolutions", default="65,129",
                       help="comma list of square grid sizes")
    p_sim.add_argument("--max-rel-error", type=float, default=0.05)

    p_diag = sub.add_parser(
        "diagnose", parents=[common],
        help="blowup-rate fits, vorticity integral, energy scalings")
    p_diag.add_argument("--fit-times",
                        help="comma list of sample times "
                             "(default 0,0.3,0.6,0.8 of t_star)")
    p_diag.add_argument("--bkm-t1",
                        help="comma list of upper limits "
                             "(default 0.5,0.8,0.9 of t_star)")
    p_diag.add_argument("--eps", default="0.1,0.01,0.001",
                        help="inner radii for the energy study")
    p_diag.add_argument("--r-max", type=float, default=2.0)

    sub.add_parser("all", parents=[common],
                   help="verify, derive, trace, simulate, diagnose")
    return parser


def _run_config(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in
                 ("a", "k", "t_star", "nu", "variant", "r_lo", "r_hi",
                  "z_lo", "z_hi", "nr", "nz", "cfl", "t_end", "tol",
                  "seed", "output_dir")}
    return build_run_config(file_values, overrides)


def _diff(args) -> DiffConfig:
    if getattr(args, "diff_mode", EXACT_JET) == EXACT_JET:
        return EXACT
    return DiffConfig(mode=CENTRAL_DIFFERENCE, h=args.diff_h)


def _outpath(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


# ---------------------------------------------------------------------
# subcommands

def cmd_verify(cfg: RunConfig, args) -> tuple[bool, dict]:
    eqs = None
    if getattr(args, "equations", None):
        known = set(EquationId.ALL)
        for name in args.equations:
            if name not in known:
                raise ConfigError(
                    f"unknown equation {name!r}; choose from "
                    f"{sorted(known)}")
        eqs = list(args.equations)
    spec = SamplingSpec(r_lo=cfg.r_lo, r_hi=cfg.r_hi, z_lo=cfg.z_lo,
                        z_hi=cfg.z_hi, count=getattr(args, "count", 1000),
                        seed=cfg.seed)
    report = verify(cfg.params, eqs=eqs, spec=spec, tol=cfg.tol,
                    diff=_diff(args))
    for res in report.results:
        arg = res.argmax
        _say(_flag(res.passed), f"{res.equation:<20}",
             f"max|res| = {res.max_abs_residual:.3e}",
             f"at (t={arg['t']:.3f}, r={arg['r']:.3f}, z={arg['z']:.3f})",
             f"n={res.samples}")
    figures.residual_figure(report, _outpath(cfg, "residuals.png"))
    return report.passed, {"residual_report": report}


def cmd_derive(cfg: RunConfig, args) -> tuple[bool, dict]:
    if getattr(args, "field", None):
        return _derive_custom(args)
    a_value = None
    if getattr(args, "rational_a", None):
        a_value = Fraction(args.rational_a)
    replay = replay_derivation(a_value=a_value)
    text = format_replay(replay, verbose=getattr(args, "verbose", False))
    _say(text)
    extra = {"derivation": {
        "stages": [st.name for st in replay.stages],
        "assignments": {
            sym: str(val)
            for st in replay.stages
            for sym, val in st.outcome.principal.assignments.items()},
        "swirl_exponent": str(replay.swirl_exponent),
    }}
    return True, {"extra": extra}


def _derive_custom(args) -> tuple[bool, dict]:
    fields = {}
    for item in args.field:
        role, _, expr = item.partition("=")
        if not expr:
            raise ConfigError(f"--field needs ROLE=EXPR, got {item!r}")
        fields[role.strip()] = parse_monomial_sum(expr)
    ops = args.require or ["incompressibility"]
    equations = [apply_operator(op, fields) for op in ops]
    nonzero = frozenset(s.strip() for s in args.nonzero.split(",")
                        if s.strip())
    outcome = solve_exponent_constraints(fields, equations,
                                         nonzero=nonzero, labels=ops)
    _say(f"outcome: {outcome.kind}")
    for sym, val in outcome.principal.assignments.items():
        _say(f"  {sym} = {val}")
    if outcome.free_symbols:
        _say(f"  free: {', '.join(sorted(outcome.free_symbols))}")
    ok = outcome.kind in ("solution", "family")
    extra = {"derivation": {
        "outcome": outcome.kind,
        "assignments": {sym: str(v) for sym, v in
                        outcome.principal.assignments.items()},
    }}
    return ok, {"extra": extra}


def cmd_trace(cfg: RunConfig, args) -> tuple[bool, dict]:
    params = cfg.params
    t0 = getattr(args, "t0", 0.0)
    r0 = getattr(args, "r0", 1.0)
    z0 = getattr(args, "z0", 0.5)
    dt = getattr(args, "dt", 1e-3)
    method = getattr(args, "method", "both")
    t_end = cfg.march_t_end
    extra: dict = {"trace": {"t0": t0, "r0": r0, "z0": z0,
                             "t_end": t_end, "dt": dt}}
    ok = True

    if method in ("both", "rk4"):
        traj = flow_numeric(params, t0, r0, z0, t_end, dt)
    else:
        traj = trajectory_closed_form(params, t0, r0, z0, t_end)
    if params.variant is Variant.EULER:
        drift = swirl_drift(params, traj)
        scale = abs(conserved_swirl(params, traj)[0]) or 1.0
        ok_drift = drift <= 1e-6 * scale
        _say(_flag(ok_drift),
             f"r*vtheta drift along path = {drift:.3e}")
        extra["trace"]["swirl_drift"] = drift
        ok = ok and ok_drift
        write_trajectory_csv(_outpath(cfg, "trace.csv"), params, traj)
        figures.trajectory_figure(traj, conserved_swirl(params, traj),
                                  _outpath(cfg, "trace.png"))
    if method == "both":
        r_ref, z_ref = flow_closed_form(params, t0, r0, z0, t_end)
        _, r_num, z_num = traj.final()
        gap = float(np.hypot(r_num - r_ref, z_num - z_ref))
        ok_gap = gap <= 1e-7
        _say(_flag(ok_gap),
             f"closed-form vs integrated endpoint gap = {gap:.3e}")
        orders = rk4_order_estimate(params, t0, r0, z0, t_end)
        ok_order = all(3.7 <= o <= 4.3 for o in orders)
        _say(_flag(ok_order), "integrator order estimates:",
             ", ".join(f"{o:.3f}" for o in orders))
        extra["trace"].update({"endpoint_gap": gap,
                               "order_estimates": list(orders)})
        ok = ok and ok_gap and ok_order
    return ok, {"extra": extra}


def cmd_simulate(cfg: RunConfig, args) -> tuple[bool, dict]:
    params = cfg.params
    source = getattr(args, "velocity_source", "ExactMeridional")
    t_end = cfg.march_t_end
    extra: dict = {"simulation": {}}
    ok = True

    grid = AnnulusGrid(cfg.r_lo, cfg.r_hi, cfg.z_lo, cfg.z_hi,
                       cfg.nr, cfg.nz)
    omega = GridField(grid, np.zeros((grid.nr, grid.nz)), 0.0)
    info = SolveInfo()
    psi = solve_stream(grid, omega, exact_stream_bc(params, grid, 0.0),
                       tol=cfg.tol, info=info)
    rr, zz = grid.mesh()
    psi_err = float(np.max(np.abs(
        psi.values - stream_value(params, 0.0, rr, zz))))
    ok_psi = psi_err <= 1e-8
    _say(_flag(ok_psi),
         f"stream solve reproduces the family to {psi_err:.3e} "
         f"({info.iterations} iterations)")
    extra["simulation"]["stream_error"] = psi_err
    extra["simulation"]["stream_iterations"] = info.iterations
    ok = ok and ok_psi

    if getattr(args, "convergence", False):
        try:
            resolutions = tuple(
                int(s) for s in args.resolutions.split(",") if s.strip())
        except ValueError:
            raise ConfigError(
                f"bad --resolutions value {args.resolutions!r}")
        if len(resolutions) < 2:
            raise ConfigError("--resolutions needs at least two sizes")
        study = convergence_study(
            params, resolutions=resolutions, t_end=t_end,
            r_lo=cfg.r_lo, r_hi=cfg.r_hi, z_lo=cfg.z_lo, z_hi=cfg.z_hi,
            velocity_source=source)
        for entry in study.entries:
            _say(f"  {entry.nr}x{entry.nz}: rel sup error = "
                 f"{entry.rel_linf:.3e} ({entry.steps} steps)")
        ok_err = study.entries[0].rel_linf <= 0.01
        ok_order = all(1.7 <= o <= 2.3 for o in study.orders)
        _say(_flag(ok_err), "coarse-grid relative error within 1%")
        _say(_flag(ok_order), "convergence orders:",
             ", ".join(f"{o:.3f}" for o in study.orders))
        figures.convergence_figure(study,
                                   _outpath(cfg, "convergence.png"))
        extra["simulation"]["convergence"] = {
            "dt": study.dt,
            "entries": [{"nr": e.nr, "nz": e.nz, "h": e.h,
                         "rel_linf": e.rel_linf, "steps": e.steps}
                        for e in study.entries],
            "orders": list(study.orders),
        }
        ok = ok and ok_err and ok_order
    else:
        sim = SimConfig(t_end=t_end, cfl=cfg.cfl, elliptic_tol=cfg.tol)
        log = AdvectLog()
        snaps = advect_swirl(params, exact_swirl_field(params, grid, 0.0),
                             source, sim, log)
        rep = error_report(params, snaps, log)
        final = rep.final
        _say(f"  {log.steps} steps to t = {final.time:.4f}, "
             f"{log.clamped_feet} clamped feet")
        _say(f"  final errors: sup = {final.linf:.3e}, "
             f"rel sup = {final.rel_linf:.3e}, rel l2 = "
             f"{final.rel_l2:.3e}")
        limit = getattr(args, "max_rel_error", 0.05)
        ok_err = final.rel_linf <= limit
        _say(_flag(ok_err), f"relative sup error within {limit:g}")
        write_snapshot_csv(_outpath(cfg, "snapshot.csv"), params,
                           snaps[-1])
        figures.snapshot_figure(
            snaps[-1], exact_swirl_field(params, grid,
                                         snaps[-1].time_tag).values,
            _outpath(cfg, "snapshot.png"))
        extra["simulation"]["final"] = {
            "time": final.time, "linf": final.linf,
            "rel_linf": final.rel_linf, "rel_l2": final.rel_l2,
            "steps": log.steps, "clamped_feet": log.clamped_feet,
            "amplification": rep.amplification,
        }
        ok = ok and ok_err
    return ok, {"extra": extra}


def cmd_diagnose(cfg: RunConfig, args) -> tuple[bool, dict]:
    params = cfg.params
    ok = True
    fits = []
    extra: dict = {"diagnostics": {}}

    raw = getattr(args, "fit_times", None)
    if raw:
        times = [float(s) for s in raw.split(",")]
    else:
        times = [f * params.t_star for f in (0.0, 0.3, 0.6, 0.8)]
    samples = gradient_history(params, times, entry=(2, 2),
                               r_range=(cfg.r_lo, cfg.r_hi),
                               z_range=(cfg.z_lo, cfg.z_hi))
    fit = fit_blowup_exponent(samples, params.t_star)
    ok_fit = abs(fit.exponent + 1.0) <= 0.01
    _say(_flag(ok_fit),
         f"axial-gradient growth exponent = {fit.exponent:.6f} "
         f"(prefactor {fit.prefactor:.6f})")
    fits.append(("sup_grad_v", fit))
    figures.fit_figure(samples, fit, params.t_star,
                       _outpath(cfg, "gradient_fit.png"))
    ok = ok and ok_fit

    bkm = []
    if params.variant is Variant.EULER:
        raw = getattr(args, "bkm_t1", None)
        if raw:
            t1s = [float(s) for s in raw.split(",")]
        else:
            t1s = [f * params.t_star for f in (0.5, 0.8, 0.9)]
        bkm = bkm_curve(params, t1s, r_range=(cfg.r_lo, cfg.r_hi),
                        z_range=(cfg.z_lo, cfg.z_hi))
        refs = [(t1, bkm_reference(params, t1,
                                   r_range=(cfg.r_lo, cfg.r_hi),
                                   z_range=(cfg.z_lo, cfg.z_hi)))
                for t1 in t1s]
        worst = max(abs(v / ref - 1.0)
                    for (_, v), (_, ref) in zip(bkm, refs))
        ok_bkm = worst <= 0.01
        _say(_flag(ok_bkm),
             f"vorticity integral tracks the log law to "
             f"{worst:.2e} relative")
        figures.bkm_figure(bkm, refs, _outpath(cfg, "bkm.png"))
        extra["diagnostics"]["bkm_log_ratio_error"] = worst
        ok = ok and ok_bkm

    t2 = 0.5 * params.t_star
    ratio = energy_scaling_ratio(params, 0.0, t2, eps=0.1,
                                 r_max=getattr(args, "r_max", 2.0))
    ok_ratio = abs(ratio - 4.0) <= 1e-6
    _say(_flag(ok_ratio),
         f"energy ratio E(t_star/2)/E(0) = {ratio:.9f} (expect 4)")
    extra["diagnostics"]["energy_ratio"] = ratio
    ok = ok and ok_ratio

    eps_values = [float(s)
                  for s in getattr(args, "eps", "0.1,0.01,0.001").split(",")]
    study = energy_eps_study(params, 0.0, getattr(args, "r_max", 2.0),
                             eps_values=eps_values)
    energies = [e for _, e in study]
    ok_eps = all(b > a for a, b in zip(energies, energies[1:]))
    _say(_flag(ok_eps),
         "energy grows as the inner radius shrinks: "
         + ", ".join(f"E({eps:g}) = {e:.4f}" for eps, e in study))
    figures.energy_figure(study, _outpath(cfg, "energy.png"))
    extra["diagnostics"]["energy_eps"] = [
        {"eps": eps, "value": e} for eps, e in study]
    ok = ok and ok_eps

    return ok, {"fits": fits, "bkm": bkm, "extra": extra}


def _dispatch(args) -> int:
    cfg = _run_config(args)
    sections = {"verify": cmd_verify, "derive": cmd_derive,
                "trace": cmd_trace, "simulate": cmd_simulate,
                "diagnose": cmd_diagnose}
    if args.command == "all":
        names = ("verify", "derive", "trace", "simulate", "diagnose")
    else:
        names = (args.command,)

    overall = True
    residual_report = None
    fits = []
    bkm = []
    extra: dict = {}
    for name in names:
        if len(names) > 1:
            _say(f"--- {name} ---")
        ok, payload = sections[name](cfg, args)
        overall = overall and ok
        residual_report = payload.get("residual_report",
                                      residual_report)
        fits.extend(payload.get("fits", []))
        bkm.extend(payload.get("bkm", []))
        extra.update(payload.get("extra", {}))

    report = build_report(cfg, residual_report=residual_report,
                          fits=fits, bkm=bkm, extra=extra,
                          pass_flags=[overall])
    path = _outpath(cfg, "report.json")
    write_report(path, report)
    _say(f"report written to {path}")
    _say(_flag(overall), "overall")
    return 0 if overall else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoConvergence, CFLViolation, DegenerateFit) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except EulerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
