"""Deterministic serialization: one JSON report per run plus CSV series.

No timestamps and sorted keys, so identical inputs produce identical
bytes; floats go through repr (shortest round-trip form).
"""

from __future__ import annotations

import json
import os

import numpy as np

from .characteristics import Trajectory, conserved_swirl
from .config import RunConfig
from .errors import ParamError
from .params import SolutionParams
from .simulator import GridField, exact_swirl_field

TRACE_HEADER = "t,r,z,r_vtheta"
SNAPSHOT_HEADER = "r,z,vtheta_num,vtheta_exact,abs_err"


def _fmt(x) -> str:
    return repr(float(x))


def config_echo(cfg: RunConfig) -> dict:
    out = cfg.params.as_dict()
    out.update({
        "r_lo": cfg.r_lo, "r_hi": cfg.r_hi,
        "z_lo": cfg.z_lo, "z_hi": cfg.z_hi,
        "nr": cfg.nr, "nz": cfg.nz,
        "cfl": cfg.cfl, "t_end": cfg.t_end,
        "tol": cfg.tol, "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    })
    return out


def build_report(cfg: RunConfig, residual_report=None, fits=None,
                 bkm=None, extra=None, pass_flags=None) -> dict:
    """Assemble the run document. fits is a list of (quantity_name,
    FitResult); bkm a list of (t1, value); extra merges in verbatim."""
    residuals = []
    flags = list(pass_flags or [])
    if residual_report is not None:
        for res in residual_report.results:
            residuals.append({
                "equation": res.equation,
                "max_abs_residual": res.max_abs_residual,
                "argmax": res.argmax,
                "samples": res.samples,
            })
        flags.append(residual_report.passed)
    fit_rows = []
    for name, fit in (fits or []):
        fit_rows.append({
            "quantity": name,
            "exponent": fit.exponent,
            "prefactor": fit.prefactor,
            "rms_log_residual": fit.rms_log_residual,
        })
    report = {
        "config": config_echo(cfg),
        "residuals": residuals,
        "fits": fit_rows,
        "bkm": [{"t1": t1, "value": v} for t1, v in (bkm or [])],
        "pass": all(flags) if flags else True,
    }
    if extra:
        report.update(extra)
    return report


def write_report(path: str, report: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trajectory_csv(path: str, params: SolutionParams,
                         traj: Trajectory) -> None:
    swirl = conserved_swirl(params, traj)
    lines = [TRACE_HEADER]
    for t, r, z, q in zip(traj.times, traj.r, traj.z, swirl):
        lines.append(",".join((_fmt(t), _fmt(r), _fmt(z), _fmt(q))))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_snapshot_csv(path: str, params: SolutionParams,
                       snapshot: GridField) -> None:
    grid = snapshot.grid
    exact = exact_swirl_field(params, grid, snapshot.time_tag).values
    rr, zz = grid.mesh()
    err = np.abs(snapshot.values - exact)
    lines = [SNAPSHOT_HEADER]
    for i in range(grid.nr):
        for j in range(grid.nz):
            lines.append(",".join((
                _fmt(rr[i, j]), _fmt(zz[i, j]),
                _fmt(snapshot.values[i, j]), _fmt(exact[i, j]),
                _fmt(err[i, j]))))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    """Inverse of the writers, for round-trip checks."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        names = header.split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(names):
        raise ParamError(f"{path}: column count mismatch")
    return {name: data[:, i] for i, name in enumerate(names)}
