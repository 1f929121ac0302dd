"""Blowup-rate probes: power-law fits, the vorticity time integral,
and kinetic-energy scaling studies.

The family blows up like 1/tau in every velocity gradient, so a
least-squares line through (log tau, log q) recovers exponent -1 with
machine-precision residuals; the vorticity sup-norm integral grows like
log(t_star / (t_star - t1)), the classical signature of a blowup that
the a priori regularity criterion just fails to rule out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateFit, DomainError, ParamError
from .params import STANDARD_R, STANDARD_Z, SolutionParams
from .solutions import cart_velocity_fields, cyl_velocity_fields
from .operators import velocity_jacobian, vorticity_axisym
from .residuals import energy_ball


@dataclass(frozen=True)
class FitResult:
    """Power law q = prefactor * tau^exponent fitted in log-log."""
    exponent: float
    prefactor: float
    rms_log_residual: float
    sample_count: int


def fit_blowup_exponent(samples, t_star: float) -> FitResult:
    """Least-squares line through (log tau, log q) for samples (t, q).

    pre: at least 4 samples, every q > 0, every t < t_star.
    DegenerateFit when all times coincide (no abscissa spread).
    """
    pts = [(float(t), float(q)) for t, q in samples]
    if len(pts) < 4:
        raise ParamError(f"need at least 4 samples, got {len(pts)}")
    taus = np.array([t_star - t for t, _ in pts])
    qs = np.array([q for _, q in pts])
    if np.any(taus <= 0.0):
        raise DomainError("sample times must precede t_star")
    if np.any(qs <= 0.0):
        raise DomainError("fit needs strictly positive quantities")
    x = np.log(taus)
    y = np.log(qs)
    if np.ptp(x) == 0.0:
        raise DegenerateFit("all samples share one time; slope is "
                            "undetermined")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(exponent=float(slope),
                     prefactor=float(np.exp(intercept)),
                     rms_log_residual=float(np.sqrt(np.mean(resid ** 2))),
                     sample_count=len(pts))


def sup_velocity_gradient(params: SolutionParams, t: float,
                          r_range=STANDARD_R, z_range=STANDARD_Z,
                          samples_per_axis: int = 13,
                          entry: tuple[int, int] | None = None) -> float:
    """Largest |d v_i / d x_j| over a meridian grid of the region.

    entry restricts to one Jacobian component; every entry scales like
    1/tau, so any choice fits the same exponent.
    """
    fields = cart_velocity_fields(params)
    r = np.linspace(r_range[0], r_range[1], samples_per_axis)
    z = np.linspace(z_range[0], z_range[1], samples_per_axis)
    rr, zz = np.meshgrid(r, z, indexing="ij")
    x1 = rr.ravel()
    x2 = np.zeros_like(x1)
    x3 = zz.ravel()
    tt = np.full_like(x1, float(t))
    jac = velocity_jacobian(fields, tt, x1, x2, x3)
    if entry is not None:
        i, j = entry
        return float(np.max(np.abs(jac[i, j])))
    return float(np.max(np.abs(jac)))


def gradient_history(params: SolutionParams, times,
                     entry: tuple[int, int] | None = None,
                     **kwargs) -> list[tuple[float, float]]:
    """(t, sup |grad v|) samples ready for fit_blowup_exponent."""
    return [(float(t), sup_velocity_gradient(params, float(t),
                                             entry=entry, **kwargs))
            for t in times]


def sup_vorticity(params: SolutionParams, t: float,
                  r_range=STANDARD_R, z_range=STANDARD_Z,
                  samples_per_axis: int = 33) -> float:
    """Largest vorticity-vector magnitude over a meridian grid."""
    vr_f, vth_f, vz_f = cyl_velocity_fields(params)
    r = np.linspace(r_range[0], r_range[1], samples_per_axis)
    z = np.linspace(z_range[0], z_range[1], samples_per_axis)
    rr, zz = np.meshgrid(r, z, indexing="ij")
    tt = np.full_like(rr.ravel(), float(t))
    w_r, w_th, w_z = vorticity_axisym(vr_f, vth_f, vz_f, tt, rr.ravel(),
                                      zz.ravel())
    mag = np.sqrt(w_r ** 2 + w_th ** 2 + w_z ** 2)
    return float(np.max(mag))


def bkm_integral(params: SolutionParams, t1: float,
                 r_range=STANDARD_R, z_range=STANDARD_Z,
                 quadrature_n: int = 64,
                 samples_per_axis: int = 33) -> float:
    """Gauss-Legendre value of the time integral of sup |omega| over
    [0, t1]; grows like log(t_star / (t_star - t1)) for this family."""
    if not (0.0 < t1 < params.t_star):
        raise DomainError("t1 must lie in (0, t_star)")
    if quadrature_n < 2:
        raise ParamError("need at least 2 quadrature nodes")
    nodes, weights = leggauss(quadrature_n)
    ts = 0.5 * t1 * (nodes + 1.0)
    sups = np.array([sup_vorticity(params, t, r_range, z_range,
                                   samples_per_axis) for t in ts])
    return float(0.5 * t1 * np.dot(weights, sups))


def bkm_curve(params: SolutionParams, t1_values,
              **kwargs) -> list[tuple[float, float]]:
    return [(float(t1), bkm_integral(params, float(t1), **kwargs))
            for t1 in t1_values]


def bkm_reference(params: SolutionParams, t1: float,
                  r_range=STANDARD_R, z_range=STANDARD_Z,
                  samples_per_axis: int = 33) -> float:
    """Closed-form value S0 * t_star * log(t_star / (t_star - t1)) with
    S0 the sup at t = 0; sup |omega| scales exactly like 1/tau."""
    s0 = sup_vorticity(params, 0.0, r_range, z_range, samples_per_axis)
    return s0 * params.t_star * np.log(params.t_star
                                       / (params.t_star - t1))


def energy_scaling_ratio(params: SolutionParams, t1: float, t2: float,
                         eps: float, r_max: float,
                         quadrature_n: int = 32) -> float:
    """E(t2)/E(t1) over a fixed truncated region; the family gives
    (tau1/tau2)^2 exactly, e.g. 4 between t=0 and t=0.5 for t_star=1."""
    e1 = energy_ball(params, t1, eps, r_max, quadrature_n=quadrature_n)
    e2 = energy_ball(params, t2, eps, r_max, quadrature_n=quadrature_n)
    if e1 == 0.0:
        raise DomainError("reference energy vanished")
    return e2 / e1


def energy_radius_fit(params: SolutionParams, t: float, eps: float,
                      radii, quadrature_n: int = 32) -> FitResult:
    """Power-law fit E ~ R^s over a ladder of outer radii.

    Large radii see the meridional flow's r^2 and z^2 energy density, so
    integrating over a ball of radius R grows like R^5.
    """
    radii = [float(R) for R in radii]
    if len(radii) < 4:
        raise ParamError("need at least 4 radii")
    energies = [energy_ball(params, t, eps, R, quadrature_n=quadrature_n)
                for R in radii]
    x = np.log(radii)
    y = np.log(energies)
    if np.ptp(x) == 0.0:
        raise DegenerateFit("all radii coincide")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(exponent=float(slope),
                     prefactor=float(np.exp(intercept)),
                     rms_log_residual=float(np.sqrt(np.mean(resid ** 2))),
                     sample_count=len(radii))


def energy_eps_study(params: SolutionParams, t: float, r_max: float,
                     eps_values=(0.1, 0.01, 0.001),
                     quadrature_n: int = 48) -> list[tuple[float, float]]:
    """Truncated energies for shrinking inner radii.

    For swirl decay faster than 1/r (a > 0 means v_theta ~ r^(-1-1/a))
    the swirl energy integrand ~ r^(-1-2/a) diverges as eps -> 0, so the
    list increases monotonically as eps shrinks.
    """
    out = []
    for eps in eps_values:
        if not (0.0 < eps < r_max):
            raise DomainError("eps must lie in (0, r_max)")
        out.append((float(eps),
                    energy_ball(params, t, float(eps), r_max,
                                quadrature_n=quadrature_n)))
    return out
