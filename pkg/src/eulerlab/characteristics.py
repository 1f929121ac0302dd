"""Particle trajectories of the meridional velocity field.

The radial/axial ODE pair dr/dt = a r / tau, dz/dt = -2 a z / tau
integrates in closed form to power laws of the time-to-blowup ratio;
the numeric integrator is a classical one-step fourth-order scheme used
as an independent check and for perturbed (non-integrable) fields.
Along exact trajectories the angular momentum r * vtheta is conserved,
which is the transport structure the swirl equation encodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepError, VariantError
from .params import SolutionParams, Variant
from .solutions import velocity_components

DEFAULT_T_FRACTION_LIMIT = 0.95


def _check_origin(params: SolutionParams, t0: float, r0: float):
    if not (0.0 <= t0 < params.t_star):
        raise DomainError(f"start time {t0} outside [0, t_star)")
    if not (r0 > 0.0):
        raise DomainError(f"start radius {r0} must be positive")


def flow_closed_form(params: SolutionParams, t0: float, r0: float,
                     z0: float, t):
    """Exact characteristic map: r = r0 (tau0/tau)^a, z = z0 (tau/tau0)^(2a).

    t may be a scalar or an array of times in [t0, t_star)."""
    _check_origin(params, t0, r0)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < t0) or np.any(t_arr >= params.t_star):
        raise DomainError("target times must lie in [t0, t_star)")
    tau0 = params.t_star - t0
    tau = params.t_star - t_arr
    ratio = tau0 / tau
    r = r0 * ratio ** params.a
    z = z0 * ratio ** (-2.0 * params.a)
    if np.ndim(t) == 0:
        return float(r), float(z)
    return r, z


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples (t, r, z) of one meridional particle path."""
    params: SolutionParams
    origin: tuple[float, float, float]
    times: np.ndarray
    r: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise DomainError("trajectory needs at least one sample")
        if np.any(np.diff(t) <= 0.0):
            raise DomainError("trajectory times must strictly increase")
        if np.any(t >= self.params.t_star):
            raise DomainError("trajectory reaches t_star")
        if np.any(np.asarray(self.r) <= 0.0):
            raise DomainError("trajectory crosses r = 0")

    def __len__(self):
        return len(self.times)

    def final(self) -> tuple[float, float, float]:
        return (float(self.times[-1]), float(self.r[-1]),
                float(self.z[-1]))


def _meridional(params: SolutionParams, t, r, z):
    vr, _, vz = velocity_components(params, t, r, z)
    return vr, vz


def flow_numeric(params: SolutionParams, t0: float, r0: float, z0: float,
                 t_end: float, dt: float,
                 t_fraction_limit: float = DEFAULT_T_FRACTION_LIMIT
                 ) -> Trajectory:
    """Integrate the characteristic ODE with fourth-order one-step
    updates; the final partial step lands exactly on t_end.

    Integration refuses t_end at or beyond t_fraction_limit * t_star:
    speeds grow like 1/tau there and fixed-step error bounds lose
    meaning.
    """
    _check_origin(params, t0, r0)
    if dt <= 0.0:
        raise StepError("dt must be positive")
    if t_end < t0:
        raise StepError("t_end must not precede t0")
    if t_end >= t_fraction_limit * params.t_star:
        raise StepError(
            f"t_end {t_end} is within the refused band "
            f">= {t_fraction_limit} * t_star (configure t_fraction_limit "
            "to override)")

    times = [t0]
    rs = [float(r0)]
    zs = [float(z0)]
    t, r, z = float(t0), float(r0), float(z0)
    while t < t_end - 1e-15:
        step = min(dt, t_end - t)
        if t + step >= params.t_star:
            raise StepError("step would cross t_star")
        k1r, k1z = _meridional(params, t, r, z)
        k2r, k2z = _meridional(params, t + 0.5 * step, r + 0.5 * step * k1r,
                               z + 0.5 * step * k1z)
        k3r, k3z = _meridional(params, t + 0.5 * step, r + 0.5 * step * k2r,
                               z + 0.5 * step * k2z)
        k4r, k4z = _meridional(params, t + step, r + step * k3r,
                               z + step * k3z)
        r = r + step / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        z = z + step / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        t = t + step
        if r <= 0.0:
            raise StepError(f"step drove r to {r} <= 0 at t={t}")
        times.append(t)
        rs.append(r)
        zs.append(z)
    return Trajectory(params, (t0, r0, z0), np.asarray(times),
                      np.asarray(rs), np.asarray(zs))


def trajectory_closed_form(params: SolutionParams, t0: float, r0: float,
                           z0: float, t_end: float,
                           samples: int = 101) -> Trajectory:
    """Closed-form path sampled at evenly spaced times."""
    if samples < 1:
        raise DomainError("need at least one sample")
    times = np.linspace(t0, t_end, samples)
    r, z = flow_closed_form(params, t0, r0, z0, times)
    return Trajectory(params, (t0, r0, z0), times, np.atleast_1d(r),
                      np.atleast_1d(z))


def conserved_swirl(params: SolutionParams, traj: Trajectory) -> np.ndarray:
    """r * vtheta sampled along the trajectory; constant for the exact
    family, whose swirl equation is pure transport of r * vtheta."""
    if params.variant != Variant.EULER:
        raise VariantError(
            "angular-momentum conservation along meridional paths holds "
            "for the inviscid family; the viscous variants balance "
            "differently")
    _, vth, _ = velocity_components(params, traj.times, traj.r, traj.z)
    return np.asarray(traj.r * vth, dtype=float)


def swirl_drift(params: SolutionParams, traj: Trajectory) -> float:
    """Largest deviation of r * vtheta from its initial value."""
    values = conserved_swirl(params, traj)
    return float(np.max(np.abs(values - values[0])))


def closed_form_jacobian(params: SolutionParams, t0: float, t: float
                         ) -> tuple[float, float]:
    """(dr/dr0, dz/dz0) of the closed-form map; their product times
    r/r0 is 1, the discrete footprint of incompressibility."""
    tau0 = params.t_star - t0
    tau = params.t_star - t
    ratio = tau0 / tau
    return ratio ** params.a, ratio ** (-2.0 * params.a)


def rk4_order_estimate(params: SolutionParams, t0: float, r0: float,
                       z0: float, t_end: float,
                       dts=(8e-3, 4e-3, 2e-3)) -> list[float]:
    """Measured convergence order from final-point errors at a ladder of
    step sizes, each compared against the closed form.

    Steps sit well above the range where the quartic error signal sinks
    into double-precision roundoff."""
    errors = []
    r_ref, z_ref = flow_closed_form(params, t0, r0, z0, t_end)
    for dt in dts:
        traj = flow_numeric(params, t0, r0, z0, t_end, dt)
        _, r_num, z_num = traj.final()
        errors.append(np.hypot(r_num - r_ref, z_num - z_ref))
    orders = []
    for (d1, e1), (d2, e2) in zip(zip(dts, errors), zip(dts[1:],
                                                        errors[1:])):
        if e2 == 0.0 or e1 == 0.0:
            raise DomainError("zero final-point error; cannot estimate "
                              "order (step sizes too small)")
        orders.append(float(np.log(e1 / e2) / np.log(d1 / d2)))
    return orders
