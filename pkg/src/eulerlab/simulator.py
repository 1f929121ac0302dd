"""Grid transport of the swirl on an annular meridian slab.

Two numerical kernels live here. The elliptic kernel inverts the
axisymmetric stream operator (d_rr + (1/r) d_r + d_zz - 1/r^2) with
Dirichlet data: rows are scaled by r to make the five-point stencil
symmetric positive definite, diagonally rescaled to unit diagonal, and
solved by conjugate residuals, whose algebraic residual norm is
non-increasing by construction. The transport kernel advances
v_theta semi-Lagrangially in the conserved variable q = r * v_theta:
feet of characteristics are backtraced with a midpoint rule and q is
bilinearly interpolated at the foot.

Everything is plain numpy with fixed reduction order, so repeated runs
with identical inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (CFLViolation, DomainError, NoConvergence, ParamError,
                     UnsupportedForm)
from .params import SolutionParams
from .solutions import stream_value, velocity_components

EXACT_MERIDIONAL = "ExactMeridional"
FROM_STREAM = "FromStream"
VELOCITY_SOURCES = (EXACT_MERIDIONAL, FROM_STREAM)

BC_EXACT = "ExactSolution"
INTERP_BILINEAR = "bilinear"

DEFAULT_T_FRACTION = 0.9


@dataclass(frozen=True)
class AnnulusGrid:
    """Uniform tensor grid on [r_lo, r_hi] x [z_lo, z_hi], r_lo > 0."""
    r_lo: float
    r_hi: float
    z_lo: float
    z_hi: float
    nr: int
    nz: int

    def __post_init__(self):
        if not (self.r_lo > 0.0):
            raise ParamError("grid must stay off the axis: r_lo > 0")
        if not (self.r_hi > self.r_lo):
            raise ParamError("need r_hi > r_lo")
        if not (self.z_hi > self.z_lo):
            raise ParamError("need z_hi > z_lo")
        if self.nr < 8 or self.nz < 8:
            raise ParamError("grid needs at least 8 nodes per direction")

    @property
    def hr(self) -> float:
        return (self.r_hi - self.r_lo) / (self.nr - 1)

    @property
    def hz(self) -> float:
        return (self.z_hi - self.z_lo) / (self.nz - 1)

    def r_nodes(self) -> np.ndarray:
        return np.linspace(self.r_lo, self.r_hi, self.nr)

    def z_nodes(self) -> np.ndarray:
        return np.linspace(self.z_lo, self.z_hi, self.nz)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r_nodes(), self.z_nodes(), indexing="ij")

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros((self.nr, self.nz), dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask


@dataclass
class GridField:
    """Nodal scalar values on a grid, tagged with their sample time."""
    grid: AnnulusGrid
    values: np.ndarray
    time_tag: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nr, self.grid.nz):
            raise ParamError(
                f"field shape {vals.shape} does not match grid "
                f"({self.grid.nr}, {self.grid.nz})")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field contains non-finite values")
        self.values = vals

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy(), self.time_tag)


@dataclass(frozen=True)
class SimConfig:
    """Knobs for the transport run.

    t_end must sit at or below max_t_fraction * t_star: closer to the
    blowup time the velocity scale 1/tau outruns any fixed grid.
    dt_override, when set, replaces the CFL-derived step with a constant
    one (semi-Lagrangian stepping is unconditionally stable, and a step
    shared across resolutions isolates the spatial error for
    convergence measurements).
    """
    t_end: float
    cfl: float = 0.9
    bc_source: str = BC_EXACT
    interpolation: str = INTERP_BILINEAR
    elliptic_tol: float = 1e-10
    elliptic_max_iter: int | None = None
    max_t_fraction: float = DEFAULT_T_FRACTION
    dt_floor: float = 1e-8
    dt_override: float | None = None
    snapshot_stride: int | None = None

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ParamError("cfl must lie in (0, 1]")
        if self.bc_source != BC_EXACT:
            raise UnsupportedForm(
                f"unknown boundary source {self.bc_source!r}")
        if self.interpolation != INTERP_BILINEAR:
            raise UnsupportedForm(
                f"unknown interpolation {self.interpolation!r}")
        if self.elliptic_tol <= 0.0:
            raise ParamError("elliptic_tol must be positive")
        if self.dt_override is not None and self.dt_override <= 0.0:
            raise ParamError("dt_override must be positive")
        if not (0.0 < self.max_t_fraction < 1.0):
            raise ParamError("max_t_fraction must lie in (0, 1)")


@dataclass
class SolveInfo:
    """Iteration trace of one elliptic solve."""
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else 0.0


def _stencil(grid: AnnulusGrid):
    """Symmetrized five-point coefficients.

    Row (i, j) of -r * L has diagonal (r_{i+1/2} + r_{i-1/2})/hr^2
    + 2 r_i/hz^2 + 1/r_i and negative neighbor couplings
    r_{i +/- 1/2}/hr^2 and r_i/hz^2; symmetry holds because the coupling
    (i -> i+1) and (i+1 -> i) both equal r_{i+1/2}/hr^2.
    """
    r = grid.r_nodes()[1:-1]
    hr, hz = grid.hr, grid.hz
    cr_plus = (r + 0.5 * hr) / hr ** 2
    cr_minus = (r - 0.5 * hr) / hr ** 2
    cz = r / hz ** 2
    diag = cr_plus + cr_minus + 2.0 * cz + 1.0 / r
    return cr_minus[:, None], cr_plus[:, None], cz[:, None], diag[:, None]


def solve_stream(grid: AnnulusGrid, omega: GridField,
                 bc_values: np.ndarray, tol: float = 1e-10,
                 max_iter: int | None = None,
                 info: SolveInfo | None = None) -> GridField:
    """Solve -(d_rr + (1/r) d_r + d_zz - 1/r^2) psi = omega with
    Dirichlet values taken from the boundary ring of bc_values.

    Iterates conjugate residuals on the diagonally rescaled symmetric
    form until the relative algebraic residual drops to tol; raises
    NoConvergence (carrying the last residual) if the budget, default
    10 * nr * nz, runs out.
    """
    if omega.grid != grid:
        raise ParamError("omega lives on a different grid")
    bc = np.asarray(bc_values, dtype=float)
    if bc.shape != (grid.nr, grid.nz):
        raise ParamError("boundary array shape mismatch")
    if max_iter is None:
        max_iter = 10 * grid.nr * grid.nz

    cr_minus, cr_plus, cz, diag = _stencil(grid)
    scale = 1.0 / np.sqrt(diag)
    r_col = grid.r_nodes()[1:-1][:, None]

    def apply_raw(u: np.ndarray) -> np.ndarray:
        # u is interior-shaped; pad with zeros for the Dirichlet ring
        padded = np.zeros((grid.nr, grid.nz))
        padded[1:-1, 1:-1] = u
        out = diag * u
        out -= cr_minus * padded[:-2, 1:-1]
        out -= cr_plus * padded[2:, 1:-1]
        out -= cz * (padded[1:-1, :-2] + padded[1:-1, 2:])
        return out

    rhs = r_col * omega.values[1:-1, 1:-1]
    rhs[0, :] += cr_minus[0, 0] * bc[0, 1:-1]
    rhs[-1, :] += cr_plus[-1, 0] * bc[-1, 1:-1]
    rhs[:, 0] += cz[:, 0] * bc[1:-1, 0]
    rhs[:, -1] += cz[:, 0] * bc[1:-1, -1]

    b_hat = scale * rhs
    norm_b = float(np.sqrt(np.sum(b_hat * b_hat)))
    x = np.zeros_like(b_hat)
    if info is None:
        info = SolveInfo()

    if norm_b == 0.0:
        psi = bc.copy()
        psi[1:-1, 1:-1] = 0.0
        return GridField(grid, psi, omega.time_tag)

    def apply_scaled(u: np.ndarray) -> np.ndarray:
        return scale * apply_raw(scale * u)

    res = b_hat - apply_scaled(x)
    a_res = apply_scaled(res)
    p = res.copy()
    a_p = a_res.copy()
    r_dot_ar = float(np.sum(res * a_res))
    converged = False
    for it in range(max_iter):
        res_norm = float(np.sqrt(np.sum(res * res)))
        info.residual_history.append(res_norm / norm_b)
        info.iterations = it
        if res_norm <= tol * norm_b:
            converged = True
            break
        denom = float(np.sum(a_p * a_p))
        if denom == 0.0 or r_dot_ar == 0.0:
            converged = res_norm <= tol * norm_b
            break
        alpha = r_dot_ar / denom
        x = x + alpha * p
        res = res - alpha * a_p
        a_res = apply_scaled(res)
        r_dot_ar_new = float(np.sum(res * a_res))
        beta = r_dot_ar_new / r_dot_ar
        r_dot_ar = r_dot_ar_new
        p = res + beta * p
        a_p = a_res + beta * a_p
    else:
        res_norm = float(np.sqrt(np.sum(res * res)))
        info.residual_history.append(res_norm / norm_b)
        info.iterations = max_iter
        raise NoConvergence(
            f"stream solve stalled at relative residual "
            f"{res_norm / norm_b:.3e} after {max_iter} iterations",
            last_residual=res_norm / norm_b, iterations=max_iter)
    if not converged:
        last = info.residual_history[-1]
        raise NoConvergence(
            f"stream solve stalled at relative residual {last:.3e}",
            last_residual=last, iterations=info.iterations)

    psi = bc.copy()
    psi[1:-1, 1:-1] = scale * x
    return GridField(grid, psi, omega.time_tag)


def velocities_from_stream(psi: GridField) -> tuple[GridField, GridField]:
    """Recover (v_r, v_z) = (-d_z psi, (1/r) d_r (r psi)) with central
    differences inside and second-order one-sided stencils on the rim."""
    grid = psi.grid
    r = grid.r_nodes()[:, None]
    vr = -np.gradient(psi.values, grid.hz, axis=1, edge_order=2)
    vz = np.gradient(r * psi.values, grid.hr, axis=0, edge_order=2) / r
    return (GridField(grid, vr, psi.time_tag),
            GridField(grid, vz, psi.time_tag))


def bilinear(grid: AnnulusGrid, values: np.ndarray, r_pts: np.ndarray,
             z_pts: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of nodal values at points inside the grid
    box; callers clamp first."""
    fr = (np.asarray(r_pts) - grid.r_lo) / grid.hr
    fz = (np.asarray(z_pts) - grid.z_lo) / grid.hz
    i = np.clip(np.floor(fr).astype(int), 0, grid.nr - 2)
    j = np.clip(np.floor(fz).astype(int), 0, grid.nz - 2)
    sr = fr - i
    sz = fz - j
    v00 = values[i, j]
    v10 = values[i + 1, j]
    v01 = values[i, j + 1]
    v11 = values[i + 1, j + 1]
    return ((1 - sr) * (1 - sz) * v00 + sr * (1 - sz) * v10
            + (1 - sr) * sz * v01 + sr * sz * v11)


def exact_swirl_field(params: SolutionParams, grid: AnnulusGrid,
                      t: float) -> GridField:
    rr, zz = grid.mesh()
    _, vth, _ = velocity_components(params, t, rr, zz)
    return GridField(grid, np.asarray(vth, dtype=float), t)


def exact_stream_bc(params: SolutionParams, grid: AnnulusGrid,
                    t: float) -> np.ndarray:
    rr, zz = grid.mesh()
    return np.asarray(stream_value(params, t, rr, zz), dtype=float)


@dataclass
class AdvectLog:
    """Step-by-step bookkeeping of one transport run."""
    steps: int = 0
    clamped_feet: int = 0
    dts: list[float] = field(default_factory=list)
    elliptic_iterations: int = 0


class _ExactVelocity:
    def __init__(self, params: SolutionParams):
        self.params = params

    def __call__(self, t: float, r: np.ndarray, z: np.ndarray):
        vr, _, vz = velocity_components(self.params, t, r, z)
        return np.asarray(vr, dtype=float), np.asarray(vz, dtype=float)


class _StreamVelocity:
    """Velocities from a fresh stream solve at the query time, bilinearly
    interpolated off-grid. Vorticity input is identically zero for this
    family; boundary data comes from the exact stream function."""

    def __init__(self, params: SolutionParams, grid: AnnulusGrid,
                 config: SimConfig, log: AdvectLog):
        self.params = params
        self.grid = grid
        self.config = config
        self.log = log
        self._cache_t = None
        self._cache = None

    def _fields(self, t: float):
        if self._cache_t == t:
            return self._cache
        omega = GridField(self.grid,
                          np.zeros((self.grid.nr, self.grid.nz)), t)
        bc = exact_stream_bc(self.params, self.grid, t)
        info = SolveInfo()
        psi = solve_stream(self.grid, omega, bc,
                           tol=self.config.elliptic_tol,
                           max_iter=self.config.elliptic_max_iter,
                           info=info)
        self.log.elliptic_iterations += info.iterations
        self._cache_t = t
        self._cache = velocities_from_stream(psi)
        return self._cache

    def __call__(self, t: float, r: np.ndarray, z: np.ndarray):
        vr, vz = self._fields(t)
        r_c = np.clip(r, self.grid.r_lo, self.grid.r_hi)
        z_c = np.clip(z, self.grid.z_lo, self.grid.z_hi)
        return (bilinear(self.grid, vr.values, r_c, z_c),
                bilinear(self.grid, vz.values, r_c, z_c))


def advect_swirl(params: SolutionParams, v_theta0: GridField,
                 velocity_source: str, config: SimConfig,
                 log: AdvectLog | None = None) -> list[GridField]:
    """March v_theta from the field's time tag to config.t_end.

    Each step: pick dt from the CFL rule (or dt_override), backtrace
    every node with a midpoint rule using velocities frozen at the step
    midpoint, interpolate the conserved q = r * v_theta at the foot and
    divide by the node radius. Feet that leave the box are clamped to
    its rim and take the exact swirl there (counted in the log);
    boundary-ring nodes are assigned the exact swirl at the new time
    every step. Returns the snapshot list: initial state, every
    snapshot_stride-th step if configured, and the final state.
    """
    if velocity_source not in VELOCITY_SOURCES:
        raise UnsupportedForm(
            f"unknown velocity source {velocity_source!r}")
    grid = v_theta0.grid
    t = float(v_theta0.time_tag)
    limit = config.max_t_fraction * params.t_star
    if config.t_end > limit + 1e-12:
        raise ParamError(
            f"t_end {config.t_end} exceeds {config.max_t_fraction} * "
            "t_star; raise max_t_fraction explicitly to integrate "
            "closer to blowup")
    if log is None:
        log = AdvectLog()

    if velocity_source == EXACT_MERIDIONAL:
        velocity = _ExactVelocity(params)
    else:
        velocity = _StreamVelocity(params, grid, config, log)

    snapshots = [v_theta0.copy()]
    if config.t_end <= t + 1e-15:
        return snapshots

    rr, zz = grid.mesh()
    interior = ~grid.boundary_mask()
    r_flat = rr[interior]
    z_flat = zz[interior]
    h_min = min(grid.hr, grid.hz)
    vth = v_theta0.values.copy()

    while t < config.t_end - 1e-14:
        vr_n, vz_n = velocity(t, rr, zz)
        vmax = float(max(np.max(np.abs(vr_n)), np.max(np.abs(vz_n)),
                         1e-30))
        dt = config.dt_override if config.dt_override is not None \
            else config.cfl * h_min / vmax
        dt = min(dt, config.t_end - t)
        if dt < config.dt_floor:
            raise CFLViolation(
                f"time step {dt:.3e} fell below the floor "
                f"{config.dt_floor:.1e} at t={t:.6f}")
        t_new = t + dt
        t_mid = t + 0.5 * dt

        # Midpoint backtrace. The exact meridional field factorizes as
        # w(r, z)/tau(t) with w time-independent, so the trace runs in
        # the rescaled time s with ds = dt/tau (step exactly
        # log(tau(t)/tau(t_new))): the ODE becomes autonomous and the
        # midpoint truncation no longer carries 1/tau powers. Recovered
        # velocities have no such factorization; they freeze at t_mid.
        if velocity_source == EXACT_MERIDIONAL:
            ds = float(np.log(params.tau(t) / params.tau(t_new)))
            step1, step2 = ds * params.tau(t_mid), ds
            vr1, vz1 = velocity(t_mid, r_flat, z_flat)
            vr1, vz1 = step1 * vr1, step1 * vz1
        else:
            step2 = dt
            vr1, vz1 = velocity(t_mid, r_flat, z_flat)
            vr1, vz1 = dt * vr1, dt * vz1
        r_mid = np.clip(r_flat - 0.5 * vr1, grid.r_lo, grid.r_hi)
        z_mid = np.clip(z_flat - 0.5 * vz1, grid.z_lo, grid.z_hi)
        vr2, vz2 = velocity(t_mid, r_mid, z_mid)
        if velocity_source == EXACT_MERIDIONAL:
            factor = step2 * params.tau(t_mid)
        else:
            factor = step2
        r_foot = r_flat - factor * vr2
        z_foot = z_flat - factor * vz2

        outside = ((r_foot < grid.r_lo) | (r_foot > grid.r_hi)
                   | (z_foot < grid.z_lo) | (z_foot > grid.z_hi))
        r_c = np.clip(r_foot, grid.r_lo, grid.r_hi)
        z_c = np.clip(z_foot, grid.z_lo, grid.z_hi)

        q = bilinear(grid, rr * vth, r_c, z_c)
        vth_interior = q / r_flat
        if np.any(outside):
            # the characteristic entered through the rim: the node is
            # inflow-fed this step, so it takes the exact swirl at the
            # new time (the boundary data source), not grid data
            _, vth_bc, _ = velocity_components(params, t_new,
                                               r_flat[outside],
                                               z_flat[outside])
            vth_interior[outside] = np.asarray(vth_bc)
            log.clamped_feet += int(np.count_nonzero(outside))

        vth_new = np.empty_like(vth)
        vth_new[interior] = vth_interior
        exact_new = exact_swirl_field(params, grid, t_new).values
        vth_new[~interior] = exact_new[~interior]

        vth = vth_new
        t = t_new
        log.steps += 1
        log.dts.append(dt)
        if (config.snapshot_stride
                and log.steps % config.snapshot_stride == 0
                and t < config.t_end - 1e-14):
            snapshots.append(GridField(grid, vth.copy(), t))

    snapshots.append(GridField(grid, vth.copy(), t))
    return snapshots


@dataclass(frozen=True)
class SnapshotError:
    """Error norms of one snapshot against the exact swirl."""
    time: float
    linf: float
    l2: float
    rel_linf: float
    rel_l2: float


@dataclass(frozen=True)
class RunErrorReport:
    grid_shape: tuple[int, int]
    snapshots: tuple[SnapshotError, ...]
    amplification: float
    clamped_feet: int

    @property
    def final(self) -> SnapshotError:
        return self.snapshots[-1]


def error_report(params: SolutionParams, snapshots: list[GridField],
                 log: AdvectLog | None = None) -> RunErrorReport:
    """Per-snapshot error norms, plus the growth factor of the relative
    sup error between the first post-initial snapshot and the last."""
    if not snapshots:
        raise ParamError("no snapshots to report on")
    grid = snapshots[0].grid
    cell = grid.hr * grid.hz
    entries = []
    for snap in snapshots:
        exact = exact_swirl_field(params, grid, snap.time_tag).values
        err = snap.values - exact
        linf = float(np.max(np.abs(err)))
        l2 = float(np.sqrt(np.sum(err * err) * cell))
        scale_inf = float(np.max(np.abs(exact)))
        scale_two = float(np.sqrt(np.sum(exact * exact) * cell))
        entries.append(SnapshotError(
            time=float(snap.time_tag), linf=linf, l2=l2,
            rel_linf=linf / scale_inf if scale_inf > 0 else linf,
            rel_l2=l2 / scale_two if scale_two > 0 else l2))
    first_err = next((e.rel_linf for e in entries[1:] if e.rel_linf > 0),
                     0.0)
    amp = entries[-1].rel_linf / first_err if first_err > 0 else 1.0
    return RunErrorReport(
        grid_shape=(grid.nr, grid.nz), snapshots=tuple(entries),
        amplification=amp,
        clamped_feet=log.clamped_feet if log else 0)


@dataclass(frozen=True)
class ConvergenceEntry:
    nr: int
    nz: int
    h: float
    rel_linf: float
    steps: int


@dataclass(frozen=True)
class ConvergenceStudy:
    dt: float
    entries: tuple[ConvergenceEntry, ...]
    orders: tuple[float, ...]


def shared_step(params: SolutionParams, grid: AnnulusGrid, t_end: float,
                cfl: float) -> float:
    """Constant step satisfying the CFL rule on this grid at every time
    up to t_end, where 1/tau speeds peak."""
    tau_end = params.t_star - t_end
    z_max = max(abs(grid.z_lo), abs(grid.z_hi))
    vmax = max(abs(params.a) * grid.r_hi,
               2.0 * abs(params.a) * z_max) / tau_end
    return cfl * min(grid.hr, grid.hz) / vmax


def convergence_study(params: SolutionParams, resolutions=(65, 129),
                      t_end: float | None = None, steps: int = 24,
                      r_lo: float = 0.5, r_hi: float = 2.0,
                      z_lo: float = -1.0, z_hi: float = 1.0,
                      velocity_source: str = EXACT_MERIDIONAL
                      ) -> ConvergenceStudy:
    """Run the transport at several resolutions with one shared constant
    time step, dt = t_end / steps, so the measured rate isolates the
    spatial interpolation error (second order for bilinear).

    The shared step must be moderate: per-step interpolation error is
    O(h^2) and accumulates once per step, so many small steps degrade
    the total toward O(h) (the upwind limit of linear interpolation),
    while very few steps let the inflow-fed rim band swallow the
    domain. A few dozen steps sits in the window where the h^2 signal
    dominates; semi-Lagrangian stepping is unconditionally stable, so
    steps beyond the CFL rule are sound.
    """
    if t_end is None:
        t_end = 0.5 * params.t_star
    dt = t_end / steps
    entries = []
    for n in resolutions:
        grid = AnnulusGrid(r_lo, r_hi, z_lo, z_hi, n, n)
        config = SimConfig(t_end=t_end, dt_override=dt)
        log = AdvectLog()
        snaps = advect_swirl(params, exact_swirl_field(params, grid, 0.0),
                             velocity_source, config, log)
        report = error_report(params, snaps, log)
        entries.append(ConvergenceEntry(
            nr=n, nz=n, h=max(grid.hr, grid.hz),
            rel_linf=report.final.rel_linf, steps=log.steps))
    orders = []
    for a, b in zip(entries, entries[1:]):
        if b.rel_linf == 0.0 or a.rel_linf == 0.0:
            orders.append(float("nan"))
        else:
            orders.append(float(np.log(a.rel_linf / b.rel_linf)
                                / np.log(a.h / b.h)))
    return ConvergenceStudy(dt=dt, entries=tuple(entries),
                            orders=tuple(orders))
