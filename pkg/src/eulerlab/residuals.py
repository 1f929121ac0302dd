"""Pointwise residual verification of the governing equations.

Every equation is evaluated literally, left side minus right side, with
second-order jets supplying the derivatives; nothing is simplified away
analytically.  Residuals are computed in batches over sampled points so
large sweeps stay cheap.  A report records, per equation, the largest
absolute residual, where it occurred, and the largest single term that
entered the balance (so absolute tolerances can be judged against the
scale of the cancellation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParamError, VariantMismatch
from .jets import EXACT, DiffConfig, jet_eval
from .operators import R, T, X1, X2, X3, Z, cyl_to_cart_fields
from .params import (CartPoint, CylPoint, SolutionParams, Variant, _scalar,
                     check_cyl)
from .solutions import (cart_velocity_fields, cyl_velocity_fields,
                        pressure_cart_field, stream_field,
                        velocity_components)

TIME = 0  # Cartesian jets are seeded over (t, x1, x2, x3)


class EquationId:
    """Identifiers for the verifiable equations of the system."""
    SWIRL_TRANSPORT = "SwirlTransport"
    VORTICITY_TRANSPORT = "VorticityTransport"
    STREAM_POISSON = "StreamPoisson"
    BIOT_SAVART = "BiotSavart"
    INCOMPRESSIBILITY = "Incompressibility"
    CARTESIAN_MOMENTUM = "CartesianMomentum"
    NS_SWIRL_MOMENTUM = "NSSwirlMomentum"
    PRESSURE_POISSON = "PressurePoisson"

    ALL = (SWIRL_TRANSPORT, VORTICITY_TRANSPORT, STREAM_POISSON,
           BIOT_SAVART, INCOMPRESSIBILITY, CARTESIAN_MOMENTUM,
           NS_SWIRL_MOMENTUM, PRESSURE_POISSON)


EULER_EQUATIONS = (EquationId.SWIRL_TRANSPORT,
                   EquationId.VORTICITY_TRANSPORT,
                   EquationId.STREAM_POISSON,
                   EquationId.BIOT_SAVART,
                   EquationId.INCOMPRESSIBILITY,
                   EquationId.CARTESIAN_MOMENTUM,
                   EquationId.PRESSURE_POISSON)

NS_EQUATIONS = (EquationId.INCOMPRESSIBILITY,
                EquationId.NS_SWIRL_MOMENTUM,
                EquationId.CARTESIAN_MOMENTUM,
                EquationId.PRESSURE_POISSON)


def applicable_equations(variant: Variant) -> tuple[str, ...]:
    if variant == Variant.EULER:
        return EULER_EQUATIONS
    return NS_EQUATIONS


def check_applicable(params: SolutionParams, eq: str) -> None:
    if eq not in EquationId.ALL:
        raise ParamError(f"unknown equation id {eq!r}")
    if eq not in applicable_equations(params.variant):
        raise VariantMismatch(
            f"{eq} does not apply to variant {params.variant.value}; "
            f"applicable: {', '.join(applicable_equations(params.variant))}")


# ---------------------------------------------------------------------
# field bundles: the exact solution, or a deliberately perturbed copy

@dataclass(frozen=True)
class FieldBundle:
    """The closed-form fields an equation evaluator reads.

    For mutation testing, velocity fields are perturbed while the stream
    function and pressure stay those of the base solution; a mutated
    velocity must then fail at least one balance against them.
    """
    params: SolutionParams
    vr: object
    vtheta: object
    vz: object
    cart: tuple  # (v1, v2, v3) fields over (t, x1, x2, x3)
    psi: object | None
    pressure_cart: object

    @classmethod
    def exact(cls, params: SolutionParams) -> "FieldBundle":
        vr, vth, vz = cyl_velocity_fields(params)
        psi = stream_field(params) if params.variant == Variant.EULER \
            else None
        return cls(params, vr, vth, vz, cart_velocity_fields(params),
                   psi, pressure_cart_field(params))


def _sign_preserving_power(x, exponent: float):
    """sign(x) * |x|^exponent, jet- and array-generic. Keeps odd symmetry
    when perturbing integer exponents of z."""
    value = x.value if hasattr(x, "value") else x
    s = np.sign(value)
    if np.any(s == 0):
        raise DomainError("sign-preserving power undefined at 0")
    return (x * s) ** exponent * s


MUTATION_CONSTANTS = ("vr_coefficient", "vr_exponent", "vz_coefficient",
                      "vz_exponent", "swirl_coefficient", "swirl_exponent")

DEFAULT_PERTURBATIONS = (1e-3, -1e-3, 3e-3, -3e-3, 1e-2)


def perturbed_bundle(params: SolutionParams, constant: str,
                     delta: float) -> FieldBundle:
    """The exact solution with one closed-form constant perturbed.

    Velocity fields change; the stream function and the recovered
    pressure remain the base solution's, so every perturbation leaves a
    detectable imbalance somewhere in the system.
    """
    if params.variant != Variant.EULER:
        raise VariantMismatch("mutation scan is defined for the "
                              "self-similar family")
    if constant not in MUTATION_CONSTANTS:
        raise ParamError(f"unknown constant {constant!r}; expected one of "
                         f"{MUTATION_CONSTANTS}")
    a, k, t_star = params.a, params.k, params.t_star
    ca = a + delta if constant == "vr_coefficient" else a
    cb = -2.0 * a + delta if constant == "vz_coefficient" else -2.0 * a
    ck = k + delta if constant == "swirl_coefficient" else k
    pr = 1.0 + delta if constant == "vr_exponent" else 1.0
    qz = 1.0 + delta if constant == "vz_exponent" else 1.0
    q1 = -(1.0 + 1.0 / a)
    q1 = q1 + delta if constant == "swirl_exponent" else q1

    def vr(t, r, z):
        check_cyl(params, t, r, z)
        tau = t_star - t
        return ca * r ** pr / tau

    def vtheta(t, r, z):
        check_cyl(params, t, r, z)
        tau = t_star - t
        return ck * r ** q1 / tau

    def vz(t, r, z):
        check_cyl(params, t, r, z)
        tau = t_star - t
        if qz == 1.0:
            return cb * z / tau
        return cb * _sign_preserving_power(z, qz) / tau

    base = FieldBundle.exact(params)
    cart = cyl_to_cart_fields(vr, vtheta, vz)
    return FieldBundle(params, vr, vtheta, vz, cart, base.psi,
                       base.pressure_cart)


# ---------------------------------------------------------------------
# equation evaluators: arrays in, (components, largest-term) out

def _max_terms(*terms):
    out = np.abs(np.asarray(terms[0], dtype=float))
    for term in terms[1:]:
        out = np.maximum(out, np.abs(np.asarray(term, dtype=float)))
    return out


def _swirl_advection(bundle, t, r, z, diff, nu):
    jv = jet_eval(bundle.vtheta, (t, r, z), diff)
    vr = bundle.vr(t, r, z)
    vz = bundle.vz(t, r, z)
    terms = [jv.d(T), vr * jv.d(R), vz * jv.d(Z), vr * jv.value / r]
    if nu != 0.0:
        visc = jv.d2(R, R) + jv.d(R) / r + jv.d2(Z, Z) - jv.value / r ** 2
        terms.append(-nu * visc)
    return [sum(terms)], _max_terms(*terms)


def _eval_swirl_transport(bundle, t, r, z, diff):
    return _swirl_advection(bundle, t, r, z, diff, 0.0)


def _eval_ns_swirl_momentum(bundle, t, r, z, diff):
    return _swirl_advection(bundle, t, r, z, diff, bundle.params.nu)


def _eval_vorticity_transport(bundle, t, r, z, diff):
    jvr = jet_eval(bundle.vr, (t, r, z), diff)
    jvz = jet_eval(bundle.vz, (t, r, z), diff)
    jvt = jet_eval(bundle.vtheta, (t, r, z), diff)
    omega = jvr.d(Z) - jvz.d(R)
    omega_t = jvr.d2(Z, T) - jvz.d2(R, T)
    omega_r = jvr.d2(Z, R) - jvz.d2(R, R)
    omega_z = jvr.d2(Z, Z) - jvz.d2(R, Z)
    terms = [omega_t, jvr.value * omega_r, jvz.value * omega_z,
             -(2.0 / r) * jvt.value * jvt.d(Z),
             -(1.0 / r) * jvr.value * omega]
    return [sum(terms)], _max_terms(*terms)


def _eval_stream_poisson(bundle, t, r, z, diff):
    jp = jet_eval(bundle.psi, (t, r, z), diff)
    jvr = jet_eval(bundle.vr, (t, r, z), diff)
    jvz = jet_eval(bundle.vz, (t, r, z), diff)
    lhs = -(jp.d2(R, R) + jp.d(R) / r + jp.d2(Z, Z)
            - jp.value / r ** 2)
    omega = jvr.d(Z) - jvz.d(R)
    return [lhs - omega], _max_terms(lhs, omega, jp.d2(R, R),
                                     jp.d(R) / r, jp.value / r ** 2)


def _eval_biot_savart(bundle, t, r, z, diff):
    jp = jet_eval(bundle.psi, (t, r, z), diff)
    vr = bundle.vr(t, r, z)
    vz = bundle.vz(t, r, z)
    c1 = -jp.d(Z) - vr
    c2 = jp.value / r + jp.d(R) - vz
    return [c1, c2], _max_terms(jp.d(Z), vr, jp.value / r, jp.d(R), vz)


def _eval_incompressibility(bundle, t, r, z, diff):
    jvr = jet_eval(bundle.vr, (t, r, z), diff)
    jvz = jet_eval(bundle.vz, (t, r, z), diff)
    terms = [jvr.value / r, jvr.d(R), jvz.d(Z)]
    return [sum(terms)], _max_terms(*terms)


def _eval_cartesian_momentum(bundle, t, x1, x2, x3, diff):
    nu = bundle.params.nu
    jets = [jet_eval(f, (t, x1, x2, x3), diff) for f in bundle.cart]
    jp = jet_eval(bundle.pressure_cart, (t, x1, x2, x3), diff)
    values = [j.value for j in jets]
    comps, scale = [], None
    for i, ji in enumerate(jets):
        terms = [ji.d(TIME)]
        for jdx, vj in zip((X1, X2, X3), values):
            terms.append(vj * ji.d(jdx))
        terms.append(jp.d((X1, X2, X3)[i]))
        if nu != 0.0:
            terms.append(-nu * (ji.d2(X1, X1) + ji.d2(X2, X2)
                                + ji.d2(X3, X3)))
        comps.append(sum(terms))
        m = _max_terms(*terms)
        scale = m if scale is None else np.maximum(scale, m)
    return comps, scale


def _eval_pressure_poisson(bundle, t, x1, x2, x3, diff):
    jets = [jet_eval(f, (t, x1, x2, x3), diff) for f in bundle.cart]
    jp = jet_eval(bundle.pressure_cart, (t, x1, x2, x3), diff)
    lap_p = jp.d2(X1, X1) + jp.d2(X2, X2) + jp.d2(X3, X3)
    cross = 0.0
    for i in range(3):
        for j in range(3):
            cross = cross + jets[i].d((X1, X2, X3)[j]) \
                * jets[j].d((X1, X2, X3)[i])
    return [-lap_p - cross], _max_terms(lap_p, cross)


_CYL_EVALUATORS = {
    EquationId.SWIRL_TRANSPORT: _eval_swirl_transport,
    EquationId.NS_SWIRL_MOMENTUM: _eval_ns_swirl_momentum,
    EquationId.VORTICITY_TRANSPORT: _eval_vorticity_transport,
    EquationId.STREAM_POISSON: _eval_stream_poisson,
    EquationId.BIOT_SAVART: _eval_biot_savart,
    EquationId.INCOMPRESSIBILITY: _eval_incompressibility,
}

_CART_EVALUATORS = {
    EquationId.CARTESIAN_MOMENTUM: _eval_cartesian_momentum,
    EquationId.PRESSURE_POISSON: _eval_pressure_poisson,
}


def evaluate_equation(bundle: FieldBundle, eq: str, t, r, z,
                      diff: DiffConfig = EXACT):
    """Batch-evaluate one equation at cylindrical sample arrays; the
    Cartesian equations are evaluated on the x2 = 0 meridian plane.
    Returns (component arrays, largest-term array)."""
    check_applicable(bundle.params, eq)
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if eq in _CYL_EVALUATORS:
        return _CYL_EVALUATORS[eq](bundle, t, r, z, diff)
    return _CART_EVALUATORS[eq](bundle, t, r, np.zeros_like(r), z, diff)


def residual_at(params: SolutionParams, eq: str, pt,
                diff: DiffConfig = EXACT,
                bundle: FieldBundle | None = None):
    """Signed residual(s), left side minus right side, at one point.

    Cylindrical-form equations take a CylPoint; the Cartesian momentum
    and pressure equations accept either a CartPoint or a CylPoint
    (embedded in the x2 = 0 plane).
    """
    check_applicable(params, eq)
    if bundle is None:
        bundle = FieldBundle.exact(params)
    if eq in _CART_EVALUATORS:
        if isinstance(pt, CylPoint):
            pt = CartPoint(pt.t, pt.r, 0.0, pt.z)
        comps, _ = _CART_EVALUATORS[eq](bundle, np.asarray(pt.t, float),
                                        np.asarray(pt.x1, float),
                                        np.asarray(pt.x2, float),
                                        np.asarray(pt.x3, float), diff)
        return tuple(float(_scalar(c)) for c in comps)
    if not isinstance(pt, CylPoint):
        pt = CylPoint(pt.t, getattr(pt, "r", None), pt.x3)
    comps, _ = _CYL_EVALUATORS[eq](bundle, np.asarray(pt.t, float),
                                   np.asarray(pt.r, float),
                                   np.asarray(pt.z, float), diff)
    if len(comps) == 1:
        return float(_scalar(comps[0]))
    return tuple(float(_scalar(c)) for c in comps)


def pressure_poisson_check(params: SolutionParams, pt,
                           diff: DiffConfig = EXACT) -> float:
    res = residual_at(params, EquationId.PRESSURE_POISSON, pt, diff)
    return float(res[0])


# ---------------------------------------------------------------------
# sampled verification

@dataclass(frozen=True)
class SamplingSpec:
    """Seeded uniform sampling box; t_hi = None means 0.8 * t_star."""
    r_lo: float = 0.5
    r_hi: float = 2.0
    z_lo: float = -1.0
    z_hi: float = 1.0
    t_hi: float | None = None
    count: int = 1000
    seed: int = 20260819

    def __post_init__(self):
        if not (self.r_lo > 0):
            raise DomainError("sampling region must satisfy r_lo > 0")
        if self.r_hi <= self.r_lo or self.z_hi <= self.z_lo:
            raise DomainError("empty sampling region")
        if self.count <= 0:
            raise ParamError("sample count must be positive")

    def points(self, params: SolutionParams):
        t_hi = 0.8 * params.t_star if self.t_hi is None else self.t_hi
        if not (0.0 <= t_hi < params.t_star):
            raise DomainError(f"t_hi {t_hi} must lie in [0, t_star)")
        rng = np.random.default_rng(self.seed)
        t = rng.uniform(0.0, t_hi, self.count)
        r = rng.uniform(self.r_lo, self.r_hi, self.count)
        z = rng.uniform(self.z_lo, self.z_hi, self.count)
        return t, r, z


@dataclass(frozen=True)
class EquationResult:
    equation: str
    max_abs_residual: float
    argmax: dict
    samples: int
    max_term: float
    passed: bool

    def to_dict(self) -> dict:
        return {"equation": self.equation,
                "max_abs_residual": self.max_abs_residual,
                "argmax_point": self.argmax,
                "samples": self.samples,
                "max_term": self.max_term,
                "pass": self.passed}


@dataclass(frozen=True)
class ResidualReport:
    params: SolutionParams
    spec: SamplingSpec
    tol: float
    diff_mode: str
    results: tuple[EquationResult, ...]
    passed: bool

    def result_for(self, eq: str) -> EquationResult:
        for res in self.results:
            if res.equation == eq:
                return res
        raise KeyError(eq)

    def max_abs_residual(self) -> float:
        return max((r.max_abs_residual for r in self.results), default=0.0)

    def to_dict(self) -> dict:
        return {"params": self.params.as_dict(),
                "sampling": {"r_lo": self.spec.r_lo, "r_hi": self.spec.r_hi,
                             "z_lo": self.spec.z_lo, "z_hi": self.spec.z_hi,
                             "t_hi": self.spec.t_hi,
                             "count": self.spec.count,
                             "seed": self.spec.seed},
                "tol": self.tol,
                "diff_mode": self.diff_mode,
                "residuals": [r.to_dict() for r in self.results],
                "pass": self.passed}


def verify(params: SolutionParams, eqs=None,
           spec: SamplingSpec = SamplingSpec(), tol: float = 1e-10,
           diff: DiffConfig = EXACT) -> ResidualReport:
    """Evaluate the requested equations over seeded samples and reduce
    to a pass/fail report."""
    if eqs is None:
        eqs = applicable_equations(params.variant)
    bundle = FieldBundle.exact(params)
    t, r, z = spec.points(params)
    results = []
    for eq in eqs:
        comps, scale = evaluate_equation(bundle, eq, t, r, z, diff)
        stacked = np.abs(np.stack([np.asarray(c, dtype=float)
                                   for c in comps]))
        flat = stacked.max(axis=0)
        idx = int(np.argmax(flat))
        max_res = float(flat[idx])
        results.append(EquationResult(
            eq, max_res,
            {"t": float(t[idx]), "r": float(r[idx]), "z": float(z[idx])},
            int(spec.count), float(np.max(scale)), max_res <= tol))
    passed = all(res.passed for res in results)
    return ResidualReport(params, spec, tol, diff.mode, tuple(results),
                          passed)


# ---------------------------------------------------------------------
# truncated-cylinder energy

def _gauss_panels(lo: float, hi: float, n: int, geometric: bool):
    """Gauss-Legendre nodes/weights, composite over geometric panels
    when the integrand may have a boundary layer at lo."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = [lo]
    if geometric:
        edge = lo
        while edge * 2.0 < hi:
            edge *= 2.0
            edges.append(edge)
    edges.append(hi)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def energy_ball(params: SolutionParams, t: float, eps: float, r_max: float,
                z_half: float | None = None,
                quadrature_n: int = 32) -> float:
    """Kinetic energy integral of |v|^2 over the truncated cylinder
    eps <= r <= r_max, |z| <= z_half, including the 2*pi angular factor.

    Composite Gauss-Legendre in r (geometric panels toward the inner
    radius, where the swirl term may blow up) and a single panel in z.
    """
    if not (eps > 0 and r_max > eps):
        raise DomainError("energy region needs 0 < eps < r_max")
    if z_half is None:
        z_half = r_max
    if not (0.0 <= t < params.t_star):
        raise DomainError("time outside [0, t_star)")
    r_nodes, r_w = _gauss_panels(eps, r_max, quadrature_n, geometric=True)
    xz, wz = np.polynomial.legendre.leggauss(quadrature_n)
    z_nodes = z_half * xz
    z_w = z_half * wz
    rr, zz = np.meshgrid(r_nodes, z_nodes, indexing="ij")
    tt = np.full_like(rr, float(t))
    vr, vth, vz = velocity_components(params, tt, rr, zz)
    density = (vr ** 2 + vth ** 2 + vz ** 2) * rr
    return float(2.0 * math.pi
                 * np.einsum("i,j,ij->", r_w, z_w, density))


# ---------------------------------------------------------------------
# mutation scanning

@dataclass(frozen=True)
class MutationCase:
    constant: str
    delta: float
    max_residual: float
    equation: str
    detected: bool

    def to_dict(self) -> dict:
        return {"constant": self.constant, "delta": self.delta,
                "max_residual": self.max_residual,
                "equation": self.equation, "detected": self.detected}


@dataclass(frozen=True)
class MutationReport:
    threshold: float
    cases: tuple[MutationCase, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {"threshold": self.threshold,
                "cases": [c.to_dict() for c in self.cases],
                "pass": self.passed}


def _mutation_grid(params: SolutionParams):
    t = np.array([0.0, 0.4, 0.8]) * params.t_star
    r = np.linspace(0.5, 2.0, 7)
    z = np.array([-1.0, -0.5, -0.25, 0.25, 0.5, 1.0])
    tt, rr, zz = np.meshgrid(t, r, z, indexing="ij")
    return tt.ravel(), rr.ravel(), zz.ravel()


def mutation_scan(params: SolutionParams,
                  constants=MUTATION_CONSTANTS,
                  deltas=DEFAULT_PERTURBATIONS,
                  threshold: float = 1e-5,
                  diff: DiffConfig = EXACT) -> MutationReport:
    """Perturb each closed-form constant by each delta and confirm some
    equation residual exceeds the threshold on a standard-region grid."""
    t, r, z = _mutation_grid(params)
    eqs = applicable_equations(params.variant)
    cases = []
    for constant in constants:
        for delta in deltas:
            bundle = perturbed_bundle(params, constant, delta)
            worst, worst_eq = 0.0, eqs[0]
            for eq in eqs:
                comps, _ = evaluate_equation(bundle, eq, t, r, z, diff)
                m = max(float(np.max(np.abs(np.asarray(c, dtype=float))))
                        for c in comps)
                if m > worst:
                    worst, worst_eq = m, eq
            cases.append(MutationCase(constant, float(delta), worst,
                                      worst_eq, worst > threshold))
    return MutationReport(threshold, tuple(cases),
                          all(c.detected for c in cases))


# ---------------------------------------------------------------------
# printed-gradient cross-check

@dataclass(frozen=True)
class GradientDiscrepancy:
    """Where the printed velocity-gradient formulas disagree with the
    differentiation engine."""
    entry_max_gap: tuple  # 3x3 of floats
    mismatched_entries: tuple  # ((row, col), ...) 0-indexed
    matched_max_gap: float
    third_row_max_gap: float
    samples: int
    mismatch_floor: float
    match_tolerance: float

    def to_dict(self) -> dict:
        return {"entry_max_gap": [list(row) for row in self.entry_max_gap],
                "mismatched_entries": [list(e)
                                       for e in self.mismatched_entries],
                "matched_max_gap": self.matched_max_gap,
                "third_row_max_gap": self.third_row_max_gap,
                "samples": self.samples,
                "mismatch_floor": self.mismatch_floor,
                "match_tolerance": self.match_tolerance}


def paper_gradient_discrepancy(params: SolutionParams, count: int = 100,
                               seed: int = 7,
                               mismatch_floor: float = 1e-6,
                               match_tolerance: float = 1e-12,
                               diff: DiffConfig = EXACT
                               ) -> GradientDiscrepancy:
    """Compare the printed gradient display entry by entry against jet
    gradients of the Cartesian velocity at random generic points (all
    coordinates bounded away from zero, so no spurious term vanishes)."""
    from .solutions import gradient_paper

    rng = np.random.default_rng(seed)
    mag = rng.uniform(0.3, 1.5, size=(count, 3))
    sign = rng.choice([-1.0, 1.0], size=(count, 3))
    x = mag * sign
    t = rng.uniform(0.0, 0.8 * params.t_star, count)
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]

    printed = gradient_paper(params, CartPoint(t, x1, x2, x3))
    jets = [jet_eval(f, (t, x1, x2, x3), diff)
            for f in cart_velocity_fields(params)]
    gaps = np.zeros((3, 3))
    for i in range(3):
        for j, jdx in enumerate((X1, X2, X3)):
            gap = np.abs(np.asarray(printed[i][j], dtype=float)
                         - jets[i].d(jdx))
            gaps[i, j] = float(np.max(gap))
    mismatched = tuple((i, j) for i in range(3) for j in range(3)
                       if gaps[i, j] > mismatch_floor)
    matched = [gaps[i, j] for i in range(3) for j in range(3)
               if (i, j) not in mismatched]
    return GradientDiscrepancy(
        tuple(tuple(row) for row in gaps.tolist()), mismatched,
        float(max(matched)) if matched else 0.0,
        float(np.max(gaps[2])), count, mismatch_floor, match_tolerance)
