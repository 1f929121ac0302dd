"""Closed-form evaluation of the explicit blowup solution family.

Three variants share the meridional flow (v^r, v^z) = (a r, -2 a z)/tau
and differ in the swirl:

    euler_self_similar   v^theta = k r^{-(1+1/a)} / tau
    ns_inverse_r         v^theta = k / r
    ns_decaying_swirl    v^theta = k r tau^{2a}

All evaluators are written against plain arithmetic so they accept
floats, numpy arrays, or Jet2 seeds interchangeably.  eval_cart uses the
Cartesian closed forms directly (not a frame conversion of eval_cyl), so
the two paths cross-check each other.  gradient_paper reproduces the
printed velocity-gradient displays verbatim, including their known
disagreements with direct differentiation; the jet engine is the
authority whenever the two differ.
"""

from __future__ import annotations

import numpy as np

from .errors import VariantError
from .jets import jet_log
from .params import (CartPoint, CylPoint, SolutionParams, VelocityCart,
                     VelocityCyl, Variant, check_cart, check_cyl)

__all__ = [
    "velocity_components", "cart_velocity_components", "eval_cyl",
    "eval_cart", "stream_and_vorticity", "stream_value", "gradient_paper",
    "pressure", "cyl_velocity_fields", "cart_velocity_fields",
    "stream_field", "pressure_field", "pressure_cart_field",
]


def velocity_components(params: SolutionParams, t, r, z):
    """(v^r, v^theta, v^z) at (t, r, z); generic over floats/arrays/jets."""
    check_cyl(params, t, r, z)
    a, k = params.a, params.k
    tau = params.t_star - t
    vr = a * r / tau
    vz = (-2.0 * a) * z / tau
    if params.variant is Variant.EULER:
        vtheta = k * r ** (-(1.0 + 1.0 / a)) / tau
    elif params.variant is Variant.NS_INVERSE_R:
        vtheta = k / r
    else:
        vtheta = k * r * tau ** (2.0 * a)
    return vr, vtheta, vz


def cart_velocity_components(params: SolutionParams, t, x1, x2, x3):
    """Cartesian components, computed from the Cartesian closed forms."""
    check_cart(params, t, x1, x2, x3)
    a, k = params.a, params.k
    tau = params.t_star - t
    r2 = x1 * x1 + x2 * x2
    if params.variant is Variant.EULER:
        # k / (r^{2 + 1/a} tau), written through r^2 as in the initial data
        swirl = k / (r2 ** (1.0 + 1.0 / (2.0 * a)) * tau)
    elif params.variant is Variant.NS_INVERSE_R:
        swirl = k / r2
    else:
        swirl = k * tau ** (2.0 * a)
    v1 = a * x1 / tau + x2 * swirl
    v2 = a * x2 / tau - x1 * swirl
    v3 = (-2.0 * a) * x3 / tau
    return v1, v2, v3


def eval_cyl(params: SolutionParams, pt: CylPoint) -> VelocityCyl:
    vr, vtheta, vz = velocity_components(params, pt.t, pt.r, pt.z)
    return VelocityCyl(float(vr), float(vtheta), float(vz))


def eval_cart(params: SolutionParams, pt: CartPoint) -> VelocityCart:
    v1, v2, v3 = cart_velocity_components(params, pt.t, pt.x1, pt.x2, pt.x3)
    return VelocityCart(float(v1), float(v2), float(v3))


def stream_value(params: SolutionParams, t, r, z):
    """Stream function phi = -a r z / tau of the meridional flow (Euler)."""
    if params.variant is not Variant.EULER:
        raise VariantError("the stream function is only available for the "
                           "euler_self_similar variant")
    check_cyl(params, t, r, z)
    return (-params.a) * r * z / (params.t_star - t)


def stream_and_vorticity(params: SolutionParams, pt: CylPoint):
    """(phi, omega_theta) at pt.  The azimuthal vorticity vanishes
    identically for this family, so the second element is exactly 0."""
    phi = stream_value(params, pt.t, pt.r, pt.z)
    return float(phi), 0.0


def pressure(params: SolutionParams, t, r, z):
    """Pressure recovered from momentum balance, gauged so P(t, 1, 0) = 0.

    -grad P equals the material acceleration of the velocity field (the
    viscous contribution vanishes identically for both NS variants).  The
    swirl contribution integrates v_theta^2 / r in r; at a = -1 the Euler
    integrand is k^2/r and the antiderivative switches to a logarithm.
    """
    check_cyl(params, t, r, z)
    a, k = params.a, params.k
    tau = params.t_star - t
    inv_tau2 = 1.0 / (tau * tau)
    merid = (-0.5 * a * (1.0 + a)) * (r * r - 1.0) * inv_tau2 \
        + (a * (1.0 - 2.0 * a)) * (z * z) * inv_tau2
    if params.variant is Variant.EULER:
        if a == -1.0:
            swirl = (k * k) * jet_log(r) * inv_tau2
        else:
            c = -a * k * k / (2.0 * (a + 1.0))
            swirl = c * (r ** (-2.0 - 2.0 / a) - 1.0) * inv_tau2
    elif params.variant is Variant.NS_INVERSE_R:
        swirl = (0.5 * k * k) * (1.0 - 1.0 / (r * r))
    else:
        swirl = (0.5 * k * k) * tau ** (4.0 * a) * (r * r - 1.0)
    return merid + swirl


def gradient_paper(params: SolutionParams, pt: CartPoint) -> np.ndarray:
    """The printed velocity-gradient displays, row i = grad v_i, verbatim.

    These formulas are transcribed as printed.  For v1 and v2 they are
    known to disagree with direct differentiation in the diagonal entries
    (a spurious factor 1/2) and in the x3 entries (v1, v2 do not depend
    on x3); the exact-jet Jacobian is authoritative.  See
    residuals.paper_gradient_discrepancy for the comparison.
    """
    if params.variant is not Variant.EULER:
        raise VariantError("the printed gradient displays cover only the "
                           "euler_self_similar variant")
    check_cart(params, pt.t, pt.x1, pt.x2, pt.x3)
    a, k = params.a, params.k
    tau = params.t_star - pt.t
    x1, x2, x3 = pt.x1, pt.x2, pt.x3
    r2 = x1 * x1 + x2 * x2
    r = np.sqrt(r2)
    s = 2.0 + 1.0 / a
    denom = r ** (4.0 + 1.0 / a) * tau
    zero = np.zeros_like(np.asarray(denom, dtype=float))
    rows = [
        [a / tau - k * s * x1 * x2 / (2.0 * denom),
         k * (r2 - s * x2 * x2) / denom,
         k * x2 * x3 * s / denom],
        [-k * (r2 - s * x1 * x1) / denom,
         a / tau + k * s * x1 * x2 / (2.0 * denom),
         -k * x2 * x3 * s / denom],
        [zero, zero, -2.0 * a / tau + zero],
    ]
    return np.array([[np.asarray(e, dtype=float) for e in row]
                     for row in rows])


# ---- field factories (callables consumed by the jet operators) --------

def cyl_velocity_fields(params: SolutionParams):
    """Three callables (t, r, z) -> component, jet- and array-capable."""

    def vr(t, r, z):
        return velocity_components(params, t, r, z)[0]

    def vtheta(t, r, z):
        return velocity_components(params, t, r, z)[1]

    def vz(t, r, z):
        return velocity_components(params, t, r, z)[2]

    return vr, vtheta, vz


def cart_velocity_fields(params: SolutionParams):
    def v1(t, x1, x2, x3):
        return cart_velocity_components(params, t, x1, x2, x3)[0]

    def v2(t, x1, x2, x3):
        return cart_velocity_components(params, t, x1, x2, x3)[1]

    def v3(t, x1, x2, x3):
        return cart_velocity_components(params, t, x1, x2, x3)[2]

    return v1, v2, v3


def stream_field(params: SolutionParams):
    def phi(t, r, z):
        return stream_value(params, t, r, z)

    return phi


def pressure_field(params: SolutionParams):
    def p(t, r, z):
        return pressure(params, t, r, z)

    return p


def pressure_cart_field(params: SolutionParams):
    def p(t, x1, x2, x3):
        check_cart(params, t, x1, x2, x3)
        r = (x1 * x1 + x2 * x2) ** 0.5
        return pressure(params, t, r, x3)

    return p
