"""Differential operators on scalar/vector fields via the jet engine.

Cylindrical fields are callables f(t, r, z); Cartesian fields are
callables f(t, x1, x2, x3).  Jets are seeded over all coordinates, so
index 0 is always the time derivative.  All operators accept a
DiffConfig to switch between exact jets and central differences.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .jets import EXACT, DiffConfig, Jet2, jet_eval
from .params import VorticityVector

# seed indices for cylindrical jets
T, R, Z = 0, 1, 2
# spatial seed indices for Cartesian jets
X1, X2, X3 = 1, 2, 3


def cyl_jet(field, t, r, z, config: DiffConfig = EXACT) -> Jet2:
    return jet_eval(field, (t, r, z), config)


def cart_jet(field, t, x1, x2, x3, config: DiffConfig = EXACT) -> Jet2:
    return jet_eval(field, (t, x1, x2, x3), config)


def divergence_axisym(vr_field, vz_field, t, r, z,
                      config: DiffConfig = EXACT):
    """(1/r) (d_r(r v^r) + d_z(r v^z)) = v^r/r + d_r v^r + d_z v^z."""
    if np.any(np.asarray(r) <= 0.0):
        raise DomainError("r must be positive")
    jr = cyl_jet(vr_field, t, r, z, config)
    jz = cyl_jet(vz_field, t, r, z, config)
    return jr.value / r + jr.d(R) + jz.d(Z)


def swirl_laplacian(field, t, r, z, config: DiffConfig = EXACT):
    """(d_rr + (1/r) d_r + d_zz - 1/r^2) applied to a scalar field."""
    if np.any(np.asarray(r) <= 0.0):
        raise DomainError("r must be positive")
    j = cyl_jet(field, t, r, z, config)
    return j.d2(R, R) + j.d(R) / r + j.d2(Z, Z) - j.value / (r * r)


def vorticity_axisym(vr_field, vtheta_field, vz_field, t, r, z,
                     config: DiffConfig = EXACT):
    """Vorticity components (-d_z v^th, d_z v^r - d_r v^z, (1/r) d_r(r v^th)).

    Returns a VorticityVector for scalar input and a component triple for
    array input.  Note the component convention follows the swirl sign
    used by the solution family; the honest Cartesian curl of the
    converted field is the negative of the frame conversion of this
    vector (the azimuthal unit vector here is left-handed).
    """
    if np.any(np.asarray(r) <= 0.0):
        raise DomainError("r must be positive")
    jt = cyl_jet(vtheta_field, t, r, z, config)
    jr = cyl_jet(vr_field, t, r, z, config)
    jz = cyl_jet(vz_field, t, r, z, config)
    omega_r = -jt.d(Z)
    omega_theta = jr.d(Z) - jz.d(R)
    omega_z = jt.value / r + jt.d(R)
    if np.ndim(omega_z) == 0:
        return VorticityVector(float(omega_r), float(omega_theta),
                               float(omega_z))
    return omega_r, omega_theta, omega_z


def cart_gradient(field, t, x1, x2, x3, config: DiffConfig = EXACT):
    """Spatial gradient (d_1 f, d_2 f, d_3 f)."""
    j = cart_jet(field, t, x1, x2, x3, config)
    return np.stack([j.d(X1), j.d(X2), j.d(X3)])

def cart_divergence(fields, t, x1, x2, x3, config: DiffConfig = EXACT):
    jets = [cart_jet(f, t, x1, x2, x3, config) for f in fields]
    return jets[0].d(X1) + jets[1].d(X2) + jets[2].d(X3)

def cart_curl(fields, t, x1, x2, x3, config: DiffConfig = EXACT):
    j1, j2, j3 = (cart_jet(f, t, x1, x2, x3, config) for f in fields)
    return np.stack([
        j3.d(X2) - j2.d(X3),
        j1.d(X3) - j3.d(X1),
        j2.d(X1) - j1.d(X2),
    ])

def cart_laplacian(field, t, x1, x2, x3, config: DiffConfig = EXACT):
    j = cart_jet(field, t, x1, x2, x3, config)
    return j.d2(X1, X1) + j.d2(X2, X2) + j.d2(X3, X3)


def velocity_jacobian(fields, t, x1, x2, x3, config: DiffConfig = EXACT):
    """J[i][j] = d v_i / d x_j for a Cartesian velocity triple."""
    jets = [cart_jet(f, t, x1, x2, x3, config) for f in fields]
    return np.stack([np.stack([j.d(X1), j.d(X2), j.d(X3)]) for j in jets])


def cyl_to_cart_fields(vr_field, vtheta_field, vz_field):
    """Convert cylindrical component fields to Cartesian component fields.

    Uses the same azimuthal basis convention as the solution family:
    e_r = (x1/r, x2/r, 0), e_theta = (x2/r, -x1/r, 0), e_z = (0, 0, 1).
    """

    def make(i):
        def component(t, x1, x2, x3):
            r = (x1 * x1 + x2 * x2) ** 0.5
            vr = vr_field(t, r, x3)
            vth = vtheta_field(t, r, x3)
            if i == 0:
                return vr * (x1 / r) + vth * (x2 / r)
            if i == 1:
                return vr * (x2 / r) - vth * (x1 / r)
            return vz_field(t, r, x3)

        return component

    return make(0), make(1), make(2)
