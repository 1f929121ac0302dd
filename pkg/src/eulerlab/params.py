"""Parameter and point types for the explicit solution families.

The family is parameterized by the radial rate a, the swirl amplitude k,
and the blowup time t_star.  Every field blows up as tau = t_star - t
shrinks; evaluation is only allowed for 0 <= t < t_star and r > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, ParamError


class Variant(str, Enum):
    """Which member of the solution family the parameters describe."""

    EULER = "euler_self_similar"
    NS_INVERSE_R = "ns_inverse_r"
    NS_DECAYING_SWIRL = "ns_decaying_swirl"


_VARIANT_ALIASES = {
    "euler": Variant.EULER,
    "euler_self_similar": Variant.EULER,
    "ns_inverse_r": Variant.NS_INVERSE_R,
    "ns_decaying_swirl": Variant.NS_DECAYING_SWIRL,
}


def parse_variant(name: str | Variant) -> Variant:
    if isinstance(name, Variant):
        return name
    try:
        return _VARIANT_ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ParamError(f"unknown variant {name!r}; expected one of "
                         f"{sorted(_VARIANT_ALIASES)}") from None


@dataclass(frozen=True)
class SolutionParams:
    """Constants (a, k, t_star) plus variant selection and viscosity."""

    a: float
    k: float
    t_star: float
    nu: float = 0.0
    variant: Variant = Variant.EULER

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", parse_variant(self.variant))
        for name in ("a", "k", "t_star", "nu"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParamError(f"{name} must be a finite real, got {v!r}")
        if self.a == 0.0:
            raise ParamError("a must be nonzero")
        if self.k == 0.0:
            raise ParamError("k must be nonzero")
        if self.t_star <= 0.0:
            raise ParamError("t_star must be positive")
        if self.nu < 0.0:
            raise ParamError("nu must be nonnegative")
        if self.variant is Variant.EULER and self.nu != 0.0:
            raise ParamError("the Euler variant has no viscosity; set nu = 0")

    @property
    def swirl_exponent(self) -> float:
        """Radial exponent of the swirl profile, -(1 + 1/a) for Euler."""
        if self.variant is Variant.EULER:
            return -(1.0 + 1.0 / self.a)
        if self.variant is Variant.NS_INVERSE_R:
            return -1.0
        return 1.0

    def tau(self, t):
        return self.t_star - t

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "k": self.k,
            "t_star": self.t_star,
            "nu": self.nu,
            "variant": self.variant.value,
        }


@dataclass(frozen=True)
class CylPoint:
    """Spacetime point in cylindrical coordinates (t, r, z)."""

    t: float
    r: float
    z: float


@dataclass(frozen=True)
class CartPoint:
    """Spacetime point in Cartesian coordinates (t, x1, x2, x3)."""

    t: float
    x1: float
    x2: float
    x3: float

    @property
    def r(self) -> float:
        return math.hypot(self.x1, self.x2)


@dataclass(frozen=True)
class VelocityCyl:
    """Velocity components along (e_r, e_theta, e_z)."""

    vr: float
    vtheta: float
    vz: float


@dataclass(frozen=True)
class VelocityCart:
    """Velocity components along the Cartesian axes."""

    v1: float
    v2: float
    v3: float


@dataclass(frozen=True)
class VorticityVector:
    """Vorticity components in the cylindrical component convention
    used throughout: (-d_z vtheta, d_z vr - d_r vz, (1/r) d_r (r vtheta)).
    """

    omega_r: float
    omega_theta: float
    omega_z: float

    def magnitude(self) -> float:
        return float(np.sqrt(self.omega_r**2 + self.omega_theta**2
                             + self.omega_z**2))


def _scalar(x):
    """Underlying float array/scalar of x, unwrapping jets."""
    v = getattr(x, "value", x)
    return np.asarray(v)


def check_cyl(params: SolutionParams, t, r, z=None) -> None:
    """Domain guard shared by all evaluators.  Accepts scalars, arrays
    or jets for each coordinate."""
    tv, rv = _scalar(t), _scalar(r)
    if not (np.all(np.isfinite(tv)) and np.all(np.isfinite(rv))):
        raise DomainError("coordinates must be finite")
    if z is not None and not np.all(np.isfinite(_scalar(z))):
        raise DomainError("coordinates must be finite")
    if np.any(tv < 0.0):
        raise DomainError("t must be >= 0")
    if np.any(tv >= params.t_star):
        raise DomainError(f"t must be < t_star = {params.t_star}")
    if np.any(rv <= 0.0):
        raise DomainError("r must be positive")


def check_cart(params: SolutionParams, t, x1, x2, x3=None) -> None:
    tv = _scalar(t)
    r2 = _scalar(x1) ** 2 + _scalar(x2) ** 2
    if not (np.all(np.isfinite(tv)) and np.all(np.isfinite(r2))):
        raise DomainError("coordinates must be finite")
    if np.any(tv < 0.0):
        raise DomainError("t must be >= 0")
    if np.any(tv >= params.t_star):
        raise DomainError(f"t must be < t_star = {params.t_star}")
    if np.any(r2 <= 0.0):
        raise DomainError("points on the symmetry axis are excluded")


PRESET = SolutionParams(a=1.0, k=1.0, t_star=1.0)

# Standard verification region used by the default sampling spec and the
# acceptance checks: r in [0.5, 2], z in [-1, 1], t in [0, 0.8 t_star].
STANDARD_R = (0.5, 2.0)
STANDARD_Z = (-1.0, 1.0)
STANDARD_T_FRACTION = 0.8
