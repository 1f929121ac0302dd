"""Second-order forward-mode jets.

A Jet2 carries (value, gradient, hessian) of a scalar expression with
respect to n seed variables and propagates them through arithmetic by
truncated Taylor composition.  Components are numpy arrays so a single
expression evaluation can differentiate a whole batch of points at once;
scalars ride along as shape-() arrays.

A central-difference fallback builds the same triple from pointwise
field values and serves as an independent cross-check of the exact mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParamError

EXACT_JET = "exact_jet"
CENTRAL_DIFFERENCE = "central_difference"


@dataclass(frozen=True)
class DiffConfig:
    """Differentiation mode for field evaluation.

    mode "exact_jet" propagates derivatives algebraically; the
    "central_difference" mode approximates them with second-order
    stencils of width h and exists to cross-check the exact mode.
    """

    mode: str = EXACT_JET
    h: float = 1e-4

    def __post_init__(self) -> None:
        if self.mode not in (EXACT_JET, CENTRAL_DIFFERENCE):
            raise ParamError(f"unknown differentiation mode {self.mode!r}")
        if self.mode == CENTRAL_DIFFERENCE and not (1e-8 <= self.h <= 1e-2):
            raise ParamError("central-difference step h must lie in "
                             f"[1e-8, 1e-2], got {self.h}")


EXACT = DiffConfig()


def _is_const(x) -> bool:
    return isinstance(x, (int, float, np.ndarray, np.generic))


class Jet2:
    """Value, gradient and symmetric Hessian w.r.t. n seed variables."""

    __slots__ = ("value", "gradient", "hessian")

    def __init__(self, value, gradient, hessian):
        self.value = np.asarray(value, dtype=float)
        self.gradient = np.asarray(gradient, dtype=float)
        self.hessian = np.asarray(hessian, dtype=float)

    @property
    def nvars(self) -> int:
        return self.gradient.shape[0]

    def d(self, i: int):
        """First partial with respect to seed variable i."""
        return self.gradient[i]

    def d2(self, i: int, j: int):
        """Second partial with respect to seed variables i and j."""
        return self.hessian[i, j]

    # ---- arithmetic -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value,
                        self.gradient + other.gradient,
                        self.hessian + other.hessian)
        if _is_const(other):
            return Jet2(self.value + other, self.gradient, self.hessian)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value,
                        self.gradient - other.gradient,
                        self.hessian - other.hessian)
        if _is_const(other):
            return Jet2(self.value - other, self.gradient, self.hessian)
        return NotImplemented

    def __rsub__(self, other):
        if _is_const(other):
            return Jet2(other - self.value, -self.gradient, -self.hessian)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet2):
            g1, g2 = self.gradient, other.gradient
            cross = g1[:, None] * g2[None, :]
            return Jet2(self.value * other.value,
                        self.value * g2 + other.value * g1,
                        self.value * other.hessian
                        + other.value * self.hessian
                        + cross + np.swapaxes(cross, 0, 1))
        if _is_const(other):
            return Jet2(self.value * other, self.gradient * other,
                        self.hessian * other)
        return NotImplemented

    __rmul__ = __mul__

    def _reciprocal(self):
        v = self.value
        if np.any(v == 0.0):
            raise DomainError("division by a zero jet value")
        inv = 1.0 / v
        inv2 = inv * inv
        g = self.gradient
        cross = g[:, None] * g[None, :]
        return Jet2(inv, -g * inv2,
                    -self.hessian * inv2 + 2.0 * cross * (inv2 * inv))

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other._reciprocal()
        if _is_const(other):
            return self * (1.0 / np.asarray(other, dtype=float))
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_const(other):
            return self._reciprocal() * other
        return NotImplemented

    def _chain(self, w, d1, d2):
        """Compose with a scalar map given w = f(v), d1 = f'(v), d2 = f''(v)."""
        g = self.gradient
        cross = g[:, None] * g[None, :]
        return Jet2(w, d1 * g, d1 * self.hessian + d2 * cross)

    def __pow__(self, q):
        if isinstance(q, Jet2):
            raise DomainError("jet-valued exponents are not supported")
        qf = float(q)
        if qf == 0.0:
            return Jet2(np.ones_like(self.value),
                        np.zeros_like(self.gradient),
                        np.zeros_like(self.hessian))
        if qf.is_integer() and 0 < qf <= 16:
            # integer powers stay valid for negative bases
            out = self
            for _ in range(int(qf) - 1):
                out = out * self
            return out
        v = self.value
        if np.any(v <= 0.0):
            raise DomainError(f"power base must be positive for exponent {q}")
        w = v ** qf
        return self._chain(w, qf * v ** (qf - 1.0),
                           qf * (qf - 1.0) * v ** (qf - 2.0))

    def log(self):
        v = self.value
        if np.any(v <= 0.0):
            raise DomainError("log of a nonpositive jet value")
        inv = 1.0 / v
        return self._chain(np.log(v), inv, -inv * inv)

    def exp(self):
        w = np.exp(self.value)
        return self._chain(w, w, w)

    def sqrt(self):
        return self ** 0.5

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Jet2(value={self.value!r})"


def jet_log(x):
    """log that also accepts raw numbers/arrays."""
    return x.log() if isinstance(x, Jet2) else np.log(x)


def constant_jet(value, nvars: int) -> Jet2:
    v = np.asarray(value, dtype=float)
    return Jet2(v, np.zeros((nvars,) + v.shape),
                np.zeros((nvars, nvars) + v.shape))


def seed_jets(*coords) -> tuple[Jet2, ...]:
    """Seed one jet per coordinate; coordinates broadcast to a common shape."""
    n = len(coords)
    arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
    shape = arrays[0].shape
    out = []
    for i, arr in enumerate(arrays):
        g = np.zeros((n,) + shape)
        g[i] = 1.0
        out.append(Jet2(arr.copy(), g, np.zeros((n, n) + shape)))
    return tuple(out)


def _central_jet(field, coords, h: float) -> Jet2:
    arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
    n = len(arrays)
    shape = arrays[0].shape

    def f(shift):
        pts = [a + s for a, s in zip(arrays, shift)]
        return np.asarray(field(*pts), dtype=float)

    zero = [0.0] * n
    f0 = f(zero)
    grad = np.zeros((n,) + shape)
    hess = np.zeros((n, n) + shape)
    plus, minus = [], []
    for i in range(n):
        sp, sm = list(zero), list(zero)
        sp[i], sm[i] = h, -h
        fp, fm = f(sp), f(sm)
        plus.append(fp)
        minus.append(fm)
        grad[i] = (fp - fm) / (2.0 * h)
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(n):
        for j in range(i + 1, n):
            s = list(zero)
            s[i], s[j] = h, h
            fpp = f(s)
            s[j] = -h
            fpm = f(s)
            s[i], s[j] = -h, h
            fmp = f(s)
            s[j] = -h
            fmm = f(s)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    return Jet2(f0, grad, hess)


def jet_eval(field, coords, config: DiffConfig = EXACT) -> Jet2:
    """Evaluate field(*coords) together with first and second partials.

    coords is a sequence of scalars or broadcastable arrays; the returned
    jet differentiates with respect to each coordinate in order.
    """
    if config.mode == EXACT_JET:
        result = field(*seed_jets(*coords))
        if not isinstance(result, Jet2):
            n = len(coords)
            shape = np.broadcast_shapes(*[np.shape(c) for c in coords])
            return constant_jet(np.broadcast_to(np.asarray(result, float),
                                                shape), n)
        return result
    return _central_jet(field, coords, config.h)
