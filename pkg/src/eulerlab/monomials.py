"""Exact symbolic layer over Laurent monomials in (r, z, tau).

A term is coeff * r^er * z^ez * tau^etau where the coefficient is a
multivariate polynomial over Q in named constants (a, b, k, ...) and each
exponent is an affine combination over Q of named exponent symbols
(p, q, ...).  Everything is exact Fraction arithmetic; nothing here
touches floats except the final numeric evaluation helper.

Sums are kept canonical: terms are merged when their exponent triples
agree structurally, zero coefficients are dropped, and terms are ordered
by exponent key.  This is deliberately a minimal fragment, just enough
to mechanize the power-matching derivation of the solution family; any
input outside the fragment raises UnsupportedForm.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import UnsupportedForm

COORDS = ("r", "z", "tau")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    raise UnsupportedForm(f"expected a rational number, got {x!r}")


def _fmt_fraction(f: Fraction) -> str:
    return str(f)


# ---------------------------------------------------------------------
# polynomials over Q in named symbols

class Poly:
    """Multivariate polynomial over Q; keys are sorted (symbol, power)
    tuples, values are nonzero Fractions."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for key, c in (terms or {}).items():
            c = _as_fraction(c)
            if c != 0:
                clean[key] = clean.get(key, Fraction(0)) + c
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def number(cls, value) -> "Poly":
        v = _as_fraction(value)
        return cls({(): v} if v != 0 else {})

    @classmethod
    def symbol(cls, name: str) -> "Poly":
        return cls({((name, 1),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(k == () for k in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise UnsupportedForm("polynomial is not constant")
        return self.terms.get((), Fraction(0))

    def free_symbols(self) -> set[str]:
        out = set()
        for key in self.terms:
            out.update(s for s, _ in key)
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.number(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return Poly(out)

    def __neg__(self):
        return Poly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.number(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            other = Poly.number(other)
        out = {}
        for k1, c1 in self.terms.items():
            d1 = dict(k1)
            for k2, c2 in other.terms.items():
                d = dict(d1)
                for s, p in k2:
                    d[s] = d.get(s, 0) + p
                key = tuple(sorted(d.items()))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return Poly(out)

    def scale(self, c) -> "Poly":
        c = _as_fraction(c)
        return Poly({k: v * c for k, v in self.terms.items()})

    def degree_in(self, sym: str) -> int:
        deg = 0
        for key in self.terms:
            for s, p in key:
                if s == sym:
                    deg = max(deg, p)
        return deg

    def substitute(self, sym: str, replacement) -> "Poly":
        """Replace sym by a Poly (or rational)."""
        if not isinstance(replacement, Poly):
            replacement = Poly.number(replacement)
        out = Poly()
        for key, c in self.terms.items():
            power = 0
            rest = []
            for s, p in key:
                if s == sym:
                    power = p
                else:
                    rest.append((s, p))
            term = Poly({tuple(rest): c})
            for _ in range(power):
                term = term * replacement
            out = out + term
        return out

    def coefficients_in(self, sym: str) -> list["Poly"]:
        """[c0, c1, ..., cd] with self = sum ci * sym^i."""
        d = self.degree_in(sym)
        buckets = [dict() for _ in range(d + 1)]
        for key, c in self.terms.items():
            power = 0
            rest = []
            for s, p in key:
                if s == sym:
                    power = p
                else:
                    rest.append((s, p))
            bucket = buckets[power]
            rest_key = tuple(rest)
            bucket[rest_key] = bucket.get(rest_key, Fraction(0)) + c
        return [Poly(b) for b in buckets]

    def monomial_gcd(self) -> dict[str, int]:
        """For each symbol, the minimal power appearing in every term."""
        if not self.terms:
            return {}
        common: dict[str, int] | None = None
        for key in self.terms:
            d = dict(key)
            if common is None:
                common = d
            else:
                common = {s: min(p, d[s]) for s, p in common.items()
                          if s in d}
        return {s: p for s, p in (common or {}).items() if p > 0}

    def divide_symbol(self, sym: str, power: int = 1) -> "Poly":
        out = {}
        for key, c in self.terms.items():
            d = dict(key)
            if d.get(sym, 0) < power:
                raise UnsupportedForm(f"{sym} does not divide {self}")
            d[sym] -= power
            out[tuple(sorted((s, p) for s, p in d.items() if p > 0))] = c
        return Poly(out)

    def normalized(self) -> "Poly":
        """Scale to coprime integer coefficients with the leading
        (lexicographically largest key) coefficient positive."""
        if not self.terms:
            return self
        den_lcm = 1
        for c in self.terms.values():
            den_lcm = den_lcm * c.denominator // math.gcd(den_lcm,
                                                          c.denominator)
        nums = [int(c * den_lcm) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = math.gcd(g, abs(n))
        scale = Fraction(den_lcm, g if g else 1)
        out = self.scale(scale)
        lead = max(out.terms)
        if out.terms[lead] < 0:
            out = -out
        return out

    def _term_str(self, key, c) -> str:
        parts = []
        if key == () or c != 1:
            parts.append(_fmt_fraction(abs(c)) if c != -1 or key == ()
                         else _fmt_fraction(abs(c)))
        for s, p in key:
            parts.append(s if p == 1 else f"{s}^{p}")
        if key != () and abs(c) == 1:
            parts = [p for p in parts if p not in ("1",)]
        return "*".join(parts) if parts else "1"

    def __str__(self):
        if not self.terms:
            return "0"
        def order(item):
            key, _ = item
            total = sum(p for _, p in key)
            return (-total, key)
        bits = []
        for key, c in sorted(self.terms.items(), key=order):
            text = self._term_str(key, c)
            if not bits:
                bits.append(text if c > 0 else f"-{text}")
            else:
                bits.append(f"+ {text}" if c > 0 else f"- {text}")
        return " ".join(bits)

    __repr__ = __str__

    def evaluate(self, values: dict[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for key, c in self.terms.items():
            term = c
            for s, p in key:
                if s not in values:
                    raise UnsupportedForm(f"no value for symbol {s}")
                term *= _as_fraction(values[s]) ** p
            total += term
        return total


# ---------------------------------------------------------------------
# affine exponents

class Affine:
    """const + sum of coeff * symbol with Fraction coefficients."""

    __slots__ = ("const", "lin")

    def __init__(self, const=0, lin: dict[str, Fraction] | None = None):
        self.const = _as_fraction(const)
        self.lin = {s: _as_fraction(c) for s, c in (lin or {}).items()
                    if _as_fraction(c) != 0}

    @classmethod
    def symbol(cls, name: str) -> "Affine":
        return cls(0, {name: Fraction(1)})

    def is_constant(self) -> bool:
        return not self.lin

    def constant_value(self) -> Fraction:
        if self.lin:
            raise UnsupportedForm(f"exponent {self} is not constant")
        return self.const

    def free_symbols(self) -> set[str]:
        return set(self.lin)

    def key(self):
        return (self.const, tuple(sorted(self.lin.items())))

    def __eq__(self, other):
        return isinstance(other, Affine) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __add__(self, other):
        if isinstance(other, Affine):
            lin = dict(self.lin)
            for s, c in other.lin.items():
                lin[s] = lin.get(s, Fraction(0)) + c
            return Affine(self.const + other.const, lin)
        return Affine(self.const + _as_fraction(other), dict(self.lin))

    def __sub__(self, other):
        if isinstance(other, Affine):
            return self + (-other)
        return Affine(self.const - _as_fraction(other), dict(self.lin))

    def __neg__(self):
        return Affine(-self.const, {s: -c for s, c in self.lin.items()})

    def scale(self, c) -> "Affine":
        c = _as_fraction(c)
        return Affine(self.const * c, {s: v * c for s, v in self.lin.items()})

    def substitute(self, sym: str, replacement) -> "Affine":
        if sym not in self.lin:
            return self
        coeff = self.lin[sym]
        rest = {s: c for s, c in self.lin.items() if s != sym}
        base = Affine(self.const, rest)
        if isinstance(replacement, Affine):
            return base + replacement.scale(coeff)
        return base + _as_fraction(replacement) * coeff

    def to_poly(self) -> Poly:
        p = Poly.number(self.const)
        for s, c in self.lin.items():
            p = p + Poly.symbol(s).scale(c)
        return p

    def evaluate(self, values: dict[str, Fraction]) -> Fraction:
        total = self.const
        for s, c in self.lin.items():
            if s not in values:
                raise UnsupportedForm(f"no value for exponent symbol {s}")
            total += c * _as_fraction(values[s])
        return total

    def __str__(self):
        bits = []
        for s, c in sorted(self.lin.items()):
            if not bits:
                if c == 1:
                    bits.append(s)
                elif c == -1:
                    bits.append(f"-{s}")
                else:
                    bits.append(f"{_fmt_fraction(c)}*{s}")
            else:
                sign = "+" if c > 0 else "-"
                mag = abs(c)
                bits.append(f"{sign} {s}" if mag == 1
                            else f"{sign} {_fmt_fraction(mag)}*{s}")
        if self.const != 0 or not bits:
            if not bits:
                bits.append(_fmt_fraction(self.const))
            else:
                sign = "+" if self.const > 0 else "-"
                bits.append(f"{sign} {_fmt_fraction(abs(self.const))}")
        return " ".join(bits)

    __repr__ = __str__


ZERO_EXP = Affine(0)


# ---------------------------------------------------------------------
# monomials and canonical sums

class Monomial:
    """coeff * r^er * z^ez * tau^etau."""

    __slots__ = ("coeff", "er", "ez", "etau")

    def __init__(self, coeff, er=ZERO_EXP, ez=ZERO_EXP, etau=ZERO_EXP):
        self.coeff = coeff if isinstance(coeff, Poly) else Poly.number(coeff)
        self.er = er if isinstance(er, Affine) else Affine(er)
        self.ez = ez if isinstance(ez, Affine) else Affine(ez)
        self.etau = etau if isinstance(etau, Affine) else Affine(etau)

    def exponent_key(self):
        return (self.er.key(), self.ez.key(), self.etau.key())

    def __str__(self):
        bits = [f"({self.coeff})" if len(self.coeff.terms) > 1
                else str(self.coeff)]
        for name, e in (("r", self.er), ("z", self.ez), ("tau", self.etau)):
            if e == ZERO_EXP:
                continue
            if e.is_constant() and e.const == 1:
                bits.append(name)
            elif e.is_constant():
                bits.append(f"{name}^{_fmt_fraction(e.const)}")
            else:
                bits.append(f"{name}^({e})")
        return "*".join(bits)

    __repr__ = __str__


class MonomialSum:
    """Canonical finite sum of monomials, merged on exponent triples."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        merged: dict = {}
        order: dict = {}
        for m in terms:
            key = m.exponent_key()
            if key in merged:
                merged[key] = Monomial(merged[key].coeff + m.coeff,
                                       m.er, m.ez, m.etau)
            else:
                merged[key] = m
                order[key] = len(order)
        kept = [m for k, m in merged.items() if not m.coeff.is_zero()]
        kept.sort(key=lambda m: m.exponent_key())
        self.terms = tuple(kept)

    @classmethod
    def zero(cls) -> "MonomialSum":
        return cls(())

    @classmethod
    def single(cls, coeff, er=0, ez=0, etau=0) -> "MonomialSum":
        return cls((Monomial(coeff, Affine(er) if not isinstance(er, Affine)
                             else er,
                             Affine(ez) if not isinstance(ez, Affine) else ez,
                             Affine(etau) if not isinstance(etau, Affine)
                             else etau),))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, MonomialSum):
            return NotImplemented
        return [(m.exponent_key(), m.coeff) for m in self.terms] == \
               [(m.exponent_key(), m.coeff) for m in other.terms]

    def __hash__(self):
        return hash(tuple((m.exponent_key(), m.coeff) for m in self.terms))

    def __add__(self, other):
        return MonomialSum(self.terms + other.terms)

    def __neg__(self):
        return MonomialSum(tuple(Monomial(-m.coeff, m.er, m.ez, m.etau)
                                 for m in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MonomialSum):
            out = []
            for m1 in self.terms:
                for m2 in other.terms:
                    out.append(Monomial(m1.coeff * m2.coeff,
                                        m1.er + m2.er, m1.ez + m2.ez,
                                        m1.etau + m2.etau))
            return MonomialSum(out)
        return self.scale(other)

    def scale(self, factor) -> "MonomialSum":
        if not isinstance(factor, Poly):
            factor = Poly.number(factor)
        return MonomialSum(tuple(Monomial(m.coeff * factor, m.er, m.ez,
                                          m.etau) for m in self.terms))

    def shift(self, dr=0, dz=0, dtau=0) -> "MonomialSum":
        return MonomialSum(tuple(Monomial(m.coeff, m.er + dr, m.ez + dz,
                                          m.etau + dtau)
                                 for m in self.terms))

    def div_r(self) -> "MonomialSum":
        return self.shift(dr=-1)

    def mul_r(self) -> "MonomialSum":
        return self.shift(dr=1)

    def differentiate(self, var: str) -> "MonomialSum":
        """d/dr, d/dz, or d/dt.  Since tau = t_star - t, the time rule is
        d/dt tau^g = -g tau^{g-1}."""
        out = []
        for m in self.terms:
            if var == "r":
                out.append(Monomial(m.coeff * m.er.to_poly(),
                                    m.er - 1, m.ez, m.etau))
            elif var == "z":
                out.append(Monomial(m.coeff * m.ez.to_poly(),
                                    m.er, m.ez - 1, m.etau))
            elif var == "t":
                out.append(Monomial(m.coeff * (-m.etau).to_poly(),
                                    m.er, m.ez, m.etau - 1))
            else:
                raise UnsupportedForm(f"unknown differentiation variable "
                                      f"{var!r}")
        return MonomialSum(out)

    def substitute(self, assignments: dict) -> "MonomialSum":
        """Substitute exponent symbols (rational or Affine values) and
        coefficient symbols (rational or Poly values)."""
        out = []
        for m in self.terms:
            coeff, er, ez, etau = m.coeff, m.er, m.ez, m.etau
            for sym, value in assignments.items():
                if isinstance(value, Affine):
                    er = er.substitute(sym, value)
                    ez = ez.substitute(sym, value)
                    etau = etau.substitute(sym, value)
                    coeff = coeff.substitute(sym, value.to_poly())
                elif isinstance(value, Poly):
                    if any(sym in e.free_symbols() for e in (er, ez, etau)):
                        if not value.is_constant():
                            raise UnsupportedForm(
                                f"cannot place polynomial value for {sym} "
                                "into an exponent")
                        c = value.constant_value()
                        er = er.substitute(sym, c)
                        ez = ez.substitute(sym, c)
                        etau = etau.substitute(sym, c)
                    coeff = coeff.substitute(sym, value)
                else:
                    c = _as_fraction(value)
                    er = er.substitute(sym, c)
                    ez = ez.substitute(sym, c)
                    etau = etau.substitute(sym, c)
                    coeff = coeff.substitute(sym, c)
            out.append(Monomial(coeff, er, ez, etau))
        return MonomialSum(out)

    def free_symbols(self) -> set[str]:
        out = set()
        for m in self.terms:
            out |= m.coeff.free_symbols()
            for e in (m.er, m.ez, m.etau):
                out |= e.free_symbols()
        return out

    def exponent_symbols(self) -> set[str]:
        out = set()
        for m in self.terms:
            for e in (m.er, m.ez, m.etau):
                out |= e.free_symbols()
        return out

    def evaluate(self, r, z, tau, symbol_values: dict) -> float:
        """Numeric value at (r, z, tau) once every symbol is assigned."""
        vals = {s: _as_fraction(v) for s, v in symbol_values.items()}
        total = 0.0
        for m in self.terms:
            c = float(m.coeff.evaluate(vals))
            er = float(m.er.evaluate(vals))
            ez = float(m.ez.evaluate(vals))
            et = float(m.etau.evaluate(vals))
            total += c * r ** er * z ** ez * tau ** et
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(str(m) for m in self.terms)

    __repr__ = __str__


# ---------------------------------------------------------------------
# text grammar:  sum := term (('+'|'-') term)*
#                term := factor ('*' factor)*
#                factor := number | symbol[^int] | coord['^' exponent]
#                exponent := signed number | name | '(' affine ')'

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]\w*)"
                    r"|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise UnsupportedForm(f"cannot tokenize {text[pos:]!r}")
        if m.lastgroup == "num":
            out.append(("num", Fraction(m.group("num"))))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if kind and tok[0] != kind:
            raise UnsupportedForm(f"expected {kind} at token {tok} in "
                                  f"{self.text!r}")
        if value is not None and tok[1] != value:
            raise UnsupportedForm(f"expected {value!r} at token {tok} in "
                                  f"{self.text!r}")
        self.i += 1
        return tok

    def parse_number(self) -> Fraction:
        sign = Fraction(1)
        while self.peek() == ("op", "-"):
            self.take()
            sign = -sign
        num = self.take("num")[1]
        if self.peek() == ("op", "/"):
            self.take()
            num = num / self.take("num")[1]
        return sign * num

    def parse_exponent(self) -> Affine:
        tok = self.peek()
        if tok == ("op", "("):
            self.take()
            expr = self._affine_body(closing=True)
            return expr
        if tok == ("op", "-") or tok[0] == "num":
            return Affine(self.parse_number())
        if tok[0] == "name":
            return Affine.symbol(self.take("name")[1])
        raise UnsupportedForm(f"bad exponent near token {tok} in "
                              f"{self.text!r}")

    def _affine_body(self, closing: bool) -> Affine:
        total = Affine(0)
        sign = Fraction(1)
        expect_operand = True
        while True:
            tok = self.peek()
            if tok == ("op", ")") and closing:
                self.take()
                break
            if tok[0] == "end":
                if closing:
                    raise UnsupportedForm(f"missing ')' in {self.text!r}")
                break
            if expect_operand:
                if tok == ("op", "-"):
                    self.take()
                    sign = -sign
                    continue
                if tok == ("op", "+"):
                    self.take()
                    continue
                if tok[0] == "num":
                    coeff = self.parse_number() * sign
                    if self.peek() == ("op", "*"):
                        self.take()
                        name = self.take("name")[1]
                        if name in COORDS:
                            raise UnsupportedForm(
                                "coordinates cannot appear in exponents")
                        total = total + Affine(0, {name: coeff})
                    else:
                        total = total + Affine(coeff)
                elif tok[0] == "name":
                    name = self.take("name")[1]
                    if name in COORDS:
                        raise UnsupportedForm(
                            "coordinates cannot appear in exponents")
                    total = total + Affine(0, {name: sign})
                else:
                    raise UnsupportedForm(f"bad exponent syntax near {tok} "
                                          f"in {self.text!r}")
                sign = Fraction(1)
                expect_operand = False
            else:
                if tok == ("op", "+"):
                    self.take()
                    expect_operand = True
                elif tok == ("op", "-"):
                    self.take()
                    sign = -sign
                    expect_operand = True
                else:
                    raise UnsupportedForm(f"bad exponent syntax near {tok} "
                                          f"in {self.text!r}")
        return total

    def parse_term(self, sign: Fraction) -> Monomial:
        coeff = Poly.number(sign)
        er, ez, etau = Affine(0), Affine(0), Affine(0)
        while True:
            tok = self.peek()
            if tok[0] == "num" or tok == ("op", "-"):
                coeff = coeff * Poly.number(self.parse_number())
            elif tok[0] == "name":
                name = self.take("name")[1]
                exp = None
                if self.peek() == ("op", "^"):
                    self.take()
                    exp = self.parse_exponent()
                if name in COORDS:
                    e = exp if exp is not None else Affine(1)
                    if name == "r":
                        er = er + e
                    elif name == "z":
                        ez = ez + e
                    else:
                        etau = etau + e
                else:
                    if exp is None:
                        coeff = coeff * Poly.symbol(name)
                    else:
                        p = exp.constant_value()
                        if p.denominator != 1 or p < 0:
                            raise UnsupportedForm(
                                "symbol powers must be nonnegative integers")
                        for _ in range(int(p)):
                            coeff = coeff * Poly.symbol(name)
            else:
                raise UnsupportedForm(f"unexpected token {tok} in "
                                      f"{self.text!r}")
            if self.peek() == ("op", "*"):
                self.take()
                continue
            return Monomial(coeff, er, ez, etau)

    def parse_sum(self) -> MonomialSum:
        terms = []
        sign = Fraction(1)
        while self.peek() == ("op", "-") or self.peek() == ("op", "+"):
            if self.take()[1] == "-":
                sign = -sign
        terms.append(self.parse_term(sign))
        while self.peek()[0] != "end":
            op = self.take("op")[1]
            if op not in "+-":
                raise UnsupportedForm(f"expected + or - between terms in "
                                      f"{self.text!r}")
            sign = Fraction(1) if op == "+" else Fraction(-1)
            while self.peek() in (("op", "-"), ("op", "+")):
                if self.take()[1] == "-":
                    sign = -sign
            terms.append(self.parse_term(sign))
        return MonomialSum(terms)


def parse_monomial_sum(text: str) -> MonomialSum:
    """Parse 'coef * r^p * z^q * tau^g' sums; see the CLI help of the
    derive subcommand for the grammar."""
    if not text or not text.strip():
        raise UnsupportedForm("empty expression")
    return _Parser(text).parse_sum()
