"""Mechanized replay of the power-law derivation of the blowup family.

The pipeline substitutes monomial ansatz fields into the axisymmetric
system symbolically, collects exponent/coefficient constraints by
monomial matching, and solves them over exact rationals.  Three stages:

  1. meridional ansatz vr = a r^p / tau, vz = b z^q / tau under the
     incompressibility condition,
  2. stream ansatz phi = abar r z / tau against the velocity recovery
     relations,
  3. swirl ansatz vtheta = k z^p1 r^q1 / tau under swirl transport plus
     the z-independence side condition (the quadratic vorticity source
     2/r vtheta vtheta_z vanishes iff vtheta_z = 0 once k != 0).

Stage results carry every collected constraint and every solution
branch; degenerate branches (a coefficient forced to zero, or terms
surviving only by vanishing individually) are reported but not selected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MissingField, UnsupportedForm
from .monomials import Affine, Monomial, MonomialSum, Poly

DEFAULT_NONZERO = frozenset({"a", "k"})

_MAX_TERMS_PER_EQUATION = 8


# ---------------------------------------------------------------------
# symbolic operators

OPERATORS = ("incompressibility", "swirl_transport", "swirl_laplacian",
             "biot_savart_r", "biot_savart_z")

_OPERATOR_ROLES = {
    "incompressibility": ("vr", "vz"),
    "swirl_transport": ("vr", "vtheta", "vz"),
    "swirl_laplacian": ("phi",),
    "biot_savart_r": ("phi",),
    "biot_savart_z": ("phi",),
}


def apply_operator(op: str, fields: dict[str, MonomialSum]) -> MonomialSum:
    """Apply one of the system's differential operators symbolically.

    incompressibility returns d_r(r vr) + d_z(r vz); swirl_transport
    returns the full left side with the source moved over,
    vtheta_t + vr vtheta_r + vz vtheta_z + vr vtheta / r;
    swirl_laplacian returns omega = -(Lap - 1/r^2) phi; the Biot-Savart
    pair returns -d_z phi and (1/r) d_r(r phi).
    """
    if op not in _OPERATOR_ROLES:
        raise UnsupportedForm(f"unknown operator {op!r}; expected one of "
                              f"{OPERATORS}")
    missing = [role for role in _OPERATOR_ROLES[op] if role not in fields]
    if missing:
        raise MissingField(f"operator {op!r} needs field role(s) "
                           f"{', '.join(missing)}")
    if op == "incompressibility":
        vr, vz = fields["vr"], fields["vz"]
        return (vr.mul_r().differentiate("r")
                + vz.mul_r().differentiate("z"))
    if op == "swirl_transport":
        vr, vth, vz = fields["vr"], fields["vtheta"], fields["vz"]
        return (vth.differentiate("t")
                + vr * vth.differentiate("r")
                + vz * vth.differentiate("z")
                + (vr * vth).div_r())
    phi = fields["phi"]
    if op == "swirl_laplacian":
        lap = (phi.differentiate("r").differentiate("r")
               + phi.differentiate("r").div_r()
               + phi.differentiate("z").differentiate("z")
               - phi.shift(dr=-2))
        return -lap
    if op == "biot_savart_r":
        return -phi.differentiate("z")
    return phi.mul_r().differentiate("r").div_r()


# ---------------------------------------------------------------------
# constraints and solution branches

@dataclass(frozen=True)
class Constraint:
    """A polynomial relation required to vanish, tagged with the
    monomial-matching step that produced it."""
    poly: Poly
    origin: str

    def __str__(self):
        return f"{self.poly} = 0    [{self.origin}]"


@dataclass(frozen=True)
class ConstraintSystem:
    equations: tuple[Constraint, ...]

    def polys(self) -> list[Poly]:
        return [c.poly for c in self.equations]

    def __str__(self):
        return "\n".join(str(c) for c in self.equations)


@dataclass(frozen=True)
class RationalValue:
    """num/den with polynomial numerator and denominator, used when a
    solved unknown is a ratio of parameter expressions (q1 = -(a+1)/a)."""
    num: Poly
    den: Poly

    def simplified(self) -> "RationalValue | Fraction | Poly":
        num, den = self.num, self.den
        if den.is_zero():
            raise UnsupportedForm("zero denominator in solved value")
        shared = {}
        num_gcd = num.monomial_gcd()
        for sym, p in den.monomial_gcd().items():
            if sym in num_gcd:
                shared[sym] = min(p, num_gcd[sym])
        for sym, p in shared.items():
            num = num.divide_symbol(sym, p)
            den = den.divide_symbol(sym, p)
        if den.is_constant():
            c = den.constant_value()
            out = num.scale(Fraction(1) / c)
            if out.is_constant():
                return out.constant_value()
            return out
        if num.is_zero():
            return Fraction(0)
        # constant ratio: num == c * den for some rational c
        lead = max(den.terms)
        if lead in num.terms:
            c = num.terms[lead] / den.terms[lead]
            if num == den.scale(c):
                return c
        return RationalValue(num, den)

    def evaluate(self, values: dict[str, Fraction]) -> Fraction:
        den = self.den.evaluate(values)
        if den == 0:
            raise UnsupportedForm(f"denominator {self.den} vanishes at "
                                  f"{values}")
        return self.num.evaluate(values) / den

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        num = str(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        den = str(self.den)
        if len(self.den.terms) > 1:
            den = f"({den})"
        return f"{num}/{den}"


def _format_value(v) -> str:
    return str(v)


@dataclass
class Branch:
    """One solution branch of a constraint system."""
    assignments: dict[str, object] = field(default_factory=dict)
    residual: list[Constraint] = field(default_factory=list)
    zeroed_coefficients: tuple[str, ...] = ()
    singleton_groups: int = 0
    merged_groups: int = 0

    def describe(self) -> str:
        parts = [f"{s}={_format_value(v)}"
                 for s, v in self.assignments.items()]
        return ", ".join(parts) if parts else "(no assignments)"


@dataclass
class SolveOutcome:
    """Result of solving a constraint system: 'solution' when every
    unknown is pinned, 'family' when free symbols remain, 'no_solution'
    when every branch hits a contradiction."""
    kind: str
    branches: list[Branch]
    free_symbols: tuple[str, ...]
    system: ConstraintSystem
    violated: Constraint | None = None

    @property
    def principal(self) -> Branch:
        if not self.branches:
            raise UnsupportedForm("no solution branch to report")
        return self.branches[0]


# ---------------------------------------------------------------------
# phase 1: monomial matching

def _set_partitions(n: int):
    """All partitions of range(n) as tuples of tuples (restricted
    growth strings)."""
    if n == 0:
        yield ()
        return
    codes = [0] * n

    def rec(i, maxcode):
        if i == n:
            groups: dict[int, list[int]] = {}
            for idx, c in enumerate(codes):
                groups.setdefault(c, []).append(idx)
            yield tuple(tuple(g) for _, g in sorted(groups.items()))
            return
        for c in range(maxcode + 2):
            codes[i] = c
            yield from rec(i + 1, max(maxcode, c))

    yield from rec(1, 0)


def _exponent_constraints(m1: Monomial, m2: Monomial, tag: str):
    out = []
    for name, e1, e2 in (("r", m1.er, m2.er), ("z", m1.ez, m2.ez),
                         ("tau", m1.etau, m2.etau)):
        diff = (e1 - e2).to_poly()
        if not diff.is_zero():
            out.append(Constraint(diff.normalized(),
                                  f"match {name}-exponents {tag}"))
        elif diff.is_zero() and (e1 - e2).const != 0:
            raise AssertionError  # unreachable: to_poly keeps constants
    return out


def _strip_nonzero(poly: Poly, nonzero: frozenset[str]) -> Poly:
    """Divide out declared-nonzero symbols common to every term."""
    for sym, p in poly.monomial_gcd().items():
        if sym in nonzero:
            poly = poly.divide_symbol(sym, p)
    return poly


def _coefficient_constraint(monos: list[Monomial], origin: str,
                            nonzero: frozenset[str]) -> Constraint:
    total = Poly()
    for m in monos:
        total = total + m.coeff
    total = _strip_nonzero(total, nonzero)
    if not total.is_zero():
        total = total.normalized()
    return Constraint(total, origin)


def match_monomials(equation: MonomialSum, nonzero: frozenset[str],
                    label: str):
    """Enumerate cancellation patterns of one equation.  Yields
    (constraints, singleton_count, merged_count) per pattern.

    Terms with structurally equal exponent triples are already merged;
    remaining terms either vanish individually or are grouped with
    matching exponents and a vanishing coefficient sum.
    """
    terms = list(equation.terms)
    if len(terms) > _MAX_TERMS_PER_EQUATION:
        raise UnsupportedForm(f"equation {label} has {len(terms)} terms; "
                              "the matcher handles at most "
                              f"{_MAX_TERMS_PER_EQUATION}")
    if not terms:
        yield [], 0, 0
        return
    for partition in _set_partitions(len(terms)):
        constraints: list[Constraint] = []
        singles = merged = 0
        feasible = True
        for group in partition:
            monos = [terms[i] for i in group]
            if len(monos) == 1:
                singles += 1
                tag = (f"isolated monomial r^({monos[0].er}) "
                       f"z^({monos[0].ez}) tau^({monos[0].etau}) in {label}")
            else:
                merged += 1
                tag = (f"collected monomial group of {len(monos)} terms "
                       f"in {label}")
                base = monos[0]
                for other in monos[1:]:
                    try:
                        constraints.extend(_exponent_constraints(
                            base, other, f"in {label}"))
                    except UnsupportedForm:
                        feasible = False
                        break
                if not feasible:
                    continue
            constraints.append(_coefficient_constraint(monos, tag, nonzero))
        if feasible:
            yield constraints, singles, merged


# ---------------------------------------------------------------------
# phase 2: solving the collected relations

def _subst_poly(poly: Poly, sym: str, value) -> Poly:
    if isinstance(value, RationalValue):
        d = poly.degree_in(sym)
        if d == 0:
            return poly
        coeffs = poly.coefficients_in(sym)
        out = Poly()
        for i, ci in enumerate(coeffs):
            term = ci
            for _ in range(i):
                term = term * value.num
            for _ in range(d - i):
                term = term * value.den
            out = out + term
        return out
    if isinstance(value, Poly):
        return poly.substitute(sym, value)
    return poly.substitute(sym, Poly.number(value))


def _apply_assignment(constraints: list[Constraint], sym: str,
                      value) -> list[Constraint]:
    out = []
    for c in constraints:
        out.append(Constraint(_subst_poly(c.poly, sym, value), c.origin))
    return out


def _provably_nonzero(poly: Poly, nonzero: frozenset[str]) -> bool:
    """True when poly is a nonzero rational times a product of
    declared-nonzero symbols."""
    if len(poly.terms) != 1:
        return False
    (key, c), = poly.terms.items()
    return c != 0 and all(s in nonzero for s, _ in key)


def _solve_relations(constraints: list[Constraint],
                     nonzero: frozenset[str],
                     assignments: dict[str, object],
                     zeroed: tuple[str, ...]):
    """Solve the relation set; returns (branches, violations) where each
    branch is (assignments, residual_constraints, zeroed) and each
    violation is the Constraint that became a nonzero constant."""
    constraints = list(constraints)
    assignments = dict(assignments)
    while True:
        pending: list[Constraint] = []
        violation = None
        for c in constraints:
            p = _strip_nonzero(c.poly, nonzero)
            if p.is_zero():
                continue
            if p.is_constant():
                violation = Constraint(c.poly, c.origin)
                break
            pending.append(Constraint(p, c.origin))
        if violation is not None:
            return [], [violation]
        constraints = pending
        if not constraints:
            return [(assignments, [], zeroed)], []

        progress = False
        # forced zeros: a single monomial whose only free factor is one
        # undetermined symbol
        for c in constraints:
            if len(c.poly.terms) != 1:
                continue
            (key, _), = c.poly.terms.items()
            syms = sorted(s for s, _ in key if s not in nonzero)
            if len(syms) == 1:
                sym = syms[0]
                assignments[sym] = Fraction(0)
                zeroed = zeroed + (sym,)
                constraints = _apply_assignment(constraints, sym,
                                                Fraction(0))
                progress = True
                break
        if progress:
            continue

        # linear solve: pick the relation with the fewest undetermined
        # symbols, solve for one that enters linearly with a provably
        # nonzero leading coefficient
        def undetermined(c: Constraint):
            return sorted(c.poly.free_symbols() - nonzero)

        solved = False
        for c in sorted(constraints, key=lambda c: (len(undetermined(c)),
                                                    str(c.poly))):
            for sym in undetermined(c):
                if c.poly.degree_in(sym) != 1:
                    continue
                c0, c1 = c.poly.coefficients_in(sym)
                if sym in c1.free_symbols():
                    continue
                if not (_provably_nonzero(c1, nonzero)):
                    continue
                value = RationalValue(-c0, c1).simplified()
                assignments[sym] = value
                if (isinstance(value, Fraction) and value == 0) or \
                        (isinstance(value, Poly) and value.is_zero()):
                    zeroed = zeroed + (sym,)
                constraints = _apply_assignment(constraints, sym, value)
                solved = True
                break
            if solved:
                break
        if solved:
            continue

        # branching: a single monomial with several undetermined factors
        # vanishes when any one of them does
        for c in constraints:
            if len(c.poly.terms) != 1:
                continue
            (key, _), = c.poly.terms.items()
            syms = sorted(s for s, _ in key if s not in nonzero)
            if len(syms) >= 2:
                branches, violations = [], []
                for sym in syms:
                    sub = _apply_assignment(constraints, sym, Fraction(0))
                    sub_assign = dict(assignments)
                    sub_assign[sym] = Fraction(0)
                    b, v = _solve_relations(sub, nonzero, sub_assign,
                                            zeroed + (sym,))
                    branches.extend(b)
                    violations.extend(v)
                return branches, violations

        # no further progress: report what remains as an unresolved family
        return [(assignments, constraints, zeroed)], []


# ---------------------------------------------------------------------
# the solver entry point

def solve_exponent_constraints(ansatz: dict[str, MonomialSum],
                               equations: list[MonomialSum],
                               nonzero=DEFAULT_NONZERO,
                               labels: list[str] | None = None
                               ) -> SolveOutcome:
    """Require each equation to vanish identically; solve for the
    ansatz unknowns.

    Phase 1 enumerates, per equation, which monomials merge (their
    exponent triples must agree, linear relations) and which vanish
    individually (their coefficients must be zero).  Phase 2 solves the
    collected relations exactly.  Branches are ordered with fully
    cancelling, nondegenerate ones first; the first branch is the
    principal solution.
    """
    nonzero = frozenset(nonzero)
    unknowns: set[str] = set()
    for f in ansatz.values():
        unknowns |= f.free_symbols()
    if labels is None:
        labels = [f"equation {i + 1}" for i in range(len(equations))]

    per_equation = []
    for eq, label in zip(equations, labels):
        patterns = list(match_monomials(eq, nonzero, label))
        if not patterns:
            raise UnsupportedForm(f"no feasible cancellation pattern for "
                                  f"{label}")
        per_equation.append(patterns)

    branches: list[tuple[Branch, ConstraintSystem]] = []
    violations: list[Constraint] = []
    for combo in itertools.product(*per_equation):
        constraints: list[Constraint] = []
        singles = merged = 0
        for cs, s, m in combo:
            constraints.extend(cs)
            singles += s
            merged += m
        system = ConstraintSystem(tuple(constraints))
        solved, bad = _solve_relations(constraints, nonzero, {}, ())
        violations.extend(bad)
        for assignments, residual, zeroed in solved:
            zero_coeffs = tuple(s for s in zeroed
                                if _symbol_in_coefficients(ansatz, s))
            branches.append((Branch(assignments, residual, zero_coeffs,
                                    singles, merged), system))

    if not branches:
        first = violations[0] if violations else None
        return SolveOutcome("no_solution", [], (), ConstraintSystem(()),
                            violated=first)

    branches.sort(key=lambda bs: (len(bs[0].zeroed_coefficients),
                                  bs[0].singleton_groups,
                                  len(bs[0].residual),
                                  bs[0].describe()))
    # deduplicate branches reaching identical assignments via different
    # partitions
    seen = set()
    unique: list[tuple[Branch, ConstraintSystem]] = []
    for b, s in branches:
        key = b.describe()
        if key not in seen:
            seen.add(key)
            unique.append((b, s))
    ordered = [b for b, _ in unique]
    principal_system = unique[0][1]

    assigned = set(ordered[0].assignments)
    free = tuple(sorted(unknowns - assigned))
    if ordered[0].residual:
        kind = "family"
    elif free:
        kind = "family"
    else:
        kind = "solution"
    return SolveOutcome(kind, ordered, free, principal_system)


def _symbol_in_coefficients(ansatz: dict[str, MonomialSum],
                            sym: str) -> bool:
    for f in ansatz.values():
        for m in f.terms:
            if sym in m.coeff.free_symbols():
                return True
    return False


# ---------------------------------------------------------------------
# the three-stage replay

@dataclass
class Stage:
    name: str
    ansatz: dict[str, MonomialSum]
    equation_labels: list[str]
    equations: list[MonomialSum]
    outcome: SolveOutcome

    def principal_assignments(self) -> dict[str, object]:
        return self.outcome.principal.assignments


@dataclass
class DerivationReplay:
    stages: list[Stage]
    fields: dict[str, MonomialSum]
    swirl_exponent: RationalValue
    a_value: Fraction | None

    def assignment_summary(self) -> list[str]:
        out = []
        for st in self.stages:
            for sym, v in st.principal_assignments().items():
                out.append(f"{sym} = {_format_value(v)}")
        return out


def _sym(name: str) -> Affine:
    return Affine.symbol(name)


def swirl_exponent_value(a: Fraction) -> Fraction:
    """q1 = -(1 + 1/a) for a concrete rational a."""
    a = Fraction(a)
    if a == 0:
        raise UnsupportedForm("a must be nonzero")
    return -(1 + 1 / a)


def replay_derivation(a_value=None, k_value=None) -> DerivationReplay:
    """Run the full three-stage pipeline with symbolic a, k (or concrete
    rationals) and return every stage's constraint system, branches, and
    the solved fields."""
    if a_value is not None:
        a_value = Fraction(a_value)
        if a_value == 0:
            raise UnsupportedForm("a must be nonzero")
    if k_value is not None:
        k_value = Fraction(k_value)
        if k_value == 0:
            raise UnsupportedForm("k must be nonzero")

    stages: list[Stage] = []

    # stage 1: meridional pair under incompressibility
    vr0 = MonomialSum.single(Poly.symbol("a"), er=_sym("p"), etau=-1)
    vz0 = MonomialSum.single(Poly.symbol("b"), ez=_sym("q"), etau=-1)
    ansatz1 = {"vr": vr0, "vz": vz0}
    eq1 = apply_operator("incompressibility", ansatz1)
    out1 = solve_exponent_constraints(ansatz1, [eq1],
                                      labels=["incompressibility"])
    stages.append(Stage("meridional ansatz under incompressibility",
                        ansatz1, ["incompressibility"], [eq1], out1))
    assign1 = out1.principal.assignments
    vr = vr0.substitute(assign1)
    vz = vz0.substitute(assign1)

    # stage 2: stream ansatz against the velocity recovery pair
    phi0 = MonomialSum.single(Poly.symbol("abar"), er=1, ez=1, etau=-1)
    ansatz2 = {"phi": phi0}
    eq2r = apply_operator("biot_savart_r", ansatz2) - vr
    eq2z = apply_operator("biot_savart_z", ansatz2) - vz
    out2 = solve_exponent_constraints(
        ansatz2, [eq2r, eq2z],
        labels=["radial velocity recovery", "axial velocity recovery"])
    stages.append(Stage("stream ansatz under velocity recovery",
                        ansatz2, ["radial velocity recovery",
                                  "axial velocity recovery"],
                        [eq2r, eq2z], out2))
    phi = phi0.substitute(out2.principal.assignments)

    # the recovered stream has zero azimuthal vorticity
    omega = apply_operator("swirl_laplacian", {"phi": phi})
    if not omega.is_zero():
        raise UnsupportedForm(f"stream ansatz yields nonzero vorticity "
                              f"{omega}")

    # stage 3: swirl ansatz under transport plus z-independence (the
    # quadratic source 2/r vtheta vtheta_z forces vtheta_z = 0 for k != 0)
    vth0 = MonomialSum.single(Poly.symbol("k"), er=_sym("q1"),
                              ez=_sym("p1"), etau=-1)
    ansatz3 = {"vr": vr, "vtheta": vth0, "vz": vz}
    eq3 = apply_operator("swirl_transport", ansatz3)
    side = vth0.differentiate("z")
    out3 = solve_exponent_constraints(
        {"vtheta": vth0}, [eq3, side],
        labels=["swirl transport", "swirl z-independence"])
    stages.append(Stage("swirl ansatz under transport", ansatz3,
                        ["swirl transport", "swirl z-independence"],
                        [eq3, side], out3))

    assign3 = dict(out3.principal.assignments)
    q1 = assign3.get("q1")
    if isinstance(q1, RationalValue):
        q1_value = q1
    elif isinstance(q1, Fraction):
        q1_value = RationalValue(Poly.number(q1), Poly.number(1))
    else:
        raise UnsupportedForm(f"unexpected solved swirl exponent {q1!r}")

    solved_exponents = {sym: v for sym, v in assign3.items()
                        if isinstance(v, Fraction)}
    fields = {"vr": vr, "vz": vz, "phi": phi,
              "omega": MonomialSum.zero(),
              "vtheta": vth0.substitute(solved_exponents)}

    # concrete substitution when a (and optionally k) are given
    if a_value is not None:
        concrete = {"a": a_value}
        if k_value is not None:
            concrete["k"] = k_value
        q1_num = q1_value.evaluate({"a": a_value})
        q1_value = RationalValue(Poly.number(q1_num), Poly.number(1))
        sub3 = {}
        for sym, v in assign3.items():
            sub3[sym] = q1_num if sym == "q1" else v
        vth = vth0.substitute(sub3).substitute(concrete)
        fields = {k: f.substitute(concrete)
                  for k, f in fields.items() if k != "vtheta"}
        fields["vtheta"] = vth
        # closing check: the concrete fields satisfy the full system
        checks = {
            "incompressibility": apply_operator(
                "incompressibility", fields),
            "swirl transport": apply_operator("swirl_transport", fields),
            "vorticity from stream": apply_operator(
                "swirl_laplacian", fields),
            "radial recovery": apply_operator("biot_savart_r", fields)
            - fields["vr"],
            "axial recovery": apply_operator("biot_savart_z", fields)
            - fields["vz"],
        }
        for label, res in checks.items():
            if not res.is_zero():
                raise UnsupportedForm(
                    f"replayed fields fail {label}: residual {res}")

    return DerivationReplay(stages, fields, q1_value,
                            a_value if a_value is not None else None)


def format_replay(replay: DerivationReplay, verbose: bool = False) -> str:
    """Human-readable summary used by the derive subcommand."""
    lines: list[str] = []
    for st in replay.stages:
        lines.append(f"stage: {st.name}")
        if verbose:
            for label, eq in zip(st.equation_labels, st.equations):
                lines.append(f"  {label}: {eq} = 0")
            for c in st.outcome.system.equations:
                lines.append(f"  relation: {c}")
        branch = st.outcome.principal
        for sym, v in branch.assignments.items():
            lines.append(f"  {sym} = {_format_value(v)}")
        if st.outcome.kind == "family":
            free = ", ".join(st.outcome.free_symbols)
            if free:
                lines.append(f"  family free in {free}")
        for alt in st.outcome.branches[1:]:
            note = []
            if alt.zeroed_coefficients:
                note.append("degenerate: zeroed "
                            + ", ".join(alt.zeroed_coefficients))
            if alt.singleton_groups:
                note.append(f"{alt.singleton_groups} terms vanish "
                            "individually")
            suffix = f"  ({'; '.join(note)})" if note else ""
            lines.append(f"  alternate branch: {alt.describe()}{suffix}")
    lines.append(f"swirl exponent q1 = {replay.swirl_exponent}"
                 if replay.a_value is None else
                 f"swirl exponent q1 = "
                 f"{replay.swirl_exponent.evaluate({'a': replay.a_value})}")
    lines.append("solved fields:")
    for name in ("vr", "vtheta", "vz", "phi", "omega"):
        lines.append(f"  {name} = {replay.fields[name]}")
    return "\n".join(lines)
