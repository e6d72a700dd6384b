"""The interval algebra B (x) Lambda(t,dt): homotopies, integration, cones.

A CDGA homotopy H between maps f, g: M -> B is an algebra map into
B (x) Lambda(t,dt) whose endpoint evaluations at t=0 and t=1 are f and g.
Fiberwise integration turns H into a cochain homotopy: with the tensor sign
fixed here, d(I H a) + I H(d a) = g(a) - f(a) holds exactly for every a.

The sign on the tensor factor is (-1)^{|b|} on b (x) omega.  It is the unique
choice making the identity above hold; `_check_integration_convention` pins
it with a concrete odd-degree sample and runs once per process.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cdga import (
    Algebra, CdgaElement, CdgaMorphism, FreeCDGA, Monomial, differential,
    free_cdga, multiply,
)
from .cochain import CohomologySpace, compute_cohomology
from .errors import InternalError, ValidationError
from .exactla import ONE, QMatrix, Vector, frac


class IntervalElement:
    """Element of B (x) Lambda(t,dt): sum b_k (x) t^k + sum c_k (x) t^k dt."""

    __slots__ = ("base", "poly", "dt")

    def __init__(self, base: Algebra, poly=None, dt=None):
        self.base = base
        self.poly: dict[int, CdgaElement] = {
            k: v for k, v in (poly or {}).items() if not v.is_zero()}
        self.dt: dict[int, CdgaElement] = {
            k: v for k, v in (dt or {}).items() if not v.is_zero()}

    @classmethod
    def constant(cls, elem: CdgaElement) -> "IntervalElement":
        return cls(elem.algebra, poly={0: elem})

    @classmethod
    def t_power(cls, elem: CdgaElement, k: int, with_dt: bool = False) -> "IntervalElement":
        return cls(elem.algebra, dt={k: elem}) if with_dt else cls(elem.algebra, poly={k: elem})

    def is_zero(self) -> bool:
        return not self.poly and not self.dt

    def __add__(self, other: "IntervalElement") -> "IntervalElement":
        self._same(other)
        poly = dict(self.poly)
        for k, v in other.poly.items():
            poly[k] = poly[k] + v if k in poly else v
        dt = dict(self.dt)
        for k, v in other.dt.items():
            dt[k] = dt[k] + v if k in dt else v
        return IntervalElement(self.base, poly, dt)

    def __sub__(self, other: "IntervalElement") -> "IntervalElement":
        return self + other.scale(-1)

    def scale(self, c) -> "IntervalElement":
        c = frac(c)
        return IntervalElement(self.base,
                               {k: v.scale(c) for k, v in self.poly.items()},
                               {k: v.scale(c) for k, v in self.dt.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntervalElement) and self.base is other.base
                and self.poly == other.poly and self.dt == other.dt)

    def __repr__(self):
        bits = [f"({v!r})t^{k}" for k, v in sorted(self.poly.items())]
        bits += [f"({v!r})t^{k}dt" for k, v in sorted(self.dt.items())]
        return " + ".join(bits) if bits else "0"

    def _same(self, other: "IntervalElement"):
        if self.base is not other.base:
            raise ValidationError("IntervalElements over different base algebras")


def interval_mul(u: IntervalElement, v: IntervalElement) -> IntervalElement:
    """Koszul-signed product; dt * dt = 0, and t^k dt picks up (-1)^{|b|}
    when moved past a base factor b."""
    u._same(v)
    out = IntervalElement(u.base)
    acc_poly: dict[int, CdgaElement] = {}
    acc_dt: dict[int, CdgaElement] = {}

    def add(acc, k, elem):
        if elem.is_zero():
            return
        acc[k] = acc[k] + elem if k in acc else elem

    for k1, b1 in u.poly.items():
        for k2, b2 in v.poly.items():
            add(acc_poly, k1 + k2, multiply(b1, b2))
        for k2, c2 in v.dt.items():
            add(acc_dt, k1 + k2, multiply(b1, c2))
    for k1, c1 in u.dt.items():
        for k2, b2 in v.poly.items():
            deg = b2.homogeneous_degree()
            sign = -ONE if (deg is not None and deg % 2) else ONE
            add(acc_dt, k1 + k2, multiply(c1, b2).scale(sign))
        # dt * dt = 0
    return IntervalElement(u.base, acc_poly, acc_dt)


def interval_d(u: IntervalElement) -> IntervalElement:
    """d(b (x) t^k) = db (x) t^k + (-1)^{|b|} k b (x) t^{k-1} dt,
    d(c (x) t^k dt) = dc (x) t^k dt."""
    poly: dict[int, CdgaElement] = {}
    dt: dict[int, CdgaElement] = {}

    def add(acc, k, elem):
        if elem.is_zero():
            return
        acc[k] = acc[k] + elem if k in acc else elem

    for k, b in u.poly.items():
        add(poly, k, differential(b))
        if k >= 1:
            deg = b.homogeneous_degree()
            sign = -ONE if (deg is not None and deg % 2) else ONE
            add(dt, k - 1, b.scale(sign * k))
    for k, c in u.dt.items():
        add(dt, k, differential(c))
    return IntervalElement(u.base, poly, dt)


def eval_at_0(u: IntervalElement) -> CdgaElement:
    return u.poly.get(0, u.base.zero())


def eval_at_1(u: IntervalElement) -> CdgaElement:
    out = u.base.zero()
    for v in u.poly.values():
        out = out + v
    return out


def integrate_0t(u: IntervalElement) -> IntervalElement:
    """t^k -> 0, t^k dt -> t^{k+1}/(k+1), with tensor sign (-1)^{|b|}."""
    _check_integration_convention()
    poly: dict[int, CdgaElement] = {}
    for k, c in u.dt.items():
        deg = c.homogeneous_degree()
        sign = -ONE if (deg is not None and deg % 2) else ONE
        term = c.scale(sign * Fraction(1, k + 1))
        key = k + 1
        poly[key] = poly[key] + term if key in poly else term
    return IntervalElement(u.base, poly, {})


def integrate_01(u: IntervalElement) -> CdgaElement:
    return eval_at_1(integrate_0t(u))


_convention_checked = False


def _check_integration_convention():
    """One-time self-test pinning the tensor sign of the integration operator.

    Verifies d K + K d = id - (id (x) eps_0) on odd and even samples; an odd
    sample distinguishes the sign, even samples guard the boring half.
    """
    global _convention_checked
    if _convention_checked:
        return
    _convention_checked = True  # set first: integrate_0t below re-enters
    b = free_cdga([("a", 2), ("x", 3)], {}, 8)
    samples = [
        IntervalElement.t_power(b.gen("x"), 1),             # x (x) t
        IntervalElement.t_power(b.gen("x"), 0, with_dt=True),
        IntervalElement.t_power(b.gen("a"), 2, with_dt=True),
        IntervalElement.t_power(multiply(b.gen("a"), b.gen("x")), 1, with_dt=True),
    ]
    for u in samples:
        lhs = interval_d(integrate_0t(u)) + integrate_0t(interval_d(u))
        rhs = u - IntervalElement.constant(eval_at_0(u))
        if lhs != rhs:
            raise InternalError("integration sign convention self-test failed")


class CdgaHomotopy:
    """Algebra map H: M -> B (x) Lambda(t,dt) stored on the free generators."""

    def __init__(self, domain: FreeCDGA, codomain: Algebra,
                 assignment: dict[str, IntervalElement], check: bool = True):
        self.domain = domain
        self.codomain = codomain
        self.assignment = dict(assignment)
        self._cache: dict[Monomial, IntervalElement] = {}
        missing = {g.name for g in domain.generators} - set(self.assignment)
        if missing:
            raise ValidationError(f"homotopy missing generators: {sorted(missing)}")
        if check:
            self.check_chain_condition()

    @classmethod
    def constant(cls, f: CdgaMorphism) -> "CdgaHomotopy":
        if f.domain.kind != "free":
            raise ValidationError("homotopies need a free domain")
        assignment = {g.name: IntervalElement.constant(f.gen_images[g.name])
                      for g in f.domain.generators}
        return cls(f.domain, f.codomain, assignment, check=False)

    def apply(self, elem: CdgaElement) -> IntervalElement:
        if elem.algebra is not self.domain:
            raise ValidationError("element not in homotopy domain")
        out = IntervalElement(self.codomain)
        for mono, c in elem.terms.items():
            out = out + self._apply_mono(mono).scale(c)
        return out

    def _apply_mono(self, mono: Monomial) -> IntervalElement:
        if mono in self._cache:
            return self._cache[mono]
        out = IntervalElement.constant(self.codomain.one())
        for i, e in enumerate(mono):
            img = self.assignment[self.domain.generators[i].name]
            for _ in range(e):
                out = interval_mul(out, img)
        self._cache[mono] = out
        return out

    def check_chain_condition(self):
        """H(dg) = d(H(g)) on every generator (enough for an algebra map)."""
        for g in self.domain.generators:
            lhs = self.apply(self.domain.generator_diff(g.name))
            rhs = interval_d(self.assignment[g.name])
            if lhs != rhs:
                raise ValidationError(f"homotopy is not a chain map on {g.name}")

    def endpoints(self) -> tuple[CdgaMorphism, CdgaMorphism]:
        """(eps_0 o H, eps_1 o H) as validated morphisms."""
        from .cdga import validate_morphism
        f_imgs = {g.name: eval_at_0(self.assignment[g.name]) for g in self.domain.generators}
        g_imgs = {g.name: eval_at_1(self.assignment[g.name]) for g in self.domain.generators}
        f = CdgaMorphism.on_generators(self.domain, self.codomain, f_imgs)
        g = CdgaMorphism.on_generators(self.domain, self.codomain, g_imgs)
        for label, mor in (("start", f), ("end", g)):
            problems = validate_morphism(mor)
            if problems:
                raise ValidationError(f"corrupt homotopy: {label} endpoint invalid: {problems}")
        return f, g

    def integral_of(self, elem: CdgaElement) -> CdgaElement:
        return integrate_01(self.apply(elem))

    def integral_matrix(self, n: int) -> QMatrix:
        """Matrix of the degree -1 map (I H): M^n -> B^{n-1} on monomial bases."""
        cols = [self.codomain.to_vector(self.integral_of(
            self.domain.element({m: ONE})), n - 1)
            for m in self.domain.basis_keys(n)]
        return QMatrix.from_columns(cols, self.codomain.dim(n - 1))


def check_homotopy_identity(h: CdgaHomotopy, max_degree: int) -> list[str]:
    """Verify d(IH a) + IH(da) = g(a) - f(a) on every domain monomial <= max_degree."""
    f, g = h.endpoints()
    problems = []
    for n in range(max_degree + 1):
        for mono in h.domain.basis_keys(n):
            a = h.domain.element({mono: ONE})
            lhs = differential(h.integral_of(a)) + h.integral_of(differential(a))
            rhs = g.apply(a) - f.apply(a)
            if lhs != rhs:
                problems.append(f"identity fails on {h.domain.key_repr(mono)}")
    return problems


class ConeComplex:
    """Mapping cone of (the cochain map underlying) m: M -> A.

    C^n = M^{n+1} + A^n with d(v, a) = (dv, m(v) - da); degrees run from -1
    so that H^0 is honest.  Carries no algebra structure.
    """

    def __init__(self, m: CdgaMorphism):
        self.m = m
        self.domain = m.domain
        self.target = m.codomain
        # d: C^n -> C^{n+1} reads M^{n+2}; stay a degree below the cap.
        self.max_degree = min(self.domain.degree_cap, self.target.degree_cap) - 1
        self._d_cache: dict[int, QMatrix] = {}
        self._h_cache: dict[int, CohomologySpace] = {}

    def dim_m(self, n: int) -> int:
        return self.domain.dim(n + 1)

    def dim_a(self, n: int) -> int:
        return self.target.dim(n)

    def dim(self, n: int) -> int:
        if n < -1 or n > self.max_degree:
            return 0
        return self.dim_m(n) + self.dim_a(n)

    def pack(self, n: int, v: CdgaElement, a: CdgaElement) -> Vector:
        return (self.domain.to_vector(v, n + 1) if self.dim_m(n) else ()) + \
               (self.target.to_vector(a, n) if self.dim_a(n) else ())

    def unpack(self, n: int, w) -> tuple[CdgaElement, CdgaElement]:
        dm = self.dim_m(n)
        v = self.domain.from_vector(n + 1, w[:dm]) if dm else self.domain.zero()
        a = self.target.from_vector(n, w[dm:]) if self.dim_a(n) else self.target.zero()
        return v, a

    def include_target(self, a: CdgaElement, n: int) -> Vector:
        """The natural map A -> C, a -> (0, -a)."""
        return self.pack(n, self.domain.zero(), a.scale(-1))

    def d_matrix(self, n: int) -> QMatrix:
        if n in self._d_cache:
            return self._d_cache[n]
        rows_out = self.dim(n + 1)
        cols = []
        for v, a in self._basis_elems(n):
            dv = differential(v)
            da = self.m.apply(v) - differential(a)
            if n + 1 > self.max_degree:
                col = ()
            else:
                col = self.pack(n + 1, dv, da)
            cols.append(col)
        mat = QMatrix.from_columns(cols, rows_out)
        self._d_cache[n] = mat
        return mat

    def _basis_elems(self, n: int):
        out = []
        for key in self.domain.basis_keys(n + 1) if n + 1 <= self.domain.degree_cap else ():
            out.append((self.domain.element({key: ONE}), self.target.zero()))
        for key in (self.target.basis_keys(n) if 0 <= n <= self.target.degree_cap else ()):
            out.append((self.domain.zero(), CdgaElement(self.target, {key: ONE})))
        return out

    def cohomology_space(self, n: int) -> CohomologySpace:
        """H^n of the cone; valid for n <= max_degree - 1."""
        if n > self.max_degree - 1:
            raise ValidationError(f"cone cohomology degree {n} exceeds reliable range")
        if n not in self._h_cache:
            d_in = self.d_matrix(n - 1) if n - 1 >= -1 else None
            self._h_cache[n] = compute_cohomology(self.d_matrix(n), d_in)
        return self._h_cache[n]

    def h_dim(self, n: int) -> int:
        return self.cohomology_space(n).dim


def cone(m: CdgaMorphism) -> ConeComplex:
    return ConeComplex(m)


@dataclass
class HomotopySquare:
    """A square commuting up to H: top u: M -> N, bottom w: A -> B,
    left m: M -> A, right n: N -> B, with H from w o m to n o u."""

    top: CdgaMorphism
    bottom: CdgaMorphism
    left: CdgaMorphism
    right: CdgaMorphism
    homotopy: CdgaHomotopy

    def validate(self):
        f, g = self.homotopy.endpoints()
        for gen in self.left.domain.generators:
            a = self.left.domain.gen(gen.name)
            if f.apply(a) != self.bottom.apply(self.left.apply(a)):
                raise ValidationError("homotopy start is not bottom o left")
            if g.apply(a) != self.right.apply(self.top.apply(a)):
                raise ValidationError("homotopy end is not right o top")


class ConeMap:
    """Cochain map C_m -> C_n induced by a homotopy-commutative square:
    phi(v, a) = (u(v), w(a) + IH(v))."""

    def __init__(self, square: HomotopySquare, check: bool = True):
        square.validate()
        self.square = square
        self.source = ConeComplex(square.left)
        self.target = ConeComplex(square.right)
        self._mat_cache: dict[int, QMatrix] = {}
        if check:
            self.check_chain_map()

    def apply_pair(self, v: CdgaElement, a: CdgaElement) -> tuple[CdgaElement, CdgaElement]:
        sq = self.square
        return sq.top.apply(v), sq.bottom.apply(a) + sq.homotopy.integral_of(v)

    def matrix(self, n: int) -> QMatrix:
        if n not in self._mat_cache:
            cols = []
            for v, a in self.source._basis_elems(n):
                tv, ta = self.apply_pair(v, a)
                cols.append(self.target.pack(n, tv, ta))
            self._mat_cache[n] = QMatrix.from_columns(cols, self.target.dim(n))
        return self._mat_cache[n]

    def apply_vector(self, n: int, w) -> Vector:
        return self.matrix(n).apply(w)

    def check_chain_map(self, up_to: Optional[int] = None):
        top = up_to if up_to is not None else self.source.max_degree - 1
        for n in range(-1, top + 1):
            lhs = self.target.d_matrix(n) @ self.matrix(n)
            rhs = self.matrix(n + 1) @ self.source.d_matrix(n)
            if lhs != rhs:
                raise InternalError(f"cone map fails to be a cochain map in degree {n}")


def cone_map(square: HomotopySquare) -> ConeMap:
    return ConeMap(square)
