"""Exact arithmetic in Q(lambda) for a dominant matrix eigenvalue.

Edge lengths in the eigenmetric and the offsets derived from them live in
the number field generated by the Perron-Frobenius eigenvalue.  Elements
are polynomials in the eigenvalue over Q, reduced mod its minimal
polynomial, so equality is exact coefficient comparison.  Inequalities are
decided by evaluating over a rational isolating interval of the root and
refining by bisection; a nonzero element always separates from zero, so
the refinement terminates and no comparison is ever tie-broken silently.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy

Poly = tuple[Fraction, ...]


def _poly_trim(c: Sequence[Fraction]) -> Poly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _poly_trim(
        [
            (a[i] if i < len(a) else Fraction(0))
            + (b[i] if i < len(b) else Fraction(0))
            for i in range(n)
        ]
    )


def _poly_scale(a: Poly, s: Fraction) -> Poly:
    return _poly_trim([c * s for c in a])


def _poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return _poly_trim(out)


def _poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    while len(a) >= len(b) and _poly_trim(a):
        a = list(_poly_trim(a))
        if len(a) < len(b):
            break
        coef = a[-1] * inv_lead
        deg = len(a) - len(b)
        q[deg] = coef
        for i, cb in enumerate(b):
            a[deg + i] -= coef * cb
    return _poly_trim(q), _poly_trim(a)


def _poly_egcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """g, s, t with s*a + t*b = g."""
    r0, r1 = a, b
    s0, s1 = (Fraction(1),), ()
    t0, t1 = (), (Fraction(1),)
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_add(s0, _poly_scale(_poly_mul(q, s1), Fraction(-1)))
        t0, t1 = t1, _poly_add(t0, _poly_scale(_poly_mul(q, t1), Fraction(-1)))
    return r0, s0, t0


def _eval_interval(
    poly: Poly, lo: Fraction, hi: Fraction
) -> tuple[Fraction, Fraction]:
    """Exact rational interval enclosure of poly over [lo, hi] (Horner)."""
    vlo = vhi = Fraction(0)
    for c in reversed(poly):
        cands = (vlo * lo, vlo * hi, vhi * lo, vhi * hi)
        vlo, vhi = min(cands) + c, max(cands) + c
    return vlo, vhi


def _eval_at(poly: Poly, x: Fraction) -> Fraction:
    v = Fraction(0)
    for c in reversed(poly):
        v = v * x + c
    return v


class NumberField:
    """Q adjoined a root of an irreducible monic integer polynomial.

    The root is pinned by a rational isolating interval across which the
    minimal polynomial changes sign; the interval refines by bisection as
    comparisons demand.
    """

    def __init__(self, minpoly: Sequence[Fraction], lo: Fraction, hi: Fraction):
        self.minpoly: Poly = _poly_trim([Fraction(c) for c in minpoly])
        if not self.minpoly or self.minpoly[-1] != 1:
            raise ValueError("minimal polynomial must be monic")
        self.degree = len(self.minpoly) - 1
        if _eval_at(self.minpoly, lo) * _eval_at(self.minpoly, hi) >= 0:
            raise ValueError("interval does not isolate a root")
        self._lo = lo
        self._hi = hi

    @classmethod
    def for_root(cls, coeffs: Sequence[int], approx: float) -> "NumberField":
        """Field for the root of the given monic integer poly nearest approx."""
        minpoly = [Fraction(c) for c in coeffs]
        delta = Fraction(1, 16)
        x = Fraction(approx).limit_denominator(10**12)
        for _ in range(60):
            lo, hi = x - delta, x + delta
            if _eval_at(minpoly, lo) * _eval_at(minpoly, hi) < 0:
                return cls(minpoly, lo, hi)
            delta /= 2
            if delta < Fraction(1, 10**15):
                break
        raise ValueError("could not isolate the requested root")

    def refine(self) -> None:
        mid = (self._lo + self._hi) / 2
        vm = _eval_at(self.minpoly, mid)
        if vm == 0:
            # rational root; squeeze a tiny interval around it
            eps = (self._hi - self._lo) / 4
            self._lo, self._hi = mid - eps, mid + eps
            return
        if _eval_at(self.minpoly, self._lo) * vm < 0:
            self._hi = mid
        else:
            self._lo = mid

    def interval(self) -> tuple[Fraction, Fraction]:
        return self._lo, self._hi

    def element(self, coeffs: Sequence[Fraction | int]) -> "FieldElement":
        c = [Fraction(x) for x in coeffs]
        if len(c) > self.degree:
            c = list(self._reduce(tuple(c)))
        c += [Fraction(0)] * (self.degree - len(c))
        return FieldElement(self, tuple(c[: self.degree]))

    def _reduce(self, poly: Poly) -> Poly:
        _, r = _poly_divmod(poly, self.minpoly)
        return r

    @property
    def generator(self) -> "FieldElement":
        if self.degree == 1:
            return self.element([-self.minpoly[0]])
        return self.element([0, 1])

    def rational(self, q: Fraction | int) -> "FieldElement":
        return self.element([Fraction(q)])

    def zero(self) -> "FieldElement":
        return self.element([])

    def one(self) -> "FieldElement":
        return self.element([1])

    def __repr__(self) -> str:
        return f"NumberField(minpoly={self.minpoly}, root~{float((self._lo + self._hi) / 2):.6f})"


class FieldElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: Poly):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.field.element(_poly_add(self.coeffs, o.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return self.field.element([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prod = _poly_mul(_poly_trim(self.coeffs), _poly_trim(o.coeffs))
        return self.field.element(self.field._reduce(prod))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        a = _poly_trim(self.coeffs)
        if not a:
            raise ZeroDivisionError("inverse of zero")
        g, s, _ = _poly_egcd(a, self.field.minpoly)
        if len(g) != 1:
            raise ZeroDivisionError("element not invertible mod minpoly")
        return self.field.element(_poly_scale(s, 1 / g[0]))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field.rational(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def sign(self) -> int:
        """Exact sign: 0 only for the exact zero element."""
        if self.is_zero():
            return 0
        poly = _poly_trim(self.coeffs)
        for _ in range(20000):
            lo, hi = _eval_interval(poly, *self.field.interval())
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            self.field.refine()
        raise ArithmeticError("sign refinement did not converge")

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def to_float(self, digits: Fraction = Fraction(1, 10**17)) -> float:
        poly = _poly_trim(self.coeffs)
        if not poly:
            return 0.0
        for _ in range(200):
            lo, hi = _eval_interval(poly, *self.field.interval())
            if hi - lo < digits * max(1, abs(lo), abs(hi)):
                return float((lo + hi) / 2)
            self.field.refine()
        return float((lo + hi) / 2)

    def __repr__(self):
        return f"FieldElement({self.coeffs}, ~{self.to_float():.9g})"


def charpoly_int(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Monic characteristic polynomial of an integer matrix, exact."""
    m = sympy.Matrix([[int(x) for x in row] for row in matrix])
    p = m.charpoly()
    coeffs = list(reversed(p.all_coeffs()))  # ascending
    return [int(c) for c in coeffs]


def dominant_root_field(
    matrix: Sequence[Sequence[int]], approx: float
) -> NumberField:
    """Number field of the matrix eigenvalue nearest the float approx."""
    coeffs = charpoly_int(matrix)
    x = sympy.Symbol("x")
    poly = sympy.Poly(sum(c * x**i for i, c in enumerate(coeffs)), x)
    best = None
    for factor, _ in poly.factor_list()[1]:
        fc = [Fraction(int(c)) for c in reversed(factor.monic().all_coeffs())]
        roots = [complex(r) for r in sympy.nroots(factor, n=30)]
        for r in roots:
            if abs(r.imag) < 1e-12:
                cand = (abs(r.real - approx), fc, r.real)
                if best is None or cand[0] < best[0]:
                    best = cand
    if best is None or best[0] > 1e-3:
        raise ValueError(f"no eigenvalue near {approx}")
    _, fc, root = best
    return NumberField.for_root([int(c) for c in fc], root)
