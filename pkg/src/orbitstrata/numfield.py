"""Exact arithmetic in the biquadratic field Q(sqrt2, sqrt3).

An element is ``a + b*sqrt2 + c*sqrt3 + d*sqrt6`` with rational ``a, b, c, d``.
Internally the four components share one positive integer denominator, which
keeps multiplication down to a handful of integer products and one gcd.

Text form uses the tokens ``r2``, ``r3`` and ``r6`` for the radicals, e.g.
``-2*r3`` or ``1/2 + 3/4*r6``.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

RADICAL_TOKENS = ("", "r2", "r3", "r6")


class FieldElem:
    """Immutable element of Q(sqrt2, sqrt3).

    Construct from components (ints or Fractions)::

        FieldElem(1, 0, 0, 1)        # 1 + sqrt6
        FieldElem(Fraction(1, 2))    # 1/2
    """

    __slots__ = ("_n", "_den", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0):
        fr = [Fraction(v) for v in (a, b, c, d)]
        den = math.lcm(*(f.denominator for f in fr))
        self._set(tuple(f.numerator * (den // f.denominator) for f in fr), den)

    def _set(self, nums, den):
        g = math.gcd(*nums, den)
        if g != 1:
            nums = tuple(n // g for n in nums)
            den //= g
        self._n = nums
        self._den = den
        self._hash = None

    @classmethod
    def _raw(cls, nums, den):
        obj = cls.__new__(cls)
        if den < 0:
            nums = tuple(-n for n in nums)
            den = -den
        obj._set(nums, den)
        return obj

    @classmethod
    def coerce(cls, value) -> "FieldElem":
        if isinstance(value, FieldElem):
            return value
        if isinstance(value, int):
            return cls._raw((value, 0, 0, 0), 1)
        if isinstance(value, _RationalABC):
            return cls._raw((value.numerator, 0, 0, 0), value.denominator)
        if isinstance(value, float):
            return cls(Fraction(value))
        if isinstance(value, str):
            return parse_field(value)
        raise TypeError(f"cannot convert {type(value).__name__} to FieldElem")

    # components
    @property
    def a(self) -> Fraction:
        return Fraction(self._n[0], self._den)

    @property
    def b(self) -> Fraction:
        return Fraction(self._n[1], self._den)

    @property
    def c(self) -> Fraction:
        return Fraction(self._n[2], self._den)

    @property
    def d(self) -> Fraction:
        return Fraction(self._n[3], self._den)

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_zero(self) -> bool:
        n = self._n
        return not (n[0] or n[1] or n[2] or n[3])

    def is_rational(self) -> bool:
        n = self._n
        return not (n[1] or n[2] or n[3])

    def __bool__(self):
        return not self.is_zero()

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        n1, d1 = self._n, self._den
        n2, d2 = other._n, other._den
        if d1 == d2:
            return FieldElem._raw(
                (n1[0] + n2[0], n1[1] + n2[1], n1[2] + n2[2], n1[3] + n2[3]), d1)
        return FieldElem._raw(
            (n1[0] * d2 + n2[0] * d1, n1[1] * d2 + n2[1] * d1,
             n1[2] * d2 + n2[2] * d1, n1[3] * d2 + n2[3] * d1), d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        n = self._n
        obj = FieldElem.__new__(FieldElem)
        obj._n = (-n[0], -n[1], -n[2], -n[3])
        obj._den = self._den
        obj._hash = None
        return obj

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return FieldElem.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, FieldElem):
            if isinstance(other, int):
                n = self._n
                return FieldElem._raw(
                    (n[0] * other, n[1] * other, n[2] * other, n[3] * other), self._den)
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        a1, b1, c1, d1 = self._n
        a2, b2, c2, d2 = other._n
        den = self._den * other._den
        if not (b2 or c2 or d2):
            return FieldElem._raw((a1 * a2, b1 * a2, c1 * a2, d1 * a2), den)
        if not (b1 or c1 or d1):
            return FieldElem._raw((a1 * a2, a1 * b2, a1 * c2, a1 * d2), den)
        return FieldElem._raw((
            a1 * a2 + 2 * b1 * b2 + 3 * c1 * c2 + 6 * d1 * d2,
            a1 * b2 + b1 * a2 + 3 * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 + 2 * (b1 * d2 + d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        ), den)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        return field_inv(self)

    def __truediv__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        return self * field_inv(other)

    def __rtruediv__(self, other):
        return FieldElem.coerce(other) * field_inv(self)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return field_inv(self) ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj2(self) -> "FieldElem":
        """Image under sqrt2 -> -sqrt2."""
        a, b, c, d = self._n
        return FieldElem._raw((a, -b, c, -d), self._den)

    def conj3(self) -> "FieldElem":
        """Image under sqrt3 -> -sqrt3."""
        a, b, c, d = self._n
        return FieldElem._raw((a, b, -c, -d), self._den)

    # comparison
    def __eq__(self, other):
        if not isinstance(other, FieldElem):
            if not isinstance(other, (int, _RationalABC)):
                return NotImplemented
            other = FieldElem.coerce(other)
        return self._den == other._den and self._n == other._n

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, self._den))
        return self._hash

    def sign(self) -> int:
        return field_sign(self)

    def __lt__(self, other):
        return field_sign(self - FieldElem.coerce(other)) < 0

    def __le__(self, other):
        return field_sign(self - FieldElem.coerce(other)) <= 0

    def __gt__(self, other):
        return field_sign(self - FieldElem.coerce(other)) > 0

    def __ge__(self, other):
        return field_sign(self - FieldElem.coerce(other)) >= 0

    def __float__(self):
        return field_to_float(self)

    def __repr__(self):
        return f"FieldElem({format_field(self)!r})"

    def __str__(self):
        return format_field(self)


ZERO = FieldElem()
ONE = FieldElem(1)
R2 = FieldElem(0, 1)
R3 = FieldElem(0, 0, 1)
R6 = FieldElem(0, 0, 0, 1)


def field_add(u: FieldElem, v: FieldElem) -> FieldElem:
    return FieldElem.coerce(u) + FieldElem.coerce(v)


def field_mul(u: FieldElem, v: FieldElem) -> FieldElem:
    return FieldElem.coerce(u) * FieldElem.coerce(v)


def field_inv(u: FieldElem) -> FieldElem:
    """Multiplicative inverse via conjugation over Q ⊂ Q(sqrt2) ⊂ Q(sqrt2, sqrt3).

    Writing ``u = alpha + beta*sqrt3`` with ``alpha, beta`` in Q(sqrt2), the
    product ``u * conj3(u)`` lies in Q(sqrt2); multiplying that by its own
    sqrt2-conjugate lands in Q.
    """
    u = FieldElem.coerce(u)
    if u.is_zero():
        raise ZeroDivisionError("inverse of zero in Q(sqrt2, sqrt3)")
    if u.is_rational():
        num = u._n[0]
        return FieldElem._raw((u._den, 0, 0, 0), num)
    c3 = u.conj3()
    n2 = u * c3
    c2 = n2.conj2()
    norm = n2 * c2
    assert norm.is_rational()
    return c3 * c2 * FieldElem._raw((norm._den, 0, 0, 0), norm._n[0])


def field_to_float(u: FieldElem) -> float:
    a, b, c, d = u._n
    den = u._den
    if not (b or c or d):
        return a / den
    return (a + b * SQRT2 + c * SQRT3 + d * SQRT6) / den


def _sqrt_bounds(n: int, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    r = math.isqrt(n * scale * scale)
    lo = Fraction(r, scale)
    hi = Fraction(r + 1, scale) if r * r != n * scale * scale else lo
    return lo, hi


def field_sign(u: FieldElem) -> int:
    """Exact sign of a real element, by interval refinement of the radicals."""
    if u.is_zero():
        return 0
    a, b, c, d = u._n
    if not (b or c or d):
        return 1 if a > 0 else -1
    bits = 32
    while True:
        total_lo = Fraction(a)
        total_hi = Fraction(a)
        for coef, rad in ((b, 2), (c, 3), (d, 6)):
            if not coef:
                continue
            lo, hi = _sqrt_bounds(rad, bits)
            if coef > 0:
                total_lo += coef * lo
                total_hi += coef * hi
            else:
                total_lo += coef * hi
                total_hi += coef * lo
        if total_lo > 0:
            return 1
        if total_hi < 0:
            return -1
        bits *= 2


# ---------------------------------------------------------------- text form

def _format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_field(u: FieldElem) -> str:
    """Render as e.g. ``-2*r3`` or ``1 + 1/2*r6``; zero renders as ``0``."""
    parts = []
    for comp, tok in zip(u.components(), RADICAL_TOKENS):
        if comp == 0:
            continue
        neg = comp < 0
        mag = -comp if neg else comp
        if tok:
            body = tok if mag == 1 else f"{_format_rational(mag)}*{tok}"
        else:
            body = _format_rational(mag)
        parts.append((neg, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


_FACTOR_RE = re.compile(r"^(\d+)(?:/(\d+))?$")


def parse_factor(tok: str) -> FieldElem | None:
    """Parse one coefficient factor (``3``, ``1/2``, ``r2``...); None if it is not one."""
    tok = tok.strip()
    m = _FACTOR_RE.match(tok)
    if m:
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {tok!r}")
        return FieldElem(Fraction(int(m.group(1)), den))
    if tok == "r2":
        return R2
    if tok == "r3":
        return R3
    if tok == "r6":
        return R6
    return None


def parse_field(text: str) -> FieldElem:
    """Parse a constant written in the coefficient grammar."""
    # Constants are polynomials with no variables; reuse that parser.
    from .polyring import VarSet, parse_poly

    p = parse_poly(text, VarSet(()))
    return p.constant_term()
