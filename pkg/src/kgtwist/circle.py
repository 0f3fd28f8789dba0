"""Exact circle-valued phases and cyclotomic scalars.

A :class:`CircleValue` stores an angle ``q`` meaning ``exp(2*pi*i*q)``.  Rational
angles are exact; float angles are the opt-in approximate mode and compare with
an absolute tolerance of ``FLOAT_TOL`` on the circle.

:class:`Cyclo` is an element of the cyclotomic field ``Q(zeta_N)`` written in the
power basis ``1, zeta, ..., zeta^(phi(N)-1)``.  It is used wherever sums of
phases must be compared exactly (twisted convolution).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import MixedModeError

FLOAT_TOL = 1e-12

Angle = Union[Fraction, float]


def parse_angle(text) -> Fraction:
    """Parse ``"p/q"``, an int, or a Fraction into an exact angle."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot read an exact angle from {text!r}")


def format_angle(q: Angle) -> str:
    if isinstance(q, Fraction):
        return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)
    return repr(q)


@dataclass(frozen=True)
class CircleValue:
    angle: Angle = Fraction(0)

    def __post_init__(self):
        a = self.angle
        if isinstance(a, int):
            a = Fraction(a)
        if isinstance(a, Fraction):
            a = a - math.floor(a)
        else:
            a = float(a) % 1.0
            if a >= 1.0 - FLOAT_TOL / 2:
                a = 0.0
        object.__setattr__(self, "angle", a)

    @property
    def exact(self) -> bool:
        return isinstance(self.angle, Fraction)

    @classmethod
    def one(cls) -> CircleValue:
        return cls(Fraction(0))

    def promote(self) -> CircleValue:
        """Explicit conversion to approximate mode."""
        return CircleValue(float(self.angle))

    def _check(self, other: CircleValue):
        if self.exact != other.exact:
            raise MixedModeError("promote exact values before mixing with floats")

    def __mul__(self, other: CircleValue) -> CircleValue:
        if not isinstance(other, CircleValue):
            return NotImplemented
        self._check(other)
        return CircleValue(self.angle + other.angle)

    def __truediv__(self, other: CircleValue) -> CircleValue:
        if not isinstance(other, CircleValue):
            return NotImplemented
        self._check(other)
        return CircleValue(self.angle - other.angle)

    def conjugate(self) -> CircleValue:
        return CircleValue(-self.angle)

    def __pow__(self, n) -> CircleValue:
        return CircleValue(self.angle * n)

    def is_one(self) -> bool:
        if self.exact:
            return self.angle == 0
        return min(self.angle, 1.0 - self.angle) <= FLOAT_TOL

    def __eq__(self, other) -> bool:
        if not isinstance(other, CircleValue):
            return NotImplemented
        self._check(other)
        if self.exact:
            return self.angle == other.angle
        return (self / other).is_one()

    def __hash__(self):
        if not self.exact:
            raise TypeError("approximate circle values are not hashable")
        return hash(self.angle)

    def to_complex(self) -> complex:
        return cmath.exp(2j * math.pi * float(self.angle))

    def to_scalar(self) -> Cyclo | complex:
        if self.exact:
            return Cyclo.root_of_unity(self.angle)
        return self.to_complex()

    def __repr__(self) -> str:
        return f"e(2pi i*{format_angle(self.angle)})"

    def __str__(self) -> str:
        return format_angle(self.angle)


ONE = CircleValue.one()


# ---------------------------------------------------------------------------
# cyclotomic field arithmetic
# ---------------------------------------------------------------------------

def _poly_divmod(num: list[int], den: list[int]) -> list[int]:
    # exact division of integer polynomials (coefficients low -> high), den monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        coef = num[i + len(den) - 1]
        out[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] -= coef * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("polynomial division was not exact")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low -> high) of the n-th cyclotomic polynomial."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divmod(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


def _totient(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


def _reduce(coeffs: list[Fraction], n: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    c = list(coeffs)
    for i in range(len(c) - 1, deg - 1, -1):
        lead = c[i]
        if lead:
            c[i] = Fraction(0)
            for j in range(deg):
                c[i - deg + j] -= lead * phi[j]
    c = c[:deg] + [Fraction(0)] * max(0, deg - len(c))
    return tuple(c)


class Cyclo:
    """Exact element of Q(zeta_n)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs):
        self.n = n
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @classmethod
    def rational(cls, q) -> Cyclo:
        return cls(1, [Fraction(q)])

    @classmethod
    def root_of_unity(cls, angle: Fraction) -> Cyclo:
        angle = Fraction(angle) % 1
        n, j = angle.denominator, angle.numerator
        powers = [Fraction(0)] * (j + 1)
        powers[j] = Fraction(1)
        return cls(n, _reduce(powers, n))

    def lift(self, m: int) -> Cyclo:
        """Rewrite in Q(zeta_m); requires n | m."""
        if m == self.n:
            return self
        step = m // self.n
        c = [Fraction(0)] * (step * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            c[i * step] = a
        return Cyclo(m, _reduce(c, m))

    def _common(self, other: Cyclo) -> tuple[Cyclo, Cyclo]:
        m = math.lcm(self.n, other.n)
        return self.lift(m), other.lift(m)

    @staticmethod
    def _coerce(x) -> Cyclo:
        if isinstance(x, Cyclo):
            return x
        if isinstance(x, (int, Fraction)):
            return Cyclo.rational(x)
        if isinstance(x, CircleValue) and x.exact:
            return Cyclo.root_of_unity(x.angle)
        raise TypeError(f"cannot use {x!r} as an exact scalar")

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) + other
        a, b = self._common(self._coerce(other))
        return Cyclo(a.n, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-x for x in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) - other
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) * other
        a, b = self._common(self._coerce(other))
        prod = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return Cyclo(a.n, _reduce(prod, a.n))

    __rmul__ = __mul__

    def conjugate(self) -> Cyclo:
        # zeta^i -> zeta^(n-i)
        c = [Fraction(0)] * (self.n + 1)
        for i, a in enumerate(self.coeffs):
            c[(-i) % self.n] += a
        return Cyclo(self.n, _reduce(c, self.n))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def rational_value(self) -> Fraction | None:
        """The value as a rational number, or None if it is not rational."""
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (complex, float)):
            return abs(complex(self) - other) <= FLOAT_TOL
        try:
            a, b = self._common(self._coerce(other))
        except TypeError:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __hash__(self):
        c = self.canonical()
        return hash((c.n, c.coeffs))

    def canonical(self) -> Cyclo:
        """Smallest-conductor representative (used for hashing only)."""
        for d in sorted(d for d in range(1, self.n + 1) if self.n % d == 0):
            if d == self.n:
                return self
            # try to express in Q(zeta_d) by checking that lifting back agrees
            step = self.n // d
            cand = [Fraction(0)] * _totient(d)
            ok = True
            for i, a in enumerate(self.coeffs):
                if a:
                    if i % step or i // step >= len(cand):
                        ok = False
                        break
                    cand[i // step] = a
            if ok and Cyclo(d, cand).lift(self.n).coeffs == self.coeffs:
                return Cyclo(d, cand)
        return self

    def __complex__(self) -> complex:
        z = cmath.exp(2j * math.pi / self.n)
        return sum((float(a) * z**i for i, a in enumerate(self.coeffs)), 0j)

    def abs_exact(self) -> Fraction | None:
        """|z| when it is rational, else None."""
        sq = (self * self.conjugate()).rational_value()
        if sq is None:
            return None
        num, den = math.isqrt(sq.numerator), math.isqrt(sq.denominator)
        if num * num == sq.numerator and den * den == sq.denominator:
            return Fraction(num, den)
        return None

    def __abs__(self) -> Fraction | float:
        exact = self.abs_exact()
        return exact if exact is not None else abs(complex(self))

    def __repr__(self) -> str:
        terms = [f"{a}*z{self.n}^{i}" for i, a in enumerate(self.coeffs) if a]
        return "Cyclo(" + (" + ".join(terms) or "0") + ")"


Scalar = Union[Cyclo, complex]


def scalar_abs(x: Scalar) -> Fraction | float:
    return abs(x)


def is_zero(x: Scalar) -> bool:
    if isinstance(x, Cyclo):
        return x.is_zero()
    return abs(x) <= FLOAT_TOL


def to_scalar(x, exact: bool = True) -> Scalar:
    if isinstance(x, Cyclo):
        return x if exact else complex(x)
    if isinstance(x, CircleValue):
        return x.to_scalar() if exact and x.exact else x.to_complex()
    if isinstance(x, (int, Fraction)):
        return Cyclo.rational(x) if exact else complex(float(x))
    return complex(x)
