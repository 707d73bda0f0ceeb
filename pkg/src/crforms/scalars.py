"""Exact Gaussian rationals: the base field Q(i).

A Scalar is a + b*i with a, b arbitrary-precision rationals.  All arithmetic
is exact; Fraction keeps both parts in canonical reduced form, so equality is
structural.  Instances are immutable and hashable.
"""

from __future__ import annotations

from fractions import Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Scalar:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if isinstance(re, Fraction) else Fraction(re))
        object.__setattr__(self, "im", im if isinstance(im, Fraction) else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # -- ring structure ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = as_scalar(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = as_scalar(other)
        return Scalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return as_scalar(other).__sub__(self)

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        return Scalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return as_scalar(other).__truediv__(self)

    # -- field automorphisms and predicates -----------------------------------

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_rational(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.re == other and self.im == 0
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar(x)
    raise TypeError(f"cannot interpret {x!r} as a Scalar")


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
MINUS_ONE = Scalar(-1)


def ipow(k: int) -> Scalar:
    """i**k for any integer k (negative allowed)."""
    return (ONE, I, MINUS_ONE, Scalar(0, -1))[k % 4]


def sign_scalar(s: int) -> Scalar:
    return ONE if s >= 0 else MINUS_ONE


def rational(num: int, den: int = 1) -> Scalar:
    return Scalar(Fraction(num, den))


def format_scalar(s: Scalar) -> str:
    """Canonical "a/b + c/d*i" rendering with reduced fractions."""
    if s.im == 0:
        return str(s.re)
    if s.re == 0:
        if s.im == 1:
            return "i"
        if s.im == -1:
            return "-i"
        return f"{s.im}*i"
    sign = "+" if s.im > 0 else "-"
    mag = abs(s.im)
    istr = "i" if mag == 1 else f"{mag}*i"
    return f"{s.re} {sign} {istr}"
