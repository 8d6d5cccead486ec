"""Exact scalars: rationals plus real quadratic surds a + b*sqrt(d).

Everything numeric in the package is a :class:`fractions.Fraction`, except
Heisenberg charges such as sqrt(2), which live in :class:`Surd`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

Scalar = "Fraction | Surd"

_PLAIN = (Fraction, int, type(mpq(0)))


def _squarefree_part(n: int) -> tuple[int, int]:
    """Return (k, d) with n = k**2 * d and d squarefree."""
    k, d = 1, 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        if n % p == 0:
            n //= p
            d *= p
        p += 1
    return k, d * n


def _fraction(x) -> Fraction:
    # Fraction(mpq) would keep mpz parts, which gmpy2 later refuses to convert
    if isinstance(x, Fraction) and type(x.numerator) is int:
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


class Surd:
    """An element a + b*sqrt(d) of a real quadratic field, d > 1 squarefree."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        if d <= 1:
            raise ValueError("d must be a squarefree integer > 1")
        self.a = _fraction(a)
        self.b = _fraction(b)
        self.d = d

    @classmethod
    def sqrt(cls, q) -> "Fraction | Surd":
        """Exact square root of a nonnegative rational."""
        q = Fraction(q)
        if q < 0:
            raise ValueError("negative radicand")
        root = rational_root(q, 2)
        if root is not None:
            return root
        # sqrt(p/q) = sqrt(p*q)/q
        k, d = _squarefree_part(q.numerator * q.denominator)
        return cls(0, Fraction(k, q.denominator), d)

    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ValueError("cannot mix quadratic fields sqrt(%d), sqrt(%d)" % (self.d, other.d))
            return other if other.b != 0 else Surd(other.a, 0, self.d)
        if isinstance(other, (int, Rational)):
            return Surd(other, 0, self.d)
        return NotImplemented

    def _field(self, other: "Surd") -> int:
        return self.d if self.b != 0 else other.d

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _simplify(Surd(self.a + o.a, self.b + o.b, self._field(o)))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self._field(o)
        return _simplify(Surd(self.a * o.a + d * self.b * o.b, self.a * o.b + self.b * o.a, d))

    __rmul__ = __mul__

    def inverse(self):
        norm = self.a * self.a - self.d * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("zero surd")
        return _simplify(Surd(self.a / norm, -self.b / norm, self.d))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = Fraction(1)
        base = self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Surd):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Rational)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        return "Surd(%s, %s, %d)" % (self.a, self.b, self.d)

    def __str__(self):
        return format_scalar(self)


def _simplify(s: Surd):
    return s.a if s.b == 0 else s


def rational_root(q, n: int) -> Fraction | None:
    """Exact n-th root of a rational, or None when it is irrational."""
    q = Fraction(q)
    if q < 0:
        if n % 2 == 0:
            return None
        r = rational_root(-q, n)
        return None if r is None else -r
    num = _int_root(q.numerator, n)
    den = _int_root(q.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(m: int, n: int) -> int | None:
    if m in (0, 1):
        return m
    if n == 2:
        r = math.isqrt(m)
        return r if r * r == m else None
    # Newton iteration on integers, starting above the root
    x = 1 << -(-m.bit_length() // n)
    while True:
        y = ((n - 1) * x + m // x ** (n - 1)) // n
        if y >= x:
            break
        x = y
    return x if x**n == m else None


def rational_power(c, q: Fraction):
    """c**q for rational q, exactly; raises ValueError if irrational."""
    q = Fraction(q)
    if q.denominator == 1:
        return Fraction(c) ** int(q) if not isinstance(c, Surd) else c ** int(q)
    if isinstance(c, Surd):
        raise ValueError("fractional power of a surd is not representable")
    root = rational_root(Fraction(c), q.denominator)
    if root is None:
        raise ValueError("scaling not representable: (%s)^(%s) is irrational" % (c, q))
    return root**q.numerator


def fast(c):
    """Rationals as gmpy2 mpq (hot loops); surds unchanged."""
    if isinstance(c, Surd):
        return c
    if type(c) is int:
        return mpq(c)
    return mpq(c.numerator, c.denominator) if isinstance(c, Fraction) else c


def is_zero(c) -> bool:
    if type(c) in _PLAIN:
        return not c
    z = getattr(c, "is_zero", None)
    if z is not None:
        return z() if callable(z) else bool(z)
    return c == 0


_NUM = r"\d+(?:/\d+)?"
_RAD_RE = re.compile(r"^(?P<sign>[-+])?(?:(?P<b>%s)\*?)?sqrt\((?P<d>%s)\)$" % (_NUM, _NUM))
_SUM_RE = re.compile(r"^(?P<a>[-+]?%s)(?P<rest>[-+].*)?$" % _NUM)


def parse_scalar(text) -> "Fraction | Surd":
    """Parse "3/2", "-1", "sqrt(2)", "1/2*sqrt(2)" or "1 + 2*sqrt(3)"."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    body = "".join(str(text).split())
    a, rad = Fraction(0), body
    m = _SUM_RE.match(body)
    if m:
        a, rad = Fraction(m.group("a")), m.group("rest")
        if rad is None:
            return a
    r = _RAD_RE.match(rad)
    if not r:
        raise ValueError("cannot parse scalar %r" % text)
    b = Fraction(r.group("b")) if r.group("b") else Fraction(1)
    if r.group("sign") == "-":
        b = -b
    return a + b * Surd.sqrt(Fraction(r.group("d")))


def format_scalar(c) -> str:
    """Render an exact scalar as "p/q" (or "p" when integral)."""
    if isinstance(c, Surd):
        if c.b == 0:
            return format_scalar(c.a)
        rad = "sqrt(%d)" % c.d
        bpart = rad if c.b == 1 else "-" + rad if c.b == -1 else "%s*%s" % (format_scalar(c.b), rad)
        if c.a == 0:
            return bpart
        return "%s%s%s" % (format_scalar(c.a), "" if bpart.startswith("-") else "+", bpart)
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def binomial(m, n: int) -> Fraction:
    """Generalized binomial coefficient m(m-1)...(m-n+1)/n! for rational m."""
    if n < 0:
        return Fraction(0)
    out = Fraction(1)
    m = Fraction(m)
    for i in range(n):
        out = out * (m - i) / (i + 1)
    return out
