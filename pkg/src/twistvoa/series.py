"""Truncated formal Laurent series in z^(1/N) with exact coefficients.

A :class:`FracSeries` stores finitely many terms together with a *window*
``[lo, hi]``: the closed exponent range on which the stored data is known to be
exact.  A bound of ``None`` means the series is known all the way out on that
side, so a polynomial built with the default window is exact everywhere.
Outside the window nothing is claimed, and every operation shrinks the window
so that it only reports coefficients that all contributing terms determine.

Coefficients are duck-typed: anything supporting ``+``, unary ``-`` and
multiplication by a scalar works (rationals, :class:`~twistvoa.scalars.Surd`,
Fock vectors, slice operators).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .scalars import binomial, format_scalar, is_zero, parse_scalar, rational_power


class IndeterminateError(ValueError):
    """Raised when a requested coefficient lies outside the known window."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _lcm(*ns: int) -> int:
    out = 1
    for n in ns:
        out = out * n // math.gcd(out, n)
    return out


def _min(*xs):
    xs = [x for x in xs if x is not None]
    return min(xs) if xs else None


def _max(*xs):
    xs = [x for x in xs if x is not None]
    return max(xs) if xs else None


class FracSeries:
    """Finite-support Laurent series in z^(1/denom) with an explicit window."""

    __slots__ = ("terms", "denom", "lo", "hi")

    def __init__(
        self,
        terms: Mapping | Iterable = (),
        denom: int = 1,
        lo=None,
        hi=None,
    ):
        if denom < 1:
            raise ValueError("denominator must be positive")
        self.denom = int(denom)
        self.lo = None if lo is None else _frac(lo)
        self.hi = None if hi is None else _frac(hi)
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for e, c in items:
            e = _frac(e)
            if (e * self.denom).denominator != 1:
                raise ValueError("exponent %s not in (1/%d)Z" % (e, self.denom))
            if not self.known(e) or is_zero(c):
                continue
            clean[e] = clean[e] + c if e in clean else c
            if is_zero(clean[e]):
                del clean[e]
        self.terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, coef, exponent, denom: int = 1, lo=None, hi=None) -> "FracSeries":
        return cls({exponent: coef}, denom, lo, hi)

    @classmethod
    def zero(cls, denom: int = 1, lo=None, hi=None) -> "FracSeries":
        return cls({}, denom, lo, hi)

    # -- window helpers ---------------------------------------------------
    @property
    def step(self) -> Fraction:
        return Fraction(1, self.denom)

    def is_empty(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo > self.hi

    def known(self, e) -> bool:
        e = _frac(e)
        return (self.lo is None or e >= self.lo) and (self.hi is None or e <= self.hi)

    def coefficient(self, e, default=0):
        e = _frac(e)
        if not self.known(e):
            raise IndeterminateError("coefficient of z^(%s) lies outside window [%s, %s]" % (e, self.lo, self.hi))
        return self.terms.get(e, default)

    __getitem__ = coefficient

    def support(self) -> list[Fraction]:
        return sorted(self.terms)

    def valuation(self) -> Fraction | None:
        return min(self.terms) if self.terms else None

    def truncate(self, lo=None, hi=None) -> "FracSeries":
        """Shrink the window to its intersection with [lo, hi]."""
        return FracSeries(self.terms, self.denom, _max(self.lo, lo), _min(self.hi, hi))

    def lift(self, denom: int) -> "FracSeries":
        if denom % self.denom:
            raise ValueError("cannot lift 1/%d-series to 1/%d" % (self.denom, denom))
        return FracSeries(self.terms, denom, self.lo, self.hi)

    def map(self, fn: Callable) -> "FracSeries":
        return FracSeries({e: fn(c) for e, c in self.terms.items()}, self.denom, self.lo, self.hi)

    def is_zero(self) -> bool:
        return not self.terms

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "FracSeries"):
        if other.denom != self.denom:
            raise ValueError("mismatched exponent denominators %d and %d" % (self.denom, other.denom))

    def __add__(self, other):
        if not isinstance(other, FracSeries):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return FracSeries(out, self.denom, _max(self.lo, other.lo), _min(self.hi, other.hi))

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        if not isinstance(other, FracSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "FracSeries":
        return self.map(lambda x: c * x)

    def shift(self, e) -> "FracSeries":
        """Multiply by z^e exactly."""
        e = _frac(e)
        denom = _lcm(self.denom, e.denominator)
        return FracSeries(
            {k + e: c for k, c in self.terms.items()},
            denom,
            None if self.lo is None else self.lo + e,
            None if self.hi is None else self.hi + e,
        )

    def product_window(self, other: "FracSeries"):
        """Window on which the Cauchy product of self and other is determined."""
        la, ha, lb, hb = self.lo, self.hi, other.lo, other.hi
        # unknown tails on opposite sides pair up for every total exponent
        if (ha is not None and lb is not None) or (la is not None and hb is not None):
            return Fraction(1), Fraction(0)
        sa, sb = self.support(), other.support()
        his, los = [], []
        if ha is not None:
            if sb:
                his.append(ha + sb[0])
            if hb is not None:
                his.append(ha + hb)
        if hb is not None and sa:
            his.append(hb + sa[0])
        if la is not None:
            if sb:
                los.append(la + sb[-1])
            if lb is not None:
                los.append(la + lb)
        if lb is not None and sa:
            los.append(lb + sa[-1])
        return (max(los) if los else None), (min(his) if his else None)

    def __mul__(self, other):
        if not isinstance(other, FracSeries):
            return self.map(lambda x: x * other)
        self._check(other)
        lo, hi = self.product_window(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if (lo is not None and e < lo) or (hi is not None and e > hi):
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return FracSeries(out, self.denom, lo, hi)

    def __rmul__(self, other):
        if isinstance(other, FracSeries):
            return other.__mul__(self)
        return self.map(lambda x: other * x)

    def derivative(self) -> "FracSeries":
        """d/dz termwise: z^q -> q z^(q-1); the window moves down by one."""
        return FracSeries(
            {e - 1: e * c for e, c in self.terms.items() if e != 0},
            self.denom,
            None if self.lo is None else self.lo - 1,
            None if self.hi is None else self.hi - 1,
        )

    def residue(self):
        """Coefficient of z^(-1); fractional exponents never contribute."""
        if not self.known(-1):
            raise IndeterminateError("indeterminate residue: window [%s, %s] excludes -1" % (self.lo, self.hi))
        return self.terms.get(Fraction(-1), 0)

    # -- root variable ----------------------------------------------------
    def in_root_variable(self) -> "FracSeries":
        """Rewrite as an integer-exponent series in t = z^(1/denom)."""
        n = self.denom
        return FracSeries(
            {e * n: c for e, c in self.terms.items()},
            1,
            None if self.lo is None else self.lo * n,
            None if self.hi is None else self.hi * n,
        )

    @classmethod
    def from_root_variable(cls, s: "FracSeries", denom: int) -> "FracSeries":
        """Inverse of :meth:`in_root_variable` (s must have integer exponents)."""
        if s.denom != 1:
            raise ValueError("root-variable series must have integer exponents")
        return cls(
            {e / denom: c for e, c in s.terms.items()},
            denom,
            None if s.lo is None else s.lo / denom,
            None if s.hi is None else s.hi / denom,
        )

    # -- powers and substitution -----------------------------------------
    def power(self, q, hi=None) -> "FracSeries":
        """self**q for rational q via the binomial series.

        Terms below the window are taken to be absent (power-series
        convention).  The leading coefficient must admit an exact q-th power.
        ``hi`` caps the result window; it is required whenever the expansion is
        infinite.
        """
        q = _frac(q)
        if not self.terms:
            raise ValueError("power of the zero series")
        e0 = self.valuation()
        if self.lo is not None and self.lo > e0:
            raise IndeterminateError("leading term outside window")
        c0 = self.terms[e0]
        if isinstance(c0, int):
            c0 = Fraction(c0)
        lead = rational_power(c0, q)
        rel = FracSeries(
            {e - e0: c / c0 for e, c in self.terms.items() if e != e0},
            self.denom,
            None,
            None if self.hi is None else self.hi - e0,
        )
        base = e0 * q
        rel_cap = rel.hi
        if hi is not None:
            rel_cap = _min(rel_cap, _frac(hi) - base)
        finite = q.denominator == 1 and q >= 0 and rel.hi is None
        if rel_cap is None and not finite:
            if rel.is_zero():
                rel_cap = None
            else:
                raise ValueError("infinite expansion: pass hi= to truncate")
        out = {Fraction(0): Fraction(1)}
        acc = {Fraction(0): Fraction(1)}
        j = 1
        while True:
            if finite and j > q:
                break
            coef = binomial(q, j)
            acc = _mul_terms(acc, rel.terms, rel_cap)
            if not acc:
                break
            if coef:
                for e, c in acc.items():
                    out[e] = out.get(e, 0) + coef * c
            j += 1
        denom = _lcm(self.denom, base.denominator)
        res = FracSeries(
            {e + base: lead * c for e, c in out.items()},
            denom,
            None,
            None if rel_cap is None else rel_cap + base,
        )
        return res

    def compose(self, inner: "FracSeries", hi=None) -> "FracSeries":
        """Substitute z -> inner(z) into self.

        ``inner`` must have a strictly positive leading exponent; each term
        z^q of self becomes inner**q.  The principal part of self must be fully
        stored (``self.lo is None``).
        """
        if not inner.terms:
            raise ValueError("cannot substitute the zero series")
        e0 = inner.valuation()
        if e0 <= 0:
            raise ValueError("inner series must have strictly positive leading exponent, got %s" % e0)
        if self.lo is not None:
            raise IndeterminateError("outer series must have a known principal part (lo=None)")
        caps = [] if hi is None else [_frac(hi)]
        exps = [e0 * q for q in self.terms]
        if self.hi is not None:
            nxt = self.hi + self.step
            exps.append(e0 * nxt)
        denom = _lcm(inner.denom, *(x.denominator for x in exps)) if exps else inner.denom
        if self.hi is not None:
            caps.append(e0 * (self.hi + self.step) - Fraction(1, denom))
        cap = _min(*caps)
        total = FracSeries({}, denom, None, cap)
        for q, c in self.terms.items():
            piece = inner.power(q, hi=cap).scale(c)
            total = total + piece.lift(denom)
        return total

    # -- comparison / display ---------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, FracSeries):
            return NotImplemented
        return (
            self.denom == other.denom
            and self.lo == other.lo
            and self.hi == other.hi
            and set(self.terms) == set(other.terms)
            and all(self.terms[e] == other.terms[e] for e in self.terms)
        )

    def agrees_with(self, other: "FracSeries") -> bool:
        """Equal on the intersection of both windows."""
        lo, hi = _max(self.lo, other.lo), _min(self.hi, other.hi)
        keys = {e for e in set(self.terms) | set(other.terms) if (lo is None or e >= lo) and (hi is None or e <= hi)}
        return all(
            is_zero(self.terms.get(e, 0) - other.terms.get(e, 0))
            if e in self.terms and e in other.terms
            else is_zero(self.terms.get(e, other.terms.get(e, 0)))
            for e in keys
        )

    __hash__ = None

    def __repr__(self):
        return "FracSeries(%r)" % format_series(self)


def _mul_terms(a: Mapping, b: Mapping, cap) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if cap is not None and e > cap:
                continue
            p = c1 * c2
            out[e] = out[e] + p if e in out else p
    return {e: c for e, c in out.items() if not is_zero(c)}


# -- textual form -----------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?P<coef>[-+]?[^*z]*?)\s*\*?\s*(?P<z>z(?:\^\(?\s*(?P<exp>[-+]?\d+(?:/\d+)?)\s*\)?)?)?$"
)
_WINDOW_RE = re.compile(r"@\s*window\s*\[\s*([^,\]]+)\s*,\s*([^\]]+)\s*\]")


def _fmt_exp(e: Fraction) -> str:
    return format_scalar(e)


def format_series(s: FracSeries) -> str:
    """Render as e.g. ``3/2*z^(-1/2) + z^(1) @window[-1/2,4]``."""
    parts = []
    for e in s.support():
        c = s.terms[e]
        cs = format_scalar(c) if isinstance(c, (int, Fraction)) or hasattr(c, "d") else "(%s)" % c
        if e == 0:
            parts.append(cs)
        elif cs == "1":
            parts.append("z^(%s)" % _fmt_exp(e))
        elif cs == "-1":
            parts.append("-z^(%s)" % _fmt_exp(e))
        else:
            parts.append("%s*z^(%s)" % (cs, _fmt_exp(e)))
    body = " + ".join(parts) if parts else "0"
    body = body.replace("+ -", "- ")
    if s.lo is None and s.hi is None:
        return body
    lo = "-inf" if s.lo is None else _fmt_exp(s.lo)
    hi = "inf" if s.hi is None else _fmt_exp(s.hi)
    return "%s @window[%s,%s]" % (body, lo, hi)


def parse_series(text: str, denom: int | None = None) -> FracSeries:
    """Parse the textual series format; whitespace-insensitive.

    ``denom`` fixes the exponent denominator; if omitted the least common
    denominator of the exponents and window bounds is used.
    """
    lo = hi = None
    m = _WINDOW_RE.search(text)
    if m:
        lo = None if m.group(1).strip() in ("-inf", "-oo") else Fraction(m.group(1).strip())
        hi = None if m.group(2).strip() in ("inf", "oo", "+inf") else Fraction(m.group(2).strip())
        text = text[: m.start()]
    body = re.sub(r"\s+", "", text)
    # split on + or - that begin a new term (not inside parentheses)
    tokens, depth, cur = [], 0, ""
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur and cur[-1] not in "*^":
            tokens.append(cur)
            cur = ch
        else:
            cur += ch
    if cur:
        tokens.append(cur)
    terms: dict = {}
    for tok in tokens:
        if tok in ("0", "+0", "-0"):
            continue
        tm = _TERM_RE.match(tok)
        if not tm:
            raise ValueError("cannot parse series term %r" % tok)
        coef_s = tm.group("coef").strip()
        if tm.group("z") is None:
            coef, exp = parse_scalar(coef_s), Fraction(0)
        else:
            if coef_s in ("", "+"):
                coef = Fraction(1)
            elif coef_s == "-":
                coef = Fraction(-1)
            else:
                coef = parse_scalar(coef_s)
            exp = Fraction(tm.group("exp")) if tm.group("exp") else Fraction(1)
        terms[exp] = terms.get(exp, 0) + coef
    if denom is None:
        dens = [e.denominator for e in terms] + [b.denominator for b in (lo, hi) if b is not None]
        denom = _lcm(*dens) if dens else 1
    return FracSeries(terms, denom, lo, hi)


# -- bivariate expansions ----------------------------------------------------


class BivariateSeries:
    """Power series in x, y with rational coefficients, truncated at total degree."""

    __slots__ = ("terms", "order")

    def __init__(self, terms: Mapping | None = None, order: int = 0):
        self.order = order
        self.terms = {
            (m, n): Fraction(c) for (m, n), c in (terms or {}).items() if c != 0 and m + n <= order
        }

    def __getitem__(self, mn) -> Fraction:
        m, n = mn
        if m + n > self.order:
            raise IndeterminateError("total degree %d exceeds order %d" % (m + n, self.order))
        return self.terms.get((m, n), Fraction(0))

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BivariateSeries(out, min(self.order, other.order))

    def __mul__(self, other):
        if not isinstance(other, BivariateSeries):
            return BivariateSeries({k: c * other for k, c in self.terms.items()}, self.order)
        order = min(self.order, other.order)
        out: dict = {}
        for (m1, n1), c1 in self.terms.items():
            for (m2, n2), c2 in other.terms.items():
                if m1 + m2 + n1 + n2 <= order:
                    k = (m1 + m2, n1 + n2)
                    out[k] = out.get(k, 0) + c1 * c2
        return BivariateSeries(out, order)

    __rmul__ = __mul__

    def items(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        return isinstance(other, BivariateSeries) and self.order == other.order and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return "BivariateSeries(%r, order=%d)" % (self.terms, self.order)


def _sqrt1p_minus_one(order: int, var: int) -> BivariateSeries:
    """(1+x)^(1/2) - 1 in x (var=0) or y (var=1)."""
    terms = {}
    for i in range(1, order + 1):
        terms[(i, 0) if var == 0 else (0, i)] = binomial(Fraction(1, 2), i)
    return BivariateSeries(terms, order)


def delta_coefficients(order: int) -> BivariateSeries:
    """All c_mn with m+n <= order in -log(((1+x)^(1/2) + (1+y)^(1/2))/2)."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    w = (_sqrt1p_minus_one(order, 0) + _sqrt1p_minus_one(order, 1)) * Fraction(1, 2)
    # -log(1 + w) = sum_{r>=1} (-1)^r w^r / r ; w has no constant term
    total = BivariateSeries({}, order)
    power = BivariateSeries({(0, 0): 1}, order)
    for r in range(1, order + 1):
        power = power * w
        total = total + power * Fraction((-1) ** r, r)
    return total
