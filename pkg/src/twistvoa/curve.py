"""The genus-0 double cover C = P^1 -> X = P^1, t -> s = t^2.

Rational functions on C are kept as reduced num/den polynomials in t over Q.
Special coordinates, fixed once here:

* branch point s = 0: y = t, so z = y^2 = s;
* branch point s = inf: y = u = 1/t, z = u^2 = 1/s;
* unramified fiber s = r^2 with chosen point p = e*r (e = +-1): w = t - e*r at p
  and w' = w o sigma_C = -t - e*r at the companion point -e*r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .scalars import format_scalar, parse_scalar, rational_root
from .series import FracSeries

# -- polynomials: ascending coefficient tuples --------------------------------


def _trim(p) -> tuple:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(Fraction(c) for c in p)


def padd(a, b) -> tuple:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def pscale(a, c) -> tuple:
    return _trim(c * x for x in a)


def psub(a, b) -> tuple:
    return padd(a, pscale(b, -1))


def pmul(a, b) -> tuple:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def ppow(a, n: int) -> tuple:
    out = (Fraction(1),)
    for _ in range(n):
        out = pmul(out, a)
    return out


def pdivmod(a, b) -> tuple[tuple, tuple]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(_trim(a))
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(a) >= len(b) and a:
        c = a[-1] / lead
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        a = list(_trim(a))
    return _trim(q), _trim(a)


def pgcd(a, b) -> tuple:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return pscale(a, 1 / a[-1]) if a else a


def peval(a, x):
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


def pcompose_affine(a, shift, scale) -> tuple:
    """Coefficients of a(shift + scale*w) in w."""
    out: tuple = ()
    lin = _trim((shift, scale))
    for c in reversed(a):
        out = padd(pmul(out, lin), (c,))
    return out


def pneg(a) -> tuple:
    """a(-t)."""
    return _trim(c if i % 2 == 0 else -c for i, c in enumerate(a))


def pvaluation(a) -> int:
    for i, c in enumerate(a):
        if c:
            return i
    raise ValueError("zero polynomial")


# -- rational functions ---------------------------------------------------------


class RationalFunction:
    """f = num/den in Q(t), stored reduced with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1,)):
        num, den = _trim(num), _trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.num, self.den = (), (Fraction(1),)
            return
        g = pgcd(num, den)
        if len(g) > 1:
            num, den = pdivmod(num, g)[0], pdivmod(den, g)[0]
        lead = den[-1]
        self.num, self.den = pscale(num, 1 / lead), pscale(den, 1 / lead)

    @classmethod
    def monomial(cls, c, j: int) -> "RationalFunction":
        """c * t^j for any integer j."""
        if j >= 0:
            return cls((0,) * j + (c,))
        return cls((c,), (0,) * (-j) + (1,))

    @classmethod
    def pole(cls, a, j: int, c=1) -> "RationalFunction":
        """c * (t - a)^(-j)."""
        return cls((c,), ppow((-Fraction(a), 1), j))

    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls(())

    def __add__(self, other):
        other = _as_rf(other)
        return RationalFunction(padd(pmul(self.num, other.den), pmul(other.num, self.den)), pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(pscale(self.num, -1), self.den)

    def __sub__(self, other):
        return self + (-_as_rf(other))

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(pmul(self.num, other.num), pmul(self.den, other.den))
        return RationalFunction(pscale(self.num, Fraction(other)), self.den)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            try:
                other = _as_rf(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return not self.num

    def reflect(self) -> "RationalFunction":
        """sigma_C^* f = f(-t)."""
        return RationalFunction(pneg(self.num), pneg(self.den))

    def parity(self):
        """'even', 'odd', or None.  The zero function counts as both; 'odd' is returned."""
        r = self.reflect()
        if r == -self:
            return "odd"
        if r == self:
            return "even"
        return None

    def __call__(self, x):
        d = peval(self.den, x)
        if d == 0:
            raise ZeroDivisionError("pole at t = %s" % x)
        return peval(self.num, x) / d

    def __repr__(self):
        return "RationalFunction(%s)" % self

    def __str__(self):
        n = _pstr(self.num)
        if self.den == (1,):
            return n
        return "(%s)/(%s)" % (n, _pstr(self.den))


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalFunction((x,))
    raise TypeError("cannot treat %r as a rational function" % (x,))


def _pstr(p) -> str:
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if not c:
            continue
        mono = "" if i == 0 else "t" if i == 1 else "t^%d" % i
        coef = format_scalar(c)
        if mono and c == 1:
            parts.append(mono)
        elif mono and c == -1:
            parts.append("-" + mono)
        else:
            parts.append(coef + ("*" + mono if mono else ""))
    return " + ".join(parts).replace("+ -", "- ")


# -- points and local expansions ----------------------------------------------------


@dataclass(frozen=True)
class FiberPoint:
    """A point of C with its special coordinate.

    ``t0`` is None for t = inf.  ``sign`` is -1 for the companion point of an
    unramified fiber, whose coordinate is w' = -(t - t0) with t0 = -e*r.
    """

    t0: Fraction | None
    sign: int = 1

    @property
    def ramified(self) -> bool:
        return self.t0 is None or self.t0 == 0

    @property
    def label(self) -> str:
        return "inf" if self.t0 is None else format_scalar(self.t0)


INFINITY = FiberPoint(None)
ORIGIN = FiberPoint(Fraction(0))


def local_expansion(f: RationalFunction, p: FiberPoint, hi: int) -> dict:
    """Coefficients {j: f_j} of f = sum f_j y^j in the special uniformizer y at p, j <= hi."""
    if p.t0 is None:
        # t = 1/u: f = u^(dd - dn) * rev(num)(u) / rev(den)(u)
        num, den = tuple(reversed(f.num)), tuple(reversed(f.den))
        shift = len(f.den) - len(f.num)
    else:
        num = pcompose_affine(f.num, p.t0, p.sign)
        den = pcompose_affine(f.den, p.t0, p.sign)
        shift = 0
    if not num:
        return {}
    vn, vd = pvaluation(num), pvaluation(den)
    num, den = num[vn:], den[vd:]
    lead = shift + vn - vd
    # power series num/den up to y^(hi - lead)
    n = hi - lead
    out = {}
    if n < 0:
        return out
    q = [Fraction(0)] * (n + 1)
    inv = 1 / den[0]
    for i in range(n + 1):
        acc = num[i] if i < len(num) else Fraction(0)
        for k in range(1, min(i, len(den) - 1) + 1):
            acc -= den[k] * q[i - k]
        q[i] = acc * inv
        if q[i]:
            out[lead + i] = q[i]
    return out


def laurent_expand_at(f: RationalFunction, p: FiberPoint, hi) -> FracSeries:
    """Expansion of f at p with exponents <= hi.

    At a branch point the series is written in z = y^2, so exponents are in
    (1/2)Z; elsewhere it is in the special coordinate w itself.
    """
    hi = Fraction(hi)
    if p.ramified:
        coeffs = local_expansion(f, p, (2 * hi) // 1)
        return FracSeries({Fraction(j, 2): c for j, c in coeffs.items()}, 2, None, hi)
    coeffs = local_expansion(f, p, int(hi // 1))
    return FracSeries(coeffs, 1, None, hi)


def pole_order(f: RationalFunction, p: FiberPoint) -> int:
    """Order of the pole of f at p in the uniformizer of C (0 if regular)."""
    e = local_expansion(f, p, 0)
    return max([-j for j in e if j < 0], default=0)


# -- configurations -------------------------------------------------------------------


MODULE_KINDS = ("pi_sigma", "pi_lambda", "affine_vacuum", "affine_twisted")


@dataclass(frozen=True)
class MarkedPoint:
    """A marked point of X with its insertion."""

    s: Fraction | None  # None is s = inf
    module: str
    param: object = None  # charge lambda or level k
    point: int = 1  # chosen point e*r of an unramified fiber

    @property
    def branch(self) -> bool:
        return self.s is None or self.s == 0

    @property
    def root(self) -> Fraction:
        """r >= 0 with s = r^2; unramified points must be rational squares."""
        r = rational_root(self.s, 2)
        if r is None:
            raise ValueError("marked point s = %s is not the square of a rational" % format_scalar(self.s))
        return r

    def fiber(self) -> tuple:
        """Points of C over s, chosen point first."""
        if self.s is None:
            return (INFINITY,)
        if self.s == 0:
            return (ORIGIN,)
        r = self.root * self.point
        return (FiberPoint(r, 1), FiberPoint(-r, -1))

    @property
    def label(self) -> str:
        return "inf" if self.s is None else format_scalar(self.s)


@dataclass
class CoverConfig:
    """Marked points on X for the cover t -> t^2, plus cutoffs."""

    marked: list
    degree_cutoff: int = 3
    pole_bound: int = 7
    grading: str = "sugawara"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = [m.s for m in self.marked]
        if len(set(labels)) != len(labels):
            raise ValueError("marked points must be distinct")
        have = {m.s for m in self.marked if m.branch}
        if have != {Fraction(0), None}:
            raise ValueError("both branch points s = 0 and s = inf must carry insertions")
        for m in self.marked:
            twisted = m.module in ("pi_sigma", "affine_twisted")
            if m.branch and not twisted:
                raise ValueError("branch point s = %s needs a twisted module" % m.label)
            if not m.branch and twisted:
                raise ValueError("unramified point s = %s needs an untwisted module" % m.label)
            if not m.branch:
                m.root  # noqa: B018 (validates the square)
        families = {"heisenberg" if m.module.startswith("pi") else "affine" for m in self.marked}
        if len(families) > 1:
            raise ValueError("cannot mix Heisenberg and affine insertions")

    @property
    def family(self) -> str:
        return "heisenberg" if self.marked[0].module.startswith("pi") else "affine"

    def unramified(self) -> list:
        return [m for m in self.marked if not m.branch]

    def pole_points(self) -> list:
        """All points of C where generators may have poles."""
        return [p for m in self.marked for p in m.fiber()]

    def with_point(self, mp: MarkedPoint) -> "CoverConfig":
        return CoverConfig(self.marked + [mp], self.degree_cutoff, self.pole_bound, self.grading, dict(self.extra))

    # -- JSON ----------------------------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "CoverConfig":
        if not isinstance(doc, dict) or "marked" not in doc:
            raise ValueError("config: missing 'marked'")
        pts = []
        for i, item in enumerate(doc["marked"]):
            where = "config.marked[%d]" % i
            if "s" not in item or "module" not in item:
                raise ValueError("%s: needs 's' and 'module'" % where)
            s_txt = str(item["s"]).strip()
            s = None if s_txt in ("inf", "infinity", "oo") else Fraction(s_txt)
            mod = item["module"]
            param = None
            if isinstance(mod, dict):
                if len(mod) != 1:
                    raise ValueError("%s.module: expected one key" % where)
                (name, val), = mod.items()
                if name == "pi_lambda":
                    param = parse_scalar(val)
                elif name in ("affine_vacuum", "affine_twisted"):
                    if not isinstance(val, dict) or "k" not in val:
                        raise ValueError("%s.module.%s: needs 'k'" % (where, name))
                    param = Fraction(str(val["k"]))
                else:
                    raise ValueError("%s.module: unknown module %r" % (where, name))
                mod = name
            elif mod not in ("pi_sigma",):
                raise ValueError("%s.module: unknown module %r" % (where, mod))
            sign = {"+": 1, "-": -1}.get(str(item.get("point", "+")))
            if sign is None:
                raise ValueError("%s.point: expected '+' or '-'" % where)
            try:
                pts.append(MarkedPoint(s, mod, param, sign))
            except ValueError as exc:
                raise ValueError("%s: %s" % (where, exc)) from None
        known = {"marked", "degree_cutoff", "pole_bound", "grading"}
        extra = {k: v for k, v in doc.items() if k not in known}
        grading = doc.get("grading", "sugawara")
        if grading not in ("sugawara", "mode"):
            raise ValueError("config.grading: expected 'sugawara' or 'mode'")
        try:
            return cls(pts, int(doc.get("degree_cutoff", 3)), int(doc.get("pole_bound", 7)), grading, extra)
        except ValueError as exc:
            raise ValueError("config.marked: %s" % exc) from None

    @classmethod
    def from_json(cls, text: str) -> "CoverConfig":
        return cls.from_dict(json.loads(text))


def two_branch_config(module="pi_sigma", param=None, **kw) -> CoverConfig:
    return CoverConfig([MarkedPoint(Fraction(0), module, param), MarkedPoint(None, module, param)], **kw)


# -- function bases ------------------------------------------------------------------


def function_basis(cfg: CoverConfig, pole_bound: int, parity: str) -> list:
    """Basis of functions of the given parity with poles of order <= pole_bound
    confined to the marked fibers.

    Laurent monomials t^j (poles at 0 and inf) plus g(t) +- g(-t) for
    g = (t - r)^(-j) at every unramified fiber.
    """
    if pole_bound < 0:
        raise ValueError("pole bound must be nonnegative")
    want = 1 if parity == "odd" else 0
    out = [RationalFunction.monomial(1, j) for j in range(-pole_bound, pole_bound + 1) if j % 2 == want]
    sgn = -1 if parity == "odd" else 1
    for m in cfg.unramified():
        r = m.root
        for j in range(1, pole_bound + 1):
            g = RationalFunction.pole(r, j)
            out.append(g + sgn * g.reflect())
    return out


def odd_function_basis(cfg: CoverConfig, pole_bound: int) -> list:
    return function_basis(cfg, pole_bound, "odd")


def even_function_basis(cfg: CoverConfig, pole_bound: int) -> list:
    return function_basis(cfg, pole_bound, "even")


def partial_fractions(f: RationalFunction, finite_poles: Iterable) -> tuple[dict, dict]:
    """Split f into a Laurent polynomial in t and principal parts at the given
    nonzero points; raises if f has any other pole."""
    rest = f
    parts = {}
    for a in finite_poles:
        e = local_expansion(rest, FiberPoint(Fraction(a)), -1)
        if e:
            parts[Fraction(a)] = e
            for j, c in e.items():
                rest = rest - RationalFunction.pole(a, -j, c)
    den = rest.den
    if any(den[:-1]):
        raise ValueError("function has poles outside the allowed points: %s" % f)
    k = len(den) - 1
    return {i - k: c for i, c in enumerate(rest.num) if c}, parts


def allowed_poles(cfg: CoverConfig) -> list:
    return [p.t0 for m in cfg.unramified() for p in m.fiber()]


def in_function_space(f: RationalFunction, cfg: CoverConfig, parity: str | None = None) -> bool:
    """Regular outside the marked fibers (and of the given parity)."""
    if parity is not None and not f.is_zero() and f.parity() != parity:
        return False
    try:
        partial_fractions(f, allowed_poles(cfg))
    except ValueError:
        return False
    return True


def principal_part_solve(cfg: CoverConfig, p: FiberPoint, principal: FracSeries) -> RationalFunction:
    """Odd function with the given principal part (in the special coordinate) at
    an unramified point p, regular away from the fiber of p."""
    if p.ramified:
        raise ValueError("principal parts at branch points are not supported")
    g = RationalFunction.zero()
    for e, c in principal.terms.items():
        if e >= 0:
            raise ValueError("principal part has a nonnegative exponent %s" % e)
        if e.denominator != 1:
            raise ValueError("fractional exponent at an unramified point")
        # w = sign*(t - t0)  =>  w^e = sign^e (t - t0)^e
        g = g + RationalFunction.pole(p.t0, int(-e), c * p.sign ** int(-e))
    return g - g.reflect()
