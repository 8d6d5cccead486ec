"""Heisenberg vertex algebra pi, its modules pi^lam and the Z/2-twisted pi^sigma.

States are exact linear combinations of PBW monomials in negative modes.
Internally a monomial is a tuple of *doubled* mode indices (the mode n is
stored as the integer 2n) sorted in descending order, so
``b(-3/2)*b(-1/2)|0;tw>`` has key ``(-1, -3)``.  Use
:meth:`FockVector.monomials` to read modes back as fractions.

Vertex operators are evaluated mode by mode.  Untwisted fields are Wick
products of derivatives of b(z); twisted fields apply exp(Delta_z) to the
state first and then Wick order the twisted field b(z^(1/2)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from gmpy2 import mpq

from .scalars import binomial, format_scalar, is_zero, parse_scalar
from .series import FracSeries, delta_coefficients

HALF = Fraction(1, 2)
ONE = mpq(1)


class Sector:
    """Untwisted(lam) or Twisted; fixes which mode indices are allowed."""

    __slots__ = ("twisted", "lam", "_hash")

    def __init__(self, twisted: bool = False, lam=Fraction(0)):
        self.twisted = bool(twisted)
        self.lam = Fraction(0) if twisted else (parse_scalar(lam) if isinstance(lam, (str, int)) else lam)
        self._hash = hash((self.twisted, self.lam))

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Sector) and self.twisted == other.twisted and self.lam == other.lam

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Sector(%s)" % self

    @property
    def denom(self) -> int:
        return 2 if self.twisted else 1

    def admits(self, n) -> bool:
        n2 = Fraction(n) * 2
        return n2.denominator == 1 and (n2.numerator % 2 == 1) == self.twisted

    def top_weight(self):
        """L_0 eigenvalue of the highest-weight vector."""
        return Fraction(1, 16) if self.twisted else self.lam * self.lam / 2

    def __str__(self):
        return "tw" if self.twisted else "lam=%s" % format_scalar(self.lam)


def untwisted(lam=0) -> Sector:
    return Sector(False, lam)


VACUUM_SECTOR = Sector(False, Fraction(0))
TWISTED = Sector(True)


def to_key(modes: Iterable) -> tuple:
    out = []
    for x in modes:
        x2 = Fraction(x) * 2
        if x2.denominator != 1:
            raise ValueError("mode %s is not in (1/2)Z" % x)
        out.append(x2.numerator)
    return tuple(sorted(out, reverse=True))


def from_key(key: tuple) -> tuple:
    return tuple(Fraction(x, 2) for x in key)


def key_degree(key: tuple) -> Fraction:
    return Fraction(-sum(key), 2)


def _insert(key: tuple, n2: int) -> tuple:
    for i, x in enumerate(key):
        if n2 >= x:
            return key[:i] + (n2,) + key[i:]
    return key + (n2,)


def _remove_one(key: tuple, n2: int) -> tuple:
    i = key.index(n2)
    return key[:i] + key[i + 1 :]


def _accumulate(out: dict, pairs, c, ins=None):
    for m, x in pairs:
        if ins is not None:
            m = _insert(m, ins)
        x = c * x
        if m in out:
            out[m] = out[m] + x
        else:
            out[m] = x


class FockVector:
    """Finite linear combination of monomials over one highest-weight vector."""

    __slots__ = ("terms", "sector")

    def __init__(self, terms: Mapping | None = None, sector: Sector = VACUUM_SECTOR):
        """``terms`` maps tuples of (fractional) mode indices to coefficients."""
        self.sector = sector
        self.terms = {}
        for modes, c in (terms or {}).items():
            key = to_key(modes)
            if any(x >= 0 or not sector.admits(Fraction(x, 2)) for x in key):
                raise ValueError("modes %s not allowed in sector %s" % (from_key(key), sector))
            if not is_zero(c):
                self.terms[key] = self.terms[key] + c if key in self.terms else c
                if is_zero(self.terms[key]):
                    del self.terms[key]

    @classmethod
    def _raw(cls, terms: dict, sector: Sector) -> "FockVector":
        v = cls.__new__(cls)
        v.terms = {m: c for m, c in terms.items() if not is_zero(c)}
        v.sector = sector
        return v

    @classmethod
    def vacuum(cls, sector: Sector = VACUUM_SECTOR) -> "FockVector":
        return cls._raw({(): ONE}, sector)

    @classmethod
    def zero(cls, sector: Sector = VACUUM_SECTOR) -> "FockVector":
        return cls._raw({}, sector)

    @classmethod
    def monomial(cls, modes: Iterable, sector: Sector = VACUUM_SECTOR, coef=Fraction(1)) -> "FockVector":
        return cls({tuple(modes): coef}, sector)

    def monomials(self) -> Iterator[tuple]:
        """Yield (modes as Fractions, coefficient)."""
        for k, c in self.terms.items():
            yield from_key(k), c

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, FockVector):
            return NotImplemented
        if other.sector != self.sector:
            raise ValueError("sector mismatch: %s vs %s" % (self.sector, other.sector))
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return FockVector._raw(out, self.sector)

    __radd__ = __add__

    def __neg__(self):
        return FockVector._raw({m: -c for m, c in self.terms.items()}, self.sector)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, FockVector):
            return NotImplemented
        return FockVector._raw({m: c * x for m, x in self.terms.items()}, self.sector)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.sector == other.sector and (self - other).is_zero()

    __hash__ = None

    def degrees(self) -> set:
        return {key_degree(m) for m in self.terms}

    def max_degree(self) -> Fraction:
        return max(self.degrees(), default=Fraction(0))

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def component(self, degree) -> "FockVector":
        degree = Fraction(degree)
        return FockVector._raw({m: c for m, c in self.terms.items() if key_degree(m) == degree}, self.sector)

    def parity(self) -> int | None:
        """Exponent of the sigma-eigenvalue: 0 for even, 1 for odd, None if mixed."""
        ps = {len(m) % 2 for m in self.terms}
        return ps.pop() if len(ps) == 1 else (0 if not ps else None)

    def coefficient(self, modes) -> object:
        return self.terms.get(to_key(modes), Fraction(0))

    def __repr__(self):
        return "FockVector(%r)" % format_fock(self)

    def __str__(self):
        return format_fock(self)


# -- bases --------------------------------------------------------------------


def _partitions(total: int, max_part: int, parts: tuple) -> Iterator[tuple]:
    """Partitions of total into allowed parts <= max_part, non-increasing."""
    if total == 0:
        yield ()
        return
    for p in parts:
        if p <= max_part and p <= total:
            for rest in _partitions(total - p, p, parts):
                yield (p,) + rest


@lru_cache(maxsize=None)
def basis_keys(sector: Sector, degree) -> tuple:
    """All monomial keys of the given degree, in a fixed deterministic order."""
    d2 = Fraction(degree) * 2
    if d2 < 0 or d2.denominator != 1:
        return ()
    d2 = int(d2)
    parts = tuple(p for p in range(d2, 0, -1) if (p % 2 == 1) == sector.twisted)
    return tuple(tuple(sorted((-p for p in part), reverse=True)) for part in _partitions(d2, d2, parts))


def degree_grid(sector: Sector, max_degree) -> list:
    step = HALF if sector.twisted else Fraction(1)
    out, d = [], Fraction(0)
    while d <= Fraction(max_degree):
        out.append(d)
        d += step
    return out


def basis_upto(sector: Sector, max_degree) -> list:
    return [m for d in degree_grid(sector, max_degree) for m in basis_keys(sector, d)]


def basis_vectors(sector: Sector, max_degree) -> list:
    return [FockVector._raw({m: ONE}, sector) for m in basis_upto(sector, max_degree)]


def basis_dimension(sector: Sector, degree) -> int:
    return len(basis_keys(sector, degree))


# -- Heisenberg modes ---------------------------------------------------------


def _mode_on_key(n2: int, key: tuple, sector: Sector) -> tuple:
    if n2 < 0:
        return ((_insert(key, n2), ONE),)
    if n2 == 0:
        return ((key, sector.lam),)
    k = key.count(-n2)
    if not k:
        return ()
    return ((_remove_one(key, -n2), mpq(n2 * k, 2)),)


def apply_mode(n, v: FockVector) -> FockVector:
    """Act by the Heisenberg generator b_n (twisted) or b~_n (untwisted)."""
    n = Fraction(n)
    if not v.sector.admits(n):
        raise ValueError("mode %s not admissible in sector %s" % (n, v.sector))
    n2 = int(n * 2)
    out: dict = {}
    for m, c in v.terms.items():
        _accumulate(out, _mode_on_key(n2, m, v.sector), c)
    return FockVector._raw(out, v.sector)


def apply_modes(word: Iterable, v: FockVector) -> FockVector:
    """Apply b_{n_1} ... b_{n_k} (rightmost first)."""
    for n in reversed(list(word)):
        v = apply_mode(n, v)
    return v


# -- Wick products of derivative fields ---------------------------------------


@lru_cache(maxsize=None)
def _factor_coefficient(n2: int, j: int) -> Fraction:
    """binom(-n-1, j): the weight of b_n inside d^j b(z)/j!."""
    return mpq(binomial(Fraction(-n2 - 2, 2), j))


@lru_cache(maxsize=None)
def wick_mode(derivs: tuple, mode2: int, key: tuple, sector: Sector) -> tuple:
    """Coefficient of z^(-n-1), n = mode2/2, in :d^(j1)b/j1! ... d^(jk)b/jk!: on a monomial.

    b is b~(z) on untwisted sectors and b(z^(1/2)) on the twisted sector.  The
    first factor is peeled off: its creation modes stand to the left of the
    remaining Wick product, its annihilation modes to the right.  Returns
    (key, coefficient) pairs.
    """
    if not derivs:
        return ((key, ONE),) if mode2 == -2 else ()
    weight2 = 2 * (sum(derivs) + len(derivs))
    # output degree deg(v) + weight - n - 1 must be >= 0
    if -sum(key) + weight2 - mode2 - 2 < 0:
        return ()
    j, rest = derivs[0], derivs[1:]
    rest2 = 2 * (sum(rest) + len(rest))
    out: dict = {}
    seen = set()
    for p in key:
        if p in seen:
            continue
        seen.add(p)
        n2 = -p
        c = _factor_coefficient(n2, j) * mpq(n2 * key.count(p), 2)
        if c:
            _accumulate(out, wick_mode(rest, mode2 - n2 - 2 * j - 2, _remove_one(key, p), sector), c)
    if not sector.twisted and not is_zero(sector.lam):
        c = _factor_coefficient(0, j) * sector.lam
        _accumulate(out, wick_mode(rest, mode2 - 2 * j - 2, key, sector), c)
    top2 = -sum(key) + rest2 - 2
    n2 = -1 if sector.twisted else -2
    while mode2 - n2 - 2 * j - 2 <= top2:
        c = _factor_coefficient(n2, j)
        if c:
            _accumulate(out, wick_mode(rest, mode2 - n2 - 2 * j - 2, key, sector), c, ins=n2)
        n2 -= 2
    return tuple((m, c) for m, c in out.items() if not is_zero(c))


def _derivs_of(key: tuple) -> tuple:
    """Derivative orders j_i = -n_i - 1 for a state b~_{n_1}...b~_{n_k}|0>."""
    return tuple(sorted((-x - 2) // 2 for x in key))


# -- exp(Delta_z) -------------------------------------------------------------

_DELTA_CACHE: dict = {}


def _delta_table(order: int) -> dict:
    if order not in _DELTA_CACHE:
        _DELTA_CACHE[order] = {mn: mpq(c) for mn, c in delta_coefficients(order).items()}
    return _DELTA_CACHE[order]


def _delta_once(v: FockVector) -> dict:
    """Delta_z v as {k: vector} meaning sum_k z^(-k) * vector."""
    d = int(v.max_degree())
    if d < 2:
        return {}
    out: dict = {}
    for (m, n), cmn in _delta_table(d).items():
        if m == 0 or n == 0 or m + n > d:
            continue  # b~_0 vanishes on pi
        w = apply_mode(m, apply_mode(n, v)) * cmn
        if w:
            out[m + n] = out[m + n] + w if (m + n) in out else w
    return out


def delta_operator(v: FockVector) -> FracSeries:
    """exp(Delta_z) v as a series in z with FockVector coefficients.

    Delta_z lowers degree by at least two, so the exponential terminates.
    """
    if v.sector != VACUUM_SECTOR:
        raise ValueError("Delta_z acts on the vertex algebra pi only")
    result: dict = {Fraction(0): v}
    layer = {0: v}
    r = 0
    while layer:
        r += 1
        nxt: dict = {}
        for k, w in layer.items():
            for k2, w2 in _delta_once(w).items():
                kk = k + k2
                nxt[kk] = nxt[kk] + w2 if kk in nxt else w2
        layer = {k: w for k, w in nxt.items() if w}
        for k, w in layer.items():
            term = w * Fraction(1, _factorial(r))
            e = Fraction(-k)
            result[e] = result[e] + term if e in result else term
    return FracSeries(result, 1)


def _factorial(r: int) -> int:
    out = 1
    for i in range(2, r + 1):
        out *= i
    return out


@lru_cache(maxsize=None)
def _exp_delta_key(key: tuple) -> tuple:
    s = delta_operator(FockVector._raw({key: Fraction(1)}, VACUUM_SECTOR))
    return tuple((int(-e), tuple(w.terms.items())) for e, w in s.terms.items())


# -- vertex operator modes ----------------------------------------------------


def _mode_key(a_key: tuple, n2: int, v_key: tuple, sector: Sector) -> tuple:
    """A_(n) v for a monomial state A of pi and a basis monomial v."""
    if not sector.twisted:
        return wick_mode(_derivs_of(a_key), n2, v_key, sector)
    out: dict = {}
    for k, wterms in _exp_delta_key(a_key):
        for w_key, wc in wterms:
            _accumulate(out, wick_mode(_derivs_of(w_key), n2 - 2 * k, v_key, sector), wc)
    return tuple((m, c) for m, c in out.items() if not is_zero(c))


def _half_units(n) -> int:
    if isinstance(n, int):
        return 2 * n
    num, den = n.numerator, n.denominator
    if den == 1:
        return 2 * num
    if den != 2:
        raise ValueError("mode %s is not in (1/2)Z" % n)
    return num


_SECTOR_MEMO: dict = {}


def _mode_terms(a_terms: dict, n2: int, v_terms: dict, sector: Sector) -> dict:
    memo = _SECTOR_MEMO.get(sector)
    if memo is None:
        memo = _SECTOR_MEMO[sector] = {}
    out: dict = {}
    for am, ac in a_terms.items():
        for vm, vc in v_terms.items():
            pairs = memo.get((am, n2, vm))
            if pairs is None:
                pairs = memo[(am, n2, vm)] = _mode_key(am, n2, vm, sector)
            c = ac * vc
            for m, x in pairs:
                x = c * x
                if m in out:
                    out[m] = out[m] + x
                else:
                    out[m] = x
    return {m: c for m, c in out.items() if c}


def vertex_mode(A: FockVector, n, v: FockVector) -> FockVector:
    """A_(n) v: the coefficient of z^(-n-1) in Y(A, z) v on v's module.

    On untwisted sectors this is Y^{pi^lam}; on the twisted sector it is the
    full twisted field W(exp(Delta_z) A, z).
    """
    if A.sector != VACUUM_SECTOR:
        raise ValueError("vertex operators are indexed by states of pi")
    return FockVector._raw(_mode_terms(A.terms, _half_units(n), v.terms, v.sector), v.sector)


def wick_field_mode(A_modes: Iterable, n, v: FockVector) -> FockVector:
    """W(A, z)_(n) v without the exp(Delta_z) correction."""
    key = to_key(A_modes)
    if any(x >= 0 for x in key):
        raise ValueError("W is defined on monomials of negative modes only")
    if any(x % 2 for x in key):
        raise ValueError("W takes a state of pi (integer modes)")
    n2 = _half_units(n)
    out: dict = {}
    for vm, vc in v.terms.items():
        _accumulate(out, wick_mode(_derivs_of(key), n2, vm, v.sector), vc)
    return FockVector._raw(out, v.sector)


def omega() -> FockVector:
    """Conformal vector (1/2) b~_{-1}^2 |0>."""
    return FockVector._raw({(-2, -2): HALF}, VACUUM_SECTOR)


def virasoro(n, v: FockVector) -> FockVector:
    """L_n v = omega_(n+1) v on whatever sector v lives in."""
    return vertex_mode(omega(), Fraction(n) + 1, v)


def virasoro_mode(n: int, sector: Sector) -> Callable[[FockVector], FockVector]:
    """L_n on the given sector, as a linear map."""

    def L(v: FockVector) -> FockVector:
        if v.sector != sector:
            raise ValueError("vector sector %s != %s" % (v.sector, sector))
        return virasoro(n, v)

    return L


def translation(A: FockVector) -> FockVector:
    """T = L_{-1} on pi."""
    return virasoro(-1, A)


def sigma(A: FockVector) -> FockVector:
    """The involution b~_n -> -b~_n on pi (and on any untwisted sector)."""
    return FockVector._raw({m: (c if len(m) % 2 == 0 else -c) for m, c in A.terms.items()}, A.sector)


def s_sigma(v: FockVector) -> FockVector:
    """S_sigma on pi^sigma: (-1)^(2(L_0 - 1/16)) = (-1)^(2 * degree)."""
    if not v.sector.twisted:
        raise ValueError("S_sigma acts on the twisted module")
    return FockVector._raw({m: (c if sum(m) % 2 == 0 else -c) for m, c in v.terms.items()}, v.sector)


# -- field slices ---------------------------------------------------------------


class SliceOperator:
    """A linear map given by its images of the basis monomials of a slice."""

    __slots__ = ("images", "sector")

    def __init__(self, images: Mapping, sector: Sector):
        self.images = {m: v for m, v in images.items() if v}
        self.sector = sector

    def __call__(self, v: FockVector) -> FockVector:
        out: dict = {}
        for m, c in v.terms.items():
            img = self.images.get(m)
            if img is not None:
                _accumulate(out, img.terms.items(), c)
        return FockVector._raw(out, v.sector)

    def is_zero(self) -> bool:
        return not self.images

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        out = dict(self.images)
        for m, v in other.images.items():
            out[m] = out[m] + v if m in out else v
        return SliceOperator(out, self.sector)

    __radd__ = __add__

    def __neg__(self):
        return SliceOperator({m: -v for m, v in self.images.items()}, self.sector)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, SliceOperator):
            return NotImplemented
        return SliceOperator({m: v * c for m, v in self.images.items()}, self.sector)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, SliceOperator):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def conjugate(self, left: Callable, right: Callable, basis: Iterable) -> "SliceOperator":
        """The operator v -> left(X(right(v))) on the given basis keys.

        ``right`` must preserve degree so that right(v) stays inside the slice.
        """
        images = {}
        for m in basis:
            w = right(FockVector._raw({m: Fraction(1)}, self.sector))
            if any(k not in self.images and key_degree(k) > key_degree(m) for k in w.terms):
                raise ValueError("conjugating map leaves the slice")
            images[m] = left(self(w))
        return SliceOperator(images, self.sector)

    def first_difference(self, other: "SliceOperator"):
        d = self - other
        for m in sorted(d.images, key=lambda m: (key_degree(m), m)):
            return FockVector._raw({m: Fraction(1)}, self.sector), d.images[m]
        return None

    def __repr__(self):
        return "SliceOperator(%d images)" % len(self.images)


def _lattice_floor(e: Fraction, twisted: bool) -> Fraction:
    if twisted:
        return Fraction(int((e * 2).__floor__()), 2)
    return Fraction(e.__floor__())


def field_slice(
    mode_fn: Callable[[Fraction, FockVector], FockVector],
    sector: Sector,
    max_degree,
    state_degree,
    hi,
) -> FracSeries:
    """Operator-valued series sum_n X_(n) z^(-n-1) restricted to a slice.

    Coefficients below z^(-(max_degree+state_degree)) vanish on the slice, so
    the window is open below and capped at ``hi`` above.
    """
    basis = basis_upto(sector, max_degree)
    step = HALF if sector.twisted else Fraction(1)
    e = _lattice_floor(-(Fraction(max_degree) + Fraction(state_degree)), sector.twisted)
    terms = {}
    hi = Fraction(hi)
    while e <= hi:
        n = -e - 1
        images = {}
        for m in basis:
            img = mode_fn(n, FockVector._raw({m: ONE}, sector))
            if img:
                images[m] = img
        if images:
            terms[e] = SliceOperator(images, sector)
        e += step
    return FracSeries(terms, sector.denom, None, hi)


def vertex_operator(A: FockVector, sector: Sector, max_degree, hi) -> FracSeries:
    """Y(A, z) on a module slice as a :class:`FracSeries` of slice operators."""
    return field_slice(lambda n, v: vertex_mode(A, n, v), sector, max_degree, A.max_degree(), hi)


def untwisted_vertex_operator(A: FockVector, max_degree, hi, lam=Fraction(0)) -> FracSeries:
    return vertex_operator(A, Sector(False, lam), max_degree, hi)


def twisted_vertex_operator(A: FockVector, max_degree, hi) -> FracSeries:
    return vertex_operator(A, TWISTED, max_degree, hi)


def normal_ordered_w(A_modes: Iterable, max_degree, hi, sector: Sector = TWISTED) -> FracSeries:
    A_modes = tuple(A_modes)
    return field_slice(
        lambda n, v: wick_field_mode(A_modes, n, v), sector, max_degree, -sum(A_modes, Fraction(0)), hi
    )


def slice_series_equal(a: FracSeries, b: FracSeries):
    """Compare operator-valued series on their common window.

    Returns None when equal, else (exponent, basis vector, difference).
    """
    lo = a.lo if b.lo is None else b.lo if a.lo is None else max(a.lo, b.lo)
    hi = a.hi if b.hi is None else b.hi if a.hi is None else min(a.hi, b.hi)
    exps = set(a.terms) | set(b.terms)
    for e in sorted(exps):
        if (lo is not None and e < lo) or (hi is not None and e > hi):
            continue
        x, y = a.terms.get(e, 0), b.terms.get(e, 0)
        if x == 0 and y == 0:
            continue
        if x == 0:
            x = SliceOperator({}, y.sector)
        if y == 0:
            y = SliceOperator({}, x.sector)
        diff = x.first_difference(y)
        if diff is not None:
            return e, diff[0], diff[1]
    return None


# -- witnesses ---------------------------------------------------------------------


@dataclass
class Witness:
    """Outcome of an identity check on a finite slice."""

    ok: bool
    checked: int = 0
    detail: str = ""
    discrepancy: object = None

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "detail": self.detail,
            "discrepancy": None if self.discrepancy is None else str(self.discrepancy),
        }


def mode_admissible(A: FockVector, n, sector: Sector) -> bool:
    """Twisted modes of a sigma-eigenvector live in (parity/2) + Z."""
    n = Fraction(n)
    if not sector.twisted:
        return n.denominator == 1
    p = A.parity()
    if p is None:
        raise ValueError("state %s is not a sigma-eigenvector" % format_fock(A))
    return (n - Fraction(p, 2)).denominator == 1


def commutator_check(A: FockVector, B: FockVector, m, k, max_degree, sector: Sector = TWISTED) -> Witness:
    """[A_(m), B_(k)] = sum_n binom(m, n) (A_(n) B)_(m+k-n) on a basis slice."""
    m, k = Fraction(m), Fraction(k)
    for X, x in ((A, m), (B, k)):
        if not mode_admissible(X, x, sector):
            raise ValueError("mode %s of %s is not admissible on %s" % (x, format_fock(X), sector))
    da, db = A.max_degree(), B.max_degree()
    rhs_states = []
    n = 0
    while n <= da + db:
        ab = vertex_mode(A, n, B)
        if ab:
            rhs_states.append((mpq(binomial(m, n)), ab, m + k - n))
        n += 1
    m2, k2 = _half_units(m), _half_units(k)
    rhs_states = [(c, state.terms, _half_units(mode)) for c, state, mode in rhs_states]
    checked = 0
    for key in basis_upto(sector, max_degree):
        v = {key: ONE}
        diff = _mode_terms(A.terms, m2, _mode_terms(B.terms, k2, v, sector), sector)
        _accumulate(diff, _mode_terms(B.terms, k2, _mode_terms(A.terms, m2, v, sector), sector).items(), -ONE)
        for c, st, j2 in rhs_states:
            _accumulate(diff, _mode_terms(st, j2, v, sector).items(), -c)
        checked += 1
        if any(diff.values()):
            bad = FockVector._raw(diff, sector)
            return Witness(False, checked, "basis vector %s" % format_monomial(key, sector), bad)
    return Witness(True, checked)


def _mode_window(A: FockVector, max_degree, twisted: bool, parity: int) -> list:
    """Modes n (of the given parity class) for which A_(n) can be nonzero on the slice."""
    top = Fraction(A.max_degree() + Fraction(max_degree))
    shift = Fraction(parity, 2) if twisted else Fraction(0)
    lo = -int(top) - 2
    return [n + shift for n in range(lo, int(top) + 1)]


def ta_lemma_check(A: FockVector, max_degree, sector: Sector = TWISTED) -> Witness:
    """Y(TA, z) = d/dz Y(A, z), i.e. (TA)_(n) = -n A_(n-1), on a basis slice."""
    TA = translation(A)
    p = A.parity() if sector.twisted else 0
    if p is None:
        raise ValueError("state %s is not a sigma-eigenvector" % format_fock(A))
    checked = 0
    for n in _mode_window(A, max_degree + 1, sector.twisted, p):
        n2 = _half_units(n)
        m2 = _half_units(n - 1)
        c = mpq(-n2, 2)
        for key in basis_upto(sector, max_degree):
            v = {key: ONE}
            diff = _mode_terms(TA.terms, n2, v, sector)
            _accumulate(diff, _mode_terms(A.terms, m2, v, sector).items(), -c)
            checked += 1
            if any(diff.values()):
                return Witness(False, checked, "n=%s on %s" % (n, format_monomial(key, sector)), FockVector._raw(diff, sector))
    return Witness(True, checked)


def mode_support_check(A: FockVector, max_degree) -> Witness:
    """For sigma(A) = (-1)^p A every twisted mode outside p/2 + Z vanishes."""
    p = A.parity()
    if p is None:
        raise ValueError("state %s is not a sigma-eigenvector" % format_fock(A))
    checked = 0
    for n in _mode_window(A, max_degree, True, 1 - p):
        n2 = _half_units(n)
        for key in basis_upto(TWISTED, max_degree):
            out = _mode_terms(A.terms, n2, {key: ONE}, TWISTED)
            checked += 1
            if out:
                return Witness(False, checked, "n=%s on %s" % (n, format_monomial(key, TWISTED)), FockVector._raw(out, TWISTED))
    return Witness(True, checked)


# -- text format ---------------------------------------------------------------------

_KET_RE = re.compile(r"\|\s*(0\s*;\s*tw|0|lam\s*=\s*[^>]+)\s*>")
_FACTOR_RE = re.compile(r"b\(\s*([-+]?\d+(?:/\d+)?)\s*\)(?:\^(\d+))?")


def format_monomial(key: tuple, sector: Sector) -> str:
    parts = []
    for x in sorted(set(key)):
        e = key.count(x)
        parts.append("b(%s)%s" % (format_scalar(Fraction(x, 2)), "^%d" % e if e > 1 else ""))
    if sector.twisted:
        ket = "|0;tw>"
    elif is_zero(sector.lam):
        ket = "|0>"
    else:
        ket = "|lam=%s>" % format_scalar(sector.lam)
    return "*".join(parts) + ket


def format_fock(v: FockVector) -> str:
    if not v.terms:
        return "0"
    out = []
    for m in sorted(v.terms, key=lambda m: (key_degree(m), m)):
        body = format_monomial(m, v.sector)
        cs = format_scalar(v.terms[m])
        if "+" in cs[1:] or "-" in cs[1:]:
            cs = "(%s)" % cs
        out.append(body if cs == "1" else "-" + body if cs == "-1" else "%s*%s" % (cs, body))
    return " + ".join(out).replace("+ -", "- ")


def parse_fock(text: str) -> FockVector:
    """Parse e.g. ``b(-3/2)*b(-1/2)|0;tw>`` or ``1/2*b(-1)^2|0> - b(-2)|0>``."""
    terms = re.split(r"(?<=>)\s*(?=[-+])", text.strip())
    total = None
    for t in terms:
        t = t.strip()
        km = _KET_RE.search(t)
        if not km:
            raise ValueError("missing ket in %r" % t)
        ket = re.sub(r"\s+", "", km.group(1))
        if ket == "0;tw":
            sector = TWISTED
        elif ket == "0":
            sector = VACUUM_SECTOR
        else:
            sector = Sector(False, parse_scalar(ket.split("=", 1)[1]))
        body = t[: km.start()].strip()
        first = _FACTOR_RE.search(body)
        coef_s = (body[: first.start()] if first else body).strip().rstrip("*").strip()
        sign = Fraction(1)
        if coef_s.startswith(("+", "-")) and not coef_s[1:].strip()[:1].isdigit() or coef_s in ("+", "-"):
            sign = Fraction(-1) if coef_s.startswith("-") else Fraction(1)
            coef_s = coef_s[1:].strip()
        coef_s = coef_s.strip("()")
        coef = sign * (parse_scalar(coef_s.lstrip("+")) if coef_s else Fraction(1))
        modes = []
        for fm in _FACTOR_RE.finditer(body):
            modes += [Fraction(fm.group(1))] * int(fm.group(2) or 1)
        v = FockVector({tuple(modes): coef}, sector)
        total = v if total is None else total + v
    return total
