"""Special coordinate changes Aut_N O and their actions.

A coordinate change rho(z^(1/N)) = sum c_n z^n, n in 1/N + Z, is stored as a
:class:`FracSeries` in z with denominator N.  Most computations happen in the
root variable t = z^(1/N), where rho is an ordinary power series with only
the exponents 1 + N*k present.

Conventions, fixed once here:

* exp(xi) for a vector field xi acts on functions by pullback along the time-1
  flow, so exp(xi) t is the coordinate change generated by xi.
* t^(Nk+1) d/dt acts on a twisted module as -N L_k, and R(exp xi) = exp(r(xi)).
* R reverses composition, R(f o g) = R(g) R(f), with (f o g)(t) = f(g(t)).
* The scaling t -> a t acts as a^(-N (L_0 - h)), where h is the weight of the
  highest-weight vector.  Dropping a^(-N h) only rescales R by a constant,
  which cancels in every conjugation below.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .heisenberg import (
    TWISTED,
    VACUUM_SECTOR,
    FockVector,
    Sector,
    SliceOperator,
    Witness,
    basis_upto,
    key_degree,
    slice_series_equal,
    vertex_mode,
    vertex_operator,
    virasoro,
)
from .scalars import binomial, is_zero, rational_power
from .series import FracSeries, IndeterminateError

# -- truncated polynomials in a root variable x, generic coefficients -------------


def _padd(a: Mapping, b: Mapping) -> dict:
    out = dict(a)
    for m, c in b.items():
        out[m] = out[m] + c if m in out else c
    return {m: c for m, c in out.items() if not is_zero(c)}


def _pscale(a: Mapping, c) -> dict:
    return {m: x * c for m, x in a.items() if not is_zero(x * c)}


def _pmul(a: Mapping, b: Mapping, cap: int) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j > cap:
                continue
            p = x * y
            out[i + j] = out[i + j] + p if i + j in out else p
    return {m: c for m, c in out.items() if not is_zero(c)}


def _pderiv(a: Mapping) -> dict:
    return {m - 1: c * m for m, c in a.items() if m != 0}


def _apply_field(b: Mapping, f: Mapping, cap: int) -> dict:
    """xi(f) for xi = sum_m b_m x^m d/dx."""
    return _pmul(b, _pderiv(f), cap)


def exp_flow(b: Mapping, cap: int, one=Fraction(1)) -> dict:
    """exp(xi) x up to x^cap, for xi = sum_{m>=2} b_m x^m d/dx.

    ``one`` is the unit of the coefficient ring (a scalar or a z-series).
    """
    if any(m < 2 for m in b):
        raise ValueError("only vector fields vanishing to second order exponentiate exactly")
    total = {1: one}
    term = {1: one}
    r = 0
    while term:
        r += 1
        term = _pscale(_apply_field(b, term, cap), Fraction(1, r))
        total = _padd(total, term)
    return total


def formal_log(u: Mapping, cap: int) -> dict:
    """The vector field xi with exp(xi) x = u(x) up to x^cap; u = x + O(x^2)."""
    one = u.get(1, 0)
    if any(m < 1 for m in u) or not _is_one(one):
        raise ValueError("formal log needs a unipotent series x + O(x^2)")
    target = {m: c for m, c in u.items() if m <= cap}
    b = {m: c for m, c in target.items() if m >= 2}
    for _ in range(cap + 1):
        diff = _padd(target, _pscale(exp_flow(b, cap, one), -1))
        if not diff:
            return b
        b = _padd(b, diff)
    raise RuntimeError("formal log did not converge")  # unreachable: error order rises each pass


def _is_one(c) -> bool:
    if isinstance(c, FracSeries):
        return c.terms == {Fraction(0): 1} and (c.lo is None or c.lo <= 0) and (c.hi is None or c.hi >= 0)
    return c == 1


def _pcompose(outer: Mapping, inner: Mapping, cap: int) -> dict:
    """outer(inner(x)) up to x^cap; inner has no constant term."""
    out: dict = {}
    power = {0: Fraction(1)}
    top = max(outer, default=0)
    for m in range(0, top + 1):
        if m > 0:
            power = _pmul(power, inner, cap)
        if m in outer:
            out = _padd(out, _pscale(power, outer[m]))
        if not power:
            break
    return out


# -- the group ------------------------------------------------------------------


@dataclass(frozen=True)
class CoordChange:
    """rho(z^(1/N)) with exponents in 1/N + Z; ``order`` bounds known exponents.

    ``order=None`` means the stored polynomial is the exact coordinate change.
    """

    terms: tuple  # ((root exponent m, coefficient), ...), m = 1 + N k
    N: int = 2
    order: Fraction | None = None

    def __post_init__(self):
        for m, c in self.terms:
            if m < 1 or (m - 1) % self.N:
                raise ValueError("exponent %s not in 1/N + Z_{>=0}" % Fraction(m, self.N))
        if is_zero(dict(self.terms).get(1, 0)):
            raise ValueError("leading coefficient c_(1/N) must be nonzero")

    @classmethod
    def from_root(cls, poly: Mapping, N: int = 2, order=None) -> "CoordChange":
        items = tuple(sorted((int(m), c) for m, c in poly.items() if not is_zero(c)))
        if order is not None:
            order = Fraction(order)
            items = tuple((m, c) for m, c in items if Fraction(m, N) <= order)
        return cls(items, N, order)

    @classmethod
    def from_coefficients(cls, coeffs, N: int = 2, order=None) -> "CoordChange":
        """``[1, 0, 1]`` means z^(1/N) + z^(2+1/N): exponents 1/N + k, k = 0, 1, ..."""
        return cls.from_root({1 + N * k: Fraction(c) for k, c in enumerate(coeffs)}, N, order)

    @classmethod
    def from_series(cls, s: FracSeries, N: int | None = None) -> "CoordChange":
        N = N or s.denom
        root = {}
        for e, c in s.terms.items():
            m = e * N
            if m.denominator != 1:
                raise ValueError("exponent %s incompatible with N=%d" % (e, N))
            root[int(m)] = c
        return cls.from_root(root, N, s.hi)

    @classmethod
    def identity(cls, N: int = 2) -> "CoordChange":
        return cls(((1, Fraction(1)),), N)

    @classmethod
    def scaling(cls, a, N: int = 2) -> "CoordChange":
        return cls(((1, a),), N)

    @property
    def root(self) -> dict:
        return dict(self.terms)

    @property
    def leading(self):
        return self.root[1]

    @property
    def root_cap(self) -> int | None:
        """Largest known exponent in the root variable."""
        return None if self.order is None else int((self.order * self.N).__floor__())

    def is_unipotent(self) -> bool:
        return self.leading == 1

    def series(self) -> FracSeries:
        return FracSeries({Fraction(m, self.N): c for m, c in self.terms}, self.N, None, self.order)

    def __call__(self, inner: "CoordChange") -> "CoordChange":
        return compose_changes(self, inner)

    def __str__(self):
        from .series import format_series

        return format_series(self.series())


def _joint_cap(*changes: CoordChange, extra: int | None = None) -> int | None:
    caps = [c.root_cap for c in changes if c.root_cap is not None]
    if extra is not None:
        caps.append(extra)
    return min(caps) if caps else None


def compose_changes(outer: CoordChange, inner: CoordChange, order=None) -> CoordChange:
    """(outer o inner)(t) = outer(inner(t))."""
    if outer.N != inner.N:
        raise ValueError("ramification orders differ")
    N = outer.N
    cap = _joint_cap(outer, inner, extra=None if order is None else int(Fraction(order) * N))
    if cap is None:
        cap = max(outer.root) * max(inner.root)
    out = _pcompose(outer.root, inner.root, cap)
    known = None if _joint_cap(outer, inner) is None and order is None else Fraction(cap, N)
    return CoordChange.from_root(out, N, known)


def invert_change(rho: CoordChange, order) -> CoordChange:
    """Compositional inverse by fixed-point reversion, known up to z^order."""
    N = rho.N
    cap = int((Fraction(order) * N).__floor__())
    if rho.root_cap is not None:
        cap = min(cap, rho.root_cap)
    a = rho.leading
    h = {m: c for m, c in rho.root.items() if m != 1}
    g = {1: 1 / Fraction(a) if not hasattr(a, "inverse") else a.inverse()}
    inv_a = g[1]
    for _ in range(cap + 1):
        new = _padd({1: inv_a}, _pscale(_pcompose(h, g, cap), -inv_a))
        if new == g:
            break
        g = new
    return CoordChange.from_root(g, N, Fraction(cap, N))


def mu_map(rho: CoordChange) -> CoordChange:
    """rho -> rho^N, an ordinary (N = 1) coordinate change in z."""
    N = rho.N
    cap = rho.root_cap
    poly = {0: Fraction(1)}
    full_cap = cap if cap is not None else max(rho.root) * N
    for _ in range(N):
        poly = _pmul(poly, rho.root, full_cap + N)
    # root exponent m = N j  <->  z^j ; known up to the first unknown term
    known = None if cap is None else Fraction(cap + N - 1, N)
    if known is not None:
        known = Fraction(known.__floor__())
    out = {m // N: c for m, c in poly.items() if m % N == 0}
    if any(m % N for m in poly):
        raise AssertionError("rho^N has fractional exponents")
    out = {j: c for j, c in out.items() if known is None or j <= known}
    return CoordChange.from_root(out, 1, known)


# -- Lie algebra ---------------------------------------------------------------------


@dataclass(frozen=True)
class DerElement:
    """v = -sum_k v_k z^(k+1/N) d/dz^(1/N), given by the finitely many v_k."""

    coeffs: tuple  # ((k, v_k), ...)
    N: int = 2

    @classmethod
    def of(cls, coeffs: Mapping, N: int = 2) -> "DerElement":
        return cls(tuple(sorted((int(k), Fraction(c)) for k, c in coeffs.items() if c)), N)

    @classmethod
    def generator(cls, k: int, N: int = 2) -> "DerElement":
        """z^(k+1/N) d/dz^(1/N) itself, i.e. v_k = -1."""
        return cls.of({k: -1}, N)

    def root_field(self) -> dict:
        """Coefficients b_m of xi = sum b_m t^m d/dt."""
        return {1 + self.N * k: -v for k, v in self.coeffs}

    def is_zero(self) -> bool:
        return not self.coeffs


def lie_algebra_iso(d: DerElement) -> FracSeries:
    """u(z) with v -> u(z) d/dz, u(z) = -N sum v_k z^(k+1)."""
    return FracSeries({Fraction(k + 1): -d.N * v for k, v in d.coeffs}, 1)


def exp_der(d: DerElement, order) -> CoordChange:
    """exp(v) t as a coordinate change, known up to z^order; needs v_0 = 0."""
    if any(k == 0 for k, _ in d.coeffs):
        raise ValueError("the scaling part v_0 does not exponentiate over Q")
    cap = int((Fraction(order) * d.N).__floor__())
    return CoordChange.from_root(exp_flow(d.root_field(), cap), d.N, Fraction(cap, d.N))


def module_lie_action(d: DerElement, v: FockVector) -> FockVector:
    """r(v) = N sum_k v_k L_k, the image of d acting on a module vector."""
    out = FockVector.zero(v.sector)
    for k, c in d.coeffs:
        out = out + virasoro(k, v) * (d.N * c)
    return out


# -- group actions on modules ----------------------------------------------------------


def _exp_nilpotent(step: Callable[[FockVector], FockVector], v: FockVector) -> FockVector:
    total, term, r = v, v, 0
    while term:
        r += 1
        term = step(term) * Fraction(1, r)
        total = total + term
    return total


def _grade_scale(v: FockVector, c, power: int) -> FockVector:
    """Multiply the shifted-degree-d part of v by c^(power * d)."""
    out = {}
    for m, x in v.terms.items():
        e = power * key_degree(m)
        out[m] = x * rational_power(c, e)
    return FockVector._raw(out, v.sector)


class CoordAction:
    """R(rho) on a module with ramification N (N = 1 gives R^V on pi)."""

    def __init__(self, rho: CoordChange):
        self.rho = rho
        self.N = rho.N
        a = rho.leading
        self.a = a
        inv = 1 / Fraction(a) if not hasattr(a, "inverse") else a.inverse()
        self.unipotent = {m: c * inv for m, c in rho.root.items()}
        self._log: dict = {}
        self._log_k = -1

    def _ensure(self, K: int):
        if K <= self._log_k:
            return
        cap = 1 + self.N * K
        if self.rho.root_cap is not None and cap > self.rho.root_cap:
            raise IndeterminateError(
                "insufficient window: rho known to z^%s, need z^%s" % (self.rho.order, Fraction(cap, self.N))
            )
        self._log = formal_log(self.unipotent, cap)
        self._log_k = K

    def lie_coefficients(self, K: int) -> dict:
        """x_k with r(log of the unipotent part) = sum_k x_k L_k, k <= K."""
        self._ensure(K)
        out = {}
        for m, b in self._log.items():
            k = (m - 1) // self.N
            if k <= K:
                out[k] = -self.N * b
        return out

    def _r(self, sign: int) -> Callable[[FockVector], FockVector]:
        def step(w: FockVector) -> FockVector:
            K = int(w.max_degree().__floor__())
            out = FockVector.zero(w.sector)
            for k, x in self.lie_coefficients(max(K, 1)).items():
                if 1 <= k <= K:
                    out = out + virasoro(k, w) * (sign * x)
            return out

        return step

    def apply(self, v: FockVector) -> FockVector:
        """R(rho) v = R(u) R(a t) v for rho = a u(t)."""
        w = _grade_scale(v, self.a, -self.N) if self.a != 1 else v
        return _exp_nilpotent(self._r(1), w)

    def apply_inverse(self, v: FockVector) -> FockVector:
        w = _exp_nilpotent(self._r(-1), v)
        return _grade_scale(w, self.a, self.N) if self.a != 1 else w


def act_on_module(rho: CoordChange, v: FockVector) -> FockVector:
    if v.sector.twisted != (rho.N == 2):
        raise ValueError("ramification N=%d does not match sector %s" % (rho.N, v.sector))
    return CoordAction(rho).apply(v)


def act_on_algebra(tau: CoordChange, A: FockVector) -> FockVector:
    if tau.N != 1:
        raise ValueError("R^V needs an ordinary (N = 1) coordinate change")
    return CoordAction(tau).apply(A)


# -- z-dependent changes tau_z --------------------------------------------------------


def bivariate_expansion(tau, hi=None) -> dict:
    """tau(z + x) - tau(z) = sum_m T_m(z) x^m, returned as {m: T_m}.

    ``tau`` is an ordinary coordinate change or any polynomial {j: c_j}.
    """
    if isinstance(tau, CoordChange):
        if tau.N != 1:
            raise ValueError("tau must be an ordinary coordinate change")
        poly, win = tau.root, tau.order
    else:
        poly, win = {int(j): c for j, c in tau.items()}, None
    out: dict = {}
    for j, c in poly.items():
        for m in range(1, j + 1):
            e = Fraction(j - m)
            out.setdefault(m, {})
            out[m][e] = out[m].get(e, 0) + c * binomial(j, m)
    res = {}
    for m, terms in sorted(out.items()):
        s = FracSeries(terms, 1, None, None if win is None else win - m)
        if hi is not None:
            s = s.truncate(hi=hi)
        res[m] = s
    return res


def algebra_inverse_action(tau: CoordChange, A: FockVector, hi) -> dict:
    """R^V(tau_z)^(-1) A as {state key: z-series}.

    tau_z = s o u_z with s the scaling by tau'(z), so
    R(tau_z)^(-1) = tau'(z)^(L_0) exp(-r(log u_z)).
    """
    if A.sector != VACUUM_SECTOR:
        raise ValueError("R^V acts on the vertex algebra pi")
    hi = Fraction(hi)
    T = bivariate_expansion(tau, hi)
    d1 = T[1]
    if d1.coefficient(0, 0) != 1:
        raise ValueError("tau'(0) must be 1 (unipotent)")
    inv_d1 = d1.power(-1, hi)
    K = int(A.max_degree().__floor__())
    u = {1: FracSeries({Fraction(0): Fraction(1)}, 1)}
    for m in range(2, K + 2):
        if m in T:
            u[m] = T[m] * inv_d1
    b = formal_log(u, K + 1) if K >= 1 else {}
    # -r(xi) = sum_k b_{k+1}(z) L_k on pi (N = 1)
    state = {m: FracSeries({Fraction(0): c}, 1) for m, c in A.terms.items()}
    total = dict(state)
    term = state
    r = 0
    while term:
        r += 1
        nxt: dict = {}
        for key, g in term.items():
            w = FockVector._raw({key: Fraction(1)}, VACUUM_SECTOR)
            for m, bm in b.items():
                k = m - 1
                if k < 1 or k > key_degree(key):
                    continue
                for key2, c in virasoro(k, w).terms.items():
                    piece = (g * bm).scale(c * Fraction(1, r))
                    nxt[key2] = nxt[key2] + piece if key2 in nxt else piece
        term = {k2: g for k2, g in nxt.items() if not g.is_zero()}
        for k2, g in term.items():
            total[k2] = total[k2] + g if k2 in total else g
    out = {}
    for key, g in total.items():
        d = int(key_degree(key))
        out[key] = g * d1.power(d, hi) if d else g
    return {k: g for k, g in out.items() if not g.is_zero()}


# -- fields in transformed coordinates ------------------------------------------------


class _PowerCache:
    def __init__(self, rho: CoordChange, hi):
        self.s = rho.series()
        self.hi = Fraction(hi)
        self.cache: dict = {}

    def __call__(self, m: int) -> FracSeries:
        if m not in self.cache:
            self.cache[m] = self.s.power(m, self.hi)
        return self.cache[m]


def _slice_mode(B: FockVector, n: Fraction, sector: Sector, basis) -> SliceOperator:
    images = {}
    for key in basis:
        img = vertex_mode(B, n, FockVector._raw({key: Fraction(1)}, sector))
        if img:
            images[key] = img
    return SliceOperator(images, sector)


def field_in_coordinate(B: FockVector, rho: CoordChange, sector: Sector, max_degree, hi, powers=None) -> FracSeries:
    """Y(B, rho(z^(1/N))) = sum_n B_(n) rho^(-N(n+1)) on a slice, up to z^hi."""
    N = rho.N
    hi = Fraction(hi)
    powers = powers or _PowerCache(rho, hi)
    basis = basis_upto(sector, max_degree)
    n = Fraction(max_degree) + B.max_degree() - 1
    n = Fraction(int((n * 2).__floor__()), 2)
    lowest = -hi - 1
    total = FracSeries.zero(N, None, hi)
    while n >= lowest:
        op = _slice_mode(B, n, sector, basis)
        if not op.is_zero():
            m = -N * (n + 1)
            if m.denominator != 1:
                raise ValueError("mode %s incompatible with N=%d" % (n, N))
            total = total + powers(int(m)).map(lambda c, op=op: op * c)
        n -= Fraction(1, 2)
    return total.truncate(hi=hi)


def _sector_for(N: int, sector: Sector | None) -> Sector:
    if sector is not None:
        return sector
    return TWISTED if N == 2 else VACUUM_SECTOR


def transformed_field(rho: CoordChange, A: FockVector, max_degree, hi, sector: Sector | None = None) -> FracSeries:
    """R(rho) Y(R^V((rho^N)_z)^(-1) A, rho(z^(1/N))) R(rho)^(-1) on a slice."""
    sector = _sector_for(rho.N, sector)
    tau = mu_map(rho)
    comps = algebra_inverse_action(tau, A, hi)
    powers = _PowerCache(rho, hi)
    total = FracSeries.zero(rho.N, None, hi)
    for key, g in comps.items():
        B = FockVector._raw({key: Fraction(1)}, VACUUM_SECTOR)
        total = total + field_in_coordinate(B, rho, sector, max_degree, hi, powers) * g.lift(rho.N)
    act = CoordAction(rho)
    basis = basis_upto(sector, max_degree)
    return total.map(lambda op: op.conjugate(act.apply, act.apply_inverse, basis))


def _compare(lhs: FracSeries, rhs: FracSeries, hi, what: str) -> Witness:
    win = lhs.hi if rhs.hi is None else rhs.hi if lhs.hi is None else min(lhs.hi, rhs.hi)
    if win is not None and win < Fraction(hi):
        raise IndeterminateError("insufficient window: %s known to z^%s < z^%s" % (what, win, hi))
    diff = slice_series_equal(lhs.truncate(hi=hi), rhs.truncate(hi=hi))
    checked = len(set(lhs.terms) | set(rhs.terms))
    if diff is None:
        return Witness(True, checked, what)
    e, v, d = diff
    return Witness(False, checked, "%s: coefficient of z^%s on %s" % (what, e, v), d)


def group_transform_check(rho: CoordChange, A: FockVector, max_degree, hi=6, sector: Sector | None = None) -> Witness:
    """R(rho) Y(R^V((rho^N)_z)^(-1) A, rho) R(rho)^(-1) = Y(A, z^(1/N)) on a slice."""
    sector = _sector_for(rho.N, sector)
    pad = Fraction(max_degree) + A.max_degree() + 2
    lhs = transformed_field(rho, A, max_degree, Fraction(hi) + pad, sector)
    rhs = vertex_operator(A, sector, max_degree, hi)
    return _compare(lhs, rhs, hi, "transformation formula")


def is_primary(A: FockVector) -> bool:
    if not A.is_homogeneous():
        return False
    D = A.max_degree()
    if virasoro(0, A) != A * D:
        return False
    return all(not virasoro(k, A) for k in range(1, int(D) + 2))


def primary_transform_check(rho: CoordChange, A: FockVector, max_degree, hi=6, sector: Sector | None = None) -> Witness:
    """R(rho) Y(A, rho(z^(1/N))) R(rho)^(-1) (d/dz rho^N)^Delta = Y(A, z^(1/N))."""
    if not is_primary(A):
        raise ValueError("state is not primary")
    sector = _sector_for(rho.N, sector)
    D = int(A.max_degree())
    hi_int = Fraction(hi) + Fraction(max_degree) + D + 2
    tau = mu_map(rho)
    dtau = tau.series().derivative()
    dtau = FracSeries(dtau.terms, 1, None, hi_int if tau.order is None else min(hi_int, dtau.hi))
    factor = dtau.power(D, hi_int).lift(rho.N)
    act = CoordAction(rho)
    basis = basis_upto(sector, max_degree)
    Y = field_in_coordinate(A, rho, sector, max_degree, hi_int)
    lhs = Y.map(lambda op: op.conjugate(act.apply, act.apply_inverse, basis)) * factor
    rhs = vertex_operator(A, sector, max_degree, hi)
    return _compare(lhs, rhs, hi, "primary transformation law")


def infinitesimal_transform_check(d: DerElement, A: FockVector, max_degree, hi=6, sector: Sector | None = None) -> Witness:
    """[r(v), Y(A, z)] = -sum_{m>=-1} (1/(m+1)!) u^(m+1)(z) Y(L_m A, z) on a slice."""
    sector = _sector_for(d.N, sector)
    hi = Fraction(hi)
    basis = basis_upto(sector, max_degree)
    Y = vertex_operator(A, sector, max_degree, hi)

    def r(v):
        return module_lie_action(d, v)

    lhs = Y.map(lambda op: SliceOperator({m: r(op(FockVector._raw({m: Fraction(1)}, sector))) for m in basis}, sector)
                - SliceOperator({m: op(r(FockVector._raw({m: Fraction(1)}, sector))) for m in basis}, sector))
    u = lie_algebra_iso(d)
    deg_A = int(A.max_degree())
    rhs = FracSeries.zero(d.N, None, hi)
    deriv = u
    fact = 1
    for m in range(-1, deg_A + 1):
        if m >= 0:
            fact *= m + 1
        LmA = virasoro(m, A)
        if LmA and not deriv.is_zero():
            Ym = vertex_operator(LmA, sector, max_degree, hi + 2)
            rhs = rhs + Ym * deriv.scale(Fraction(-1, fact)).lift(d.N)
        deriv = deriv.derivative()
    return _compare(lhs, rhs.truncate(hi=hi), hi, "infinitesimal transformation")


def s_sigma_conjugation_check(A: FockVector, max_degree, hi=6) -> Witness:
    """S_sigma^(-1) Y(sigma A) S_sigma = Y(A) on the twisted slice."""
    from .heisenberg import s_sigma, sigma

    basis = basis_upto(TWISTED, max_degree)
    lhs = vertex_operator(sigma(A), TWISTED, max_degree, hi).map(lambda op: op.conjugate(s_sigma, s_sigma, basis))
    rhs = vertex_operator(A, TWISTED, max_degree, hi)
    return _compare(lhs, rhs, hi, "S_sigma conjugation")
