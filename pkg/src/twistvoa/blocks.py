"""Heisenberg insertions on the double cover and their coinvariants.

An odd function f on C acts on F = (x) M_{x_i} by summing, over every marked
fiber and every point p in it, the residue Res_p f * varpi_i of the weight-one
primary one-form.  In the special coordinates of :mod:`twistvoa.curve`

* at a branch point, varpi = 2 y b(y) dy with b(z^{1/2}) = sum b_n z^{-n-1}, so
  f = sum f_j y^j contributes 2 sum f_{2n} b_n;
* at the chosen point of an unramified fiber, varpi = b~(w) dw, so f contributes
  sum f_n b~_n; the companion point carries Y(sigma A), hence -sum f'_n b~_n.

Coinvariant dimensions are reported per degree for the filtration by total
degree: a degree-descending echelon of the images f.v is built and the
non-pivot basis vectors of F_{<=D} are counted degree by degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .curve import (
    CoverConfig,
    FiberPoint,
    MarkedPoint,
    RationalFunction,
    even_function_basis,
    local_expansion,
    odd_function_basis,
    pole_order,
)
from .heisenberg import (
    ONE,
    TWISTED,
    Sector,
    Witness,
    _mode_on_key,
    basis_upto,
    format_monomial,
    key_degree,
)
from .linalg import Echelon
from .scalars import fast, format_scalar, is_zero

# -- one-point forms --------------------------------------------------------------


@dataclass(frozen=True)
class OnePointForm:
    """varpi = sum_n c_n b_n y^{e_n} dy at one point of C."""

    point: FiberPoint
    twisted: bool
    sign: int = 1  # -1 where the module is the sigma-conjugate one

    def term(self, n) -> tuple:
        """(c_n, e_n)."""
        n = Fraction(n)
        if self.twisted:
            return 2, -2 * n - 1
        return self.sign, -n - 1

    def modes(self, lo, hi) -> list:
        """Admissible modes n with lo <= n <= hi."""
        step = 1
        start = Fraction(lo)
        if self.twisted:
            start = (start * 2 // 1)
            start = Fraction(start + (0 if start % 2 else 1), 2)
        else:
            start = Fraction(-((-start) // 1))
        out = []
        n = start
        while n <= hi:
            out.append(n)
            n += step
        return out

    def pair(self, fexp: dict, hi_mode) -> dict:
        """Res_p f varpi as {mode: coefficient}, for modes <= hi_mode."""
        out = {}
        lo = min(fexp, default=0)
        # the lowest exponent of f pairs with the most negative mode
        lo_mode = Fraction(lo, 2) if self.twisted else Fraction(lo)
        for n in self.modes(lo_mode, hi_mode):
            c, e = self.term(n)
            fj = fexp.get(-e - 1)
            if fj:
                out[n] = c * fj
        return out


def one_point_forms(mp: MarkedPoint) -> list:
    pts = mp.fiber()
    if mp.branch:
        return [OnePointForm(pts[0], True)]
    return [OnePointForm(pts[0], False, 1), OnePointForm(pts[1], False, -1)]


def one_point_form(mp: MarkedPoint, which: int = 0) -> OnePointForm:
    return one_point_forms(mp)[which]


# -- slots ----------------------------------------------------------------------------


class HeisenbergSlot:
    """pi^sigma at a branch point or pi^lambda along an unramified fiber."""

    def __init__(self, mp: MarkedPoint):
        if mp.module == "pi_sigma":
            self.sector = TWISTED
        elif mp.module == "pi_lambda":
            self.sector = Sector(False, mp.param if mp.param is not None else Fraction(0))
        else:
            raise ValueError("not a Heisenberg insertion: %s" % mp.module)
        self.marked = mp
        self.forms = one_point_forms(mp)

    def basis(self, max_degree) -> list:
        return basis_upto(self.sector, max_degree)

    def grid_step(self) -> Fraction:
        return Fraction(1, 2) if self.sector.twisted else Fraction(1)

    @staticmethod
    def degree(key) -> Fraction:
        return key_degree(key)

    def operator(self, f: RationalFunction, max_degree) -> dict:
        """Res f varpi summed over the fiber, as {2n: coefficient}."""
        out: dict = {}
        for form in self.forms:
            hi = 2 * max_degree if form.twisted else max_degree
            fexp = local_expansion(f, form.point, int(Fraction(hi) // 1))
            for n, c in form.pair(fexp, max_degree).items():
                n2 = int(2 * n)
                out[n2] = out.get(n2, 0) + c
        return {n2: fast(c) for n2, c in out.items() if c}

    def apply(self, op: dict, key) -> list:
        out = []
        for n2, c in op.items():
            for k2, x in _mode_on_key(n2, key, self.sector):
                out.append((k2, c * x))
        return out

    def format(self, key) -> str:
        return format_monomial(key, self.sector)


def heisenberg_slots(cfg: CoverConfig) -> list:
    return [HeisenbergSlot(m) for m in cfg.marked]


# -- tensor states ----------------------------------------------------------------------


class TensorState:
    """Finite linear combination of pure tensors of slot monomials."""

    __slots__ = ("terms", "slots")

    def __init__(self, terms: dict, slots: list):
        self.slots = slots
        self.terms = {k: c for k, c in terms.items() if not is_zero(c)}

    @classmethod
    def vacuum(cls, slots) -> "TensorState":
        return cls({tuple(() for _ in slots): ONE}, slots)

    @classmethod
    def basis_vector(cls, key, slots) -> "TensorState":
        return cls({tuple(key): ONE}, slots)

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorState(out, self.slots)

    def __neg__(self):
        return TensorState({k: -c for k, c in self.terms.items()}, self.slots)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return TensorState({k: c * x for k, x in self.terms.items()}, self.slots)

    def __eq__(self, other):
        return isinstance(other, TensorState) and (self - other).is_zero()

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self, key) -> Fraction:
        return sum((s.degree(k) for s, k in zip(self.slots, key)), Fraction(0))

    def coefficient(self, key):
        return self.terms.get(tuple(key), 0)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda k: (self.degree(k), k)):
            parts.append("%s*%s" % (format_scalar(self.terms[k]), " (x) ".join(s.format(x) for s, x in zip(self.slots, k))))
        return " + ".join(parts)

    __repr__ = __str__


def _apply_slot_ops(ops: list, slots: list, key: tuple) -> dict:
    out: dict = {}
    for i, (slot, op) in enumerate(zip(slots, ops)):
        if not op:
            continue
        for k2, c in slot.apply(op, key[i]):
            full = key[:i] + (k2,) + key[i + 1 :]
            if full in out:
                out[full] = out[full] + c
            else:
                out[full] = c
    return {k: c for k, c in out.items() if not is_zero(c)}


def act_on_tensor(f: RationalFunction, v: TensorState, window=None) -> TensorState:
    """f . v = sum_i sum_{p over x_i} (Res_p f varpi_i) acting on slot i."""
    slots = v.slots
    top = max((max((s.degree(k) for s, k in zip(slots, key)), default=0) for key in v.terms), default=0)
    window = top if window is None else Fraction(window)
    if window < top:
        raise ValueError("window %s below the slot degree %s" % (window, top))
    ops = [s.operator(f, window) for s in slots]
    out: dict = {}
    for key, c in v.terms.items():
        for k2, x in _apply_slot_ops(ops, slots, key).items():
            out[k2] = out.get(k2, 0) + c * x
    return TensorState(out, slots)


# -- tensor bases and the coinvariant engine -------------------------------------------


def tensor_basis(slots: list, max_degree) -> list:
    """All (key, degree) with total degree <= max_degree, degree ascending."""
    max_degree = Fraction(max_degree)
    per = [[(k, s.degree(k)) for k in s.basis(max_degree)] for s in slots]
    out = []

    def rec(i, acc, deg):
        if i == len(per):
            out.append((tuple(acc), deg))
            return
        for k, d in per[i]:
            if deg + d <= max_degree:
                acc.append(k)
                rec(i + 1, acc, deg + d)
                acc.pop()

    rec(0, [], Fraction(0))
    out.sort(key=lambda kd: kd[1])
    return out


def _column_order(slots):
    def order(key):
        return (sum((s.degree(k) for s, k in zip(slots, key)), Fraction(0)), key)

    return order


@dataclass
class CoinvariantTable:
    """Graded dimensions of F_{<=D} modulo the computed image, per degree."""

    dims: dict
    degree_cutoff: Fraction
    pole_bound: int
    source_degree: Fraction
    generators: int
    stable: bool | None = None
    next_pole_bound: int | None = None
    next_dims: dict | None = None
    partial: bool = False

    def total(self) -> int:
        return sum(self.dims.values())

    def as_dict(self) -> dict:
        return {
            "dims": {format_scalar(d): n for d, n in sorted(self.dims.items())},
            "degree_cutoff": format_scalar(self.degree_cutoff),
            "pole_bound": self.pole_bound,
            "source_degree": format_scalar(self.source_degree),
            "generators": self.generators,
            "stable": self.stable,
            "next_pole_bound": self.next_pole_bound,
            "partial": self.partial,
        }


class CoinvariantSolver:
    """Exact elimination for F_{<=D} / (span of g.v) for a list of generators.

    ``slot_ops`` is a list with, for each generator, the list of per-slot
    operators (as returned by the slots' ``operator`` methods).
    """

    def __init__(self, slots, slot_ops, degree_cutoff, source_degree=None, max_sources=None):
        self.slots = slots
        self.D = Fraction(degree_cutoff)
        self.S = self.D if source_degree is None else Fraction(source_degree)
        self.partial = False
        sources = tensor_basis(slots, self.S)
        if max_sources is not None and len(sources) > max_sources:
            self.partial = True
            while len(sources) > max_sources and self.S > 0:
                self.S -= min(s.grid_step() for s in slots)
                sources = [kd for kd in sources if kd[1] <= self.S]
            self.D = min(self.D, self.S)
        self.sources = sources
        self.echelon = Echelon(_column_order(slots))
        for ops in slot_ops:
            for key, _ in sources:
                row = _apply_slot_ops(ops, slots, key)
                if row:
                    self.echelon.add(row)
        self.generators = len(slot_ops)
        self._nf: dict = {}

    def dims(self) -> dict:
        out: dict = {}
        for key, d in tensor_basis(self.slots, self.D):
            out.setdefault(d, 0)
            if key not in self.echelon.rows:
                out[d] += 1
        return out

    def quotient_columns(self) -> list:
        return [key for key, _ in tensor_basis(self.slots, self.D) if key not in self.echelon.rows]

    def normal_form_of_key(self, key) -> dict:
        nf = self._nf.get(key)
        if nf is None:
            nf = self._nf[key] = self.echelon.normal_form({key: ONE})
        return nf

    def quotient_functional(self, column) -> "Functional":
        """phi(x) = coefficient of ``column`` in the normal form of x."""
        if column in self.echelon.rows:
            raise ValueError("column is a pivot; not a quotient coordinate")

        def value(key):
            return self.normal_form_of_key(key).get(column, 0)

        return Functional(value, "quotient coordinate %s" % (column,))


@dataclass
class Functional:
    """A linear functional given by its values on basis tensors."""

    value: object  # callable key -> scalar
    name: str = ""

    @classmethod
    def coefficient(cls, key) -> "Functional":
        key = tuple(key)
        return cls(lambda k: ONE if k == key else 0, "coefficient of %s" % (key,))

    def __call__(self, v: TensorState):
        total = 0
        for k, c in v.terms.items():
            x = self.value(k)
            if not is_zero(x):
                total = total + c * x
        return total


def heisenberg_ops(slots, funcs, window) -> list:
    return [[s.operator(f, window) for s in slots] for f in funcs]


def coinvariant_solver(cfg: CoverConfig, degree_cutoff=None, pole_bound=None, source_degree=None, max_sources=None):
    D = Fraction(cfg.degree_cutoff if degree_cutoff is None else degree_cutoff)
    P = cfg.pole_bound if pole_bound is None else pole_bound
    if cfg.family != "heisenberg":
        from .affine import affine_coinvariant_solver

        return affine_coinvariant_solver(cfg, D, P, source_degree, max_sources)
    slots = heisenberg_slots(cfg)
    S = D if source_degree is None else Fraction(source_degree)
    ops = heisenberg_ops(slots, odd_function_basis(cfg, P), S)
    return CoinvariantSolver(slots, ops, D, S, max_sources)


def coinvariant_table(cfg: CoverConfig, degree_cutoff=None, pole_bound=None, source_degree=None, max_sources=None):
    D = Fraction(cfg.degree_cutoff if degree_cutoff is None else degree_cutoff)
    P = cfg.pole_bound if pole_bound is None else pole_bound
    sol = coinvariant_solver(cfg, D, P, source_degree, max_sources)
    return CoinvariantTable(sol.dims(), sol.D, P, sol.S, sol.generators, partial=sol.partial)


def coinvariant_dims(cfg: CoverConfig, degree_cutoff=None, pole_bound=None, source_degree=None, step=2, max_sources=None):
    """Table at pole bound P, with a stabilization flag from comparing P + step."""
    P = cfg.pole_bound if pole_bound is None else pole_bound
    a = coinvariant_table(cfg, degree_cutoff, P, source_degree, max_sources)
    b = coinvariant_table(cfg, degree_cutoff, P + step, source_degree, max_sources)
    a.stable = a.dims == b.dims
    a.next_pole_bound = P + step
    a.next_dims = b.dims
    return a


def stabilized_dims(cfg: CoverConfig, degree_cutoff=None, start=1, step=2, limit=15, source_degree=None):
    """Smallest pole bound P >= start (in steps) whose table agrees with P + step."""
    P = start
    prev = coinvariant_table(cfg, degree_cutoff, P, source_degree)
    while P + step <= limit:
        nxt = coinvariant_table(cfg, degree_cutoff, P + step, source_degree)
        if nxt.dims == prev.dims:
            prev.stable = True
            prev.next_pole_bound = P + step
            prev.next_dims = nxt.dims
            return prev
        P, prev = P + step, nxt
    prev.stable = False
    return prev


def vacuum_insertion(cfg: CoverConfig, s, point: int = 1) -> CoverConfig:
    s = Fraction(s)
    if cfg.family == "heisenberg":
        mp = MarkedPoint(s, "pi_lambda", Fraction(0), point)
    else:
        k = next(m.param for m in cfg.marked)
        mp = MarkedPoint(s, "affine_vacuum", k, point)
    if mp.branch:
        raise ValueError("the extra vacuum point must be unramified")
    return cfg.with_point(mp)


def vacuum_propagation_check(cfg: CoverConfig, extra, degree_cutoff=None, start=1, limit=15) -> Witness:
    """Stabilized graded dims are unchanged by extra pi^0 (or V_k) insertions.

    ``extra`` is one s value or a list of them, added one after another.
    """
    extras = list(extra) if isinstance(extra, (list, tuple)) else [extra]
    base = stabilized_dims(cfg, degree_cutoff, start, limit=limit)
    if not base.stable:
        return Witness(False, 0, "base table did not stabilize by pole bound %d" % limit)
    grown = cfg
    checked = 1
    for s in extras:
        grown = vacuum_insertion(grown, s)
        t = stabilized_dims(grown, degree_cutoff, start, limit=limit)
        checked += 1
        if not t.stable:
            return Witness(False, checked, "table with vacuum at s=%s did not stabilize" % format_scalar(s))
        if t.dims != base.dims:
            return Witness(False, checked, "dims differ after vacuum at s=%s" % format_scalar(s), (base.dims, t.dims))
    return Witness(True, checked, "dims %s" % {format_scalar(d): n for d, n in sorted(base.dims.items())})


# -- residues ----------------------------------------------------------------------------


def residue_sum(f: RationalFunction, v: TensorState, phi: Functional) -> object:
    """sum_i sum_p Res_p <phi, A_1 (x) .. varpi_i A_i .. (x) A_m> f.

    For each slot and point the scalar Laurent series sum_n c_n phi(.. b_n A_i ..) y^{e_n}
    is multiplied by the expansion of f and its residue taken.
    """
    total = 0
    slots = v.slots
    for i, slot in enumerate(slots):
        for form in slot.forms:
            pole = pole_order(f, form.point)
            for key, c in v.terms.items():
                d = slot.degree(key[i])
                lo = -Fraction(pole, 2) if form.twisted else -Fraction(pole)
                series: dict = {}
                for n in form.modes(lo, d):
                    cn, e = form.term(n)
                    img = _mode_on_key(int(2 * n), key[i], slot.sector)
                    val = 0
                    for k2, x in img:
                        val = val + x * phi.value(key[:i] + (k2,) + key[i + 1 :])
                    if not is_zero(val):
                        series[e] = series.get(e, 0) + cn * val
                hi = max((-e - 1 for e in series), default=0)
                fexp = local_expansion(f, form.point, int(hi))
                res = 0
                for e, s in series.items():
                    fj = fexp.get(-e - 1)
                    if fj:
                        res = res + s * fj
                total = total + c * res
    return total


def residue_sum_check(f: RationalFunction, v: TensorState, phi: Functional) -> Witness:
    """Residue sum versus <phi, f.v>; ok means they agree, detail records the value."""
    lhs = residue_sum(f, v, phi)
    rhs = phi(act_on_tensor(f, v))
    ok = lhs == rhs
    return Witness(ok, 1, "residue sum %s" % format_scalar(lhs), None if ok else (lhs, rhs))


def invariance_check(solver: CoinvariantSolver, funcs, phis=None) -> Witness:
    """Every quotient functional kills f.v for every generator f and source v."""
    phis = phis if phis is not None else [solver.quotient_functional(c) for c in solver.quotient_columns()]
    checked = 0
    for f in funcs:
        for key, _ in solver.sources:
            v = TensorState.basis_vector(key, solver.slots)
            for phi in phis:
                r = residue_sum(f, v, phi)
                checked += 1
                if not is_zero(r):
                    return Witness(False, checked, "%s on f=%s v=%s" % (phi.name, f, v), r)
    return Witness(True, checked)


def find_witness(solver: CoinvariantSolver, funcs, phi: Functional):
    """Some (f, v) with residue sum nonzero, or None."""
    for f in funcs:
        for key, _ in solver.sources:
            v = TensorState.basis_vector(key, solver.slots)
            r = residue_sum(f, v, phi)
            if not is_zero(r):
                return f, v, r
    return None


# -- parity and commutation -----------------------------------------------------------------


def parity_annihilation_check(cfg: CoverConfig, pole_bound=7, max_degree=2) -> Witness:
    """Every even generator acts by zero on every basis tensor of degree <= max_degree."""
    slots = heisenberg_slots(cfg)
    checked = 0
    for f in even_function_basis(cfg, pole_bound):
        for key, _ in tensor_basis(slots, max_degree):
            w = act_on_tensor(f, TensorState.basis_vector(key, slots))
            checked += 1
            if not w.is_zero():
                return Witness(False, checked, "f=%s on %s" % (f, key), w)
    return Witness(True, checked)


def abelian_check(cfg: CoverConfig, pole_bound=3, max_degree=2) -> Witness:
    """[f., g.] = 0 on basis tensors for odd generators f, g."""
    slots = heisenberg_slots(cfg)
    funcs = odd_function_basis(cfg, pole_bound)
    checked = 0
    basis = tensor_basis(slots, max_degree)
    for f, g in itertools.combinations(funcs, 2):
        for key, _ in basis:
            v = TensorState.basis_vector(key, slots)
            a = act_on_tensor(f, act_on_tensor(g, v))
            b = act_on_tensor(g, act_on_tensor(f, v))
            checked += 1
            if a != b:
                return Witness(False, checked, "f=%s g=%s on %s" % (f, g, key), a - b)
    return Witness(True, checked)
