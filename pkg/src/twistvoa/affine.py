"""V_k(sl_2), its order-two twist by the Cartan involution, and g_out coinvariants.

Internally every module uses the sigma-adapted basis

    X = e + f  (in g_0),   Y = e - f,  H = h  (in g_1)

with [H, X] = 2Y, [H, Y] = 2X, [X, Y] = -2H and (X, X) = 2, (Y, Y) = -2, (H, H) = 2.
Modes are stored doubled, as in the Heisenberg code: a PBW monomial is a
tuple of (2n, basis index) sorted ascending, read left to right over |0>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from gmpy2 import mpq

from .blocks import CoinvariantSolver
from .curve import (
    CoverConfig,
    RationalFunction,
    even_function_basis,
    in_function_space,
    local_expansion,
    odd_function_basis,
)
from .heisenberg import Witness
from .scalars import fast, format_scalar, is_zero

ONE = mpq(1)


@dataclass(frozen=True)
class LieData:
    """A finite-dimensional Lie algebra with invariant form and an involution."""

    names: tuple
    brackets: tuple  # brackets[i][j] = ((k, c), ...)
    form: tuple
    sigma: tuple  # sigma[i] = ((k, c), ...), image of basis element i
    dual_coxeter: int
    parity: tuple | None = None  # eigenspace index l of each basis element, if adapted

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, a) -> int:
        return a if isinstance(a, int) else self.names.index(a)

    def element(self, a) -> dict:
        if isinstance(a, dict):
            return {self.index(k): fast(Fraction(v)) for k, v in a.items() if v}
        return {self.index(a): ONE}

    def bracket(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.brackets[i][j]:
                    out[k] = out.get(k, 0) + a * b * c
        return {k: c for k, c in out.items() if c}

    def pair(self, x: dict, y: dict):
        return sum((a * b * self.form[i][j] for i, a in x.items() for j, b in y.items()), mpq(0))

    def apply_sigma(self, x: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for k, c in self.sigma[i]:
                out[k] = out.get(k, 0) + a * c
        return {k: c for k, c in out.items() if c}

    def dual_basis(self) -> list:
        """J^a with (J_a, J^b) = delta_ab."""
        n = self.dim
        G = [[Fraction(self.form[i][j]) for j in range(n)] for i in range(n)]
        inv = _invert(G)
        return [{j: fast(inv[a][j]) for j in range(n) if inv[a][j]} for a in range(n)]


def _invert(M):
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c])
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def _table(n, entries) -> tuple:
    t = [[() for _ in range(n)] for _ in range(n)]
    for (i, j), terms in entries.items():
        t[i][j] = tuple((k, mpq(c)) for k, c in terms)
        t[j][i] = tuple((k, mpq(-c)) for k, c in terms)
    return tuple(tuple(r) for r in t)


def sl2() -> LieData:
    """Standard basis e, h, f with the Cartan involution e <-> f, h -> -h."""
    e, h, f = 0, 1, 2
    br = _table(3, {(h, e): ((e, 2),), (h, f): ((f, -2),), (e, f): ((h, 1),)})
    form = ((0, 0, 1), (0, 2, 0), (1, 0, 0))
    sig = (((f, ONE),), ((h, -ONE),), ((e, ONE),))
    return LieData(("e", "h", "f"), br, form, sig, 2)


def sl2_adapted() -> LieData:
    """Basis X = e+f, Y = e-f, H = h of sigma-eigenvectors."""
    X, Y, H = 0, 1, 2
    br = _table(3, {(H, X): ((Y, 2),), (H, Y): ((X, 2),), (X, Y): ((H, -2),)})
    form = ((2, 0, 0), (0, -2, 0), (0, 0, 2))
    sig = (((X, ONE),), ((Y, -ONE),), ((H, -ONE),))
    return LieData(("X", "Y", "H"), br, form, sig, 2, (0, 1, 1))


SL2 = sl2()
SL2_ADAPTED = sl2_adapted()


def to_adapted(x: dict) -> dict:
    """Rewrite an element given over e, h, f in the X, Y, H basis."""
    half = mpq(1, 2)
    out: dict = {}
    for name, c in x.items():
        c = fast(Fraction(c))
        if name in ("e", 0):
            parts = ((0, half), (1, half))
        elif name in ("f", 2):
            parts = ((0, half), (1, -half))
        elif name in ("h", 1):
            parts = ((2, ONE),)
        else:
            raise KeyError(name)
        for k, v in parts:
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def lie_data_check(lie: LieData) -> Witness:
    """Jacobi, invariance of the form, and sigma an involutive automorphism preserving it."""
    n = lie.dim
    basis = [{i: ONE} for i in range(n)]
    checked = 0
    for x, y, z in itertools.product(basis, repeat=3):
        j = {}
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            for k, v in lie.bracket(a, lie.bracket(b, c)).items():
                j[k] = j.get(k, 0) + v
        checked += 1
        if any(j.values()):
            return Witness(False, checked, "Jacobi", j)
        if lie.pair(lie.bracket(x, y), z) != lie.pair(x, lie.bracket(y, z)):
            return Witness(False, checked, "form not invariant")
    for x, y in itertools.product(basis, repeat=2):
        s = lie.apply_sigma
        checked += 1
        if s(lie.bracket(x, y)) != lie.bracket(s(x), s(y)):
            return Witness(False, checked, "sigma not a homomorphism")
        if lie.pair(s(x), s(y)) != lie.pair(x, y):
            return Witness(False, checked, "form not sigma-invariant")
    for x in basis:
        if lie.apply_sigma(lie.apply_sigma(x)) != x:
            return Witness(False, checked, "sigma is not an involution")
    return Witness(True, checked)


# -- affine modules -----------------------------------------------------------------


@dataclass(frozen=True)
class AffineSector:
    """Vacuum module V_k (untwisted) or the module induced from the trivial
    representation of the nonnegative twisted modes (twisted), at level k."""

    twisted: bool
    k: Fraction
    lie: LieData = SL2_ADAPTED

    def __post_init__(self):
        if self.twisted and self.lie.parity is None:
            raise ValueError("twisted modules need a sigma-adapted basis")

    def admits(self, i: int, m2: int) -> bool:
        want = self.lie.parity[i] if self.twisted else 0
        return m2 % 2 == want

    def level(self):
        return fast(self.k)


def _key_degree(key) -> Fraction:
    return Fraction(-sum(m for m, _ in key), 2)


_CACHE: dict = {}


def _act(i: int, m2: int, key: tuple, sector: AffineSector) -> dict:
    """a_{m2/2} (basis element i) on a PBW monomial, straightened."""
    tag = (sector.twisted, sector.k, id(sector.lie))
    slot = _CACHE.get(tag)
    if slot is None:
        # keep the LieData alive so its id cannot be reused
        slot = _CACHE[tag] = (sector.lie, {})
    memo = slot[1]
    ck = (i, m2, key)
    hit = memo.get(ck)
    if hit is not None:
        return hit
    out: dict = {}
    if not key:
        if m2 < 0:
            out[((m2, i),)] = ONE
    elif m2 < 0 and (m2, i) <= key[0]:
        out[((m2, i),) + key] = ONE
    else:
        m1, i1 = key[0]
        rest = key[1:]
        # a_m x R = x (a_m R) + [a_m, x] R
        for k2, c in _act(i, m2, rest, sector).items():
            for k3, c3 in _act(i1, m1, k2, sector).items():
                out[k3] = out.get(k3, 0) + c * c3
        for k, c in sector.lie.brackets[i][i1]:
            for k4, c4 in _act(k, m2 + m1, rest, sector).items():
                out[k4] = out.get(k4, 0) + c * c4
        if m2 + m1 == 0 and sector.lie.form[i][i1]:
            c = mpq(m2, 2) * sector.lie.form[i][i1] * sector.level()
            if c:
                out[rest] = out.get(rest, 0) + c
        out = {k: c for k, c in out.items() if not is_zero(c)}
    memo[ck] = out
    return out


class AffineVector:
    """Linear combination of PBW monomials over the vacuum of an AffineSector."""

    __slots__ = ("terms", "sector")

    def __init__(self, terms: dict, sector: AffineSector):
        self.sector = sector
        self.terms = {k: c for k, c in terms.items() if not is_zero(c)}

    @classmethod
    def vacuum(cls, sector: AffineSector) -> "AffineVector":
        return cls({(): ONE}, sector)

    @classmethod
    def monomial(cls, factors, sector: AffineSector, coef=1) -> "AffineVector":
        """factors: [(name or index, mode), ...] read left to right."""
        v = cls.vacuum(sector)
        for a, n in reversed(list(factors)):
            v = affine_mode_action(a, n, v)
        return fast(Fraction(coef)) * v

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return AffineVector(out, self.sector)

    def __neg__(self):
        return AffineVector({k: -c for k, c in self.terms.items()}, self.sector)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return AffineVector({k: c * x for k, x in self.terms.items()}, self.sector)

    def __eq__(self, other):
        return isinstance(other, AffineVector) and other.sector == self.sector and (self - other).is_zero()

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set:
        return {_key_degree(k) for k in self.terms}

    def __str__(self):
        return format_affine(self)

    __repr__ = __str__


def format_affine_key(key, lie: LieData, twisted: bool) -> str:
    body = "".join("%s(%s)" % (lie.names[i], format_scalar(Fraction(m, 2))) for m, i in key)
    return body + ("|0;tw>" if twisted else "|0>")


def format_affine(v: AffineVector) -> str:
    if not v.terms:
        return "0"
    parts = []
    for k in sorted(v.terms, key=lambda k: (_key_degree(k), k)):
        parts.append("%s*%s" % (format_scalar(v.terms[k]), format_affine_key(k, v.sector.lie, v.sector.twisted)))
    return " + ".join(parts)


def affine_mode_action(a, n, v: AffineVector) -> AffineVector:
    """a_n v for a basis element (name or index) or a combination {name: coef}."""
    n2 = Fraction(n) * 2
    if n2.denominator != 1:
        raise ValueError("mode %s not in (1/2)Z" % n)
    n2 = int(n2)
    sector = v.sector
    x = sector.lie.element(a)
    out: dict = {}
    for i, ci in x.items():
        if not sector.admits(i, n2):
            raise ValueError(
                "sector mismatch: %s carries modes in %s + Z, got %s"
                % (sector.lie.names[i], "1/2" if sector.lie.parity and sector.lie.parity[i] and sector.twisted else "0", format_scalar(Fraction(n)))
            )
        for key, c in v.terms.items():
            for k2, c2 in _act(i, n2, key, sector).items():
                out[k2] = out.get(k2, 0) + ci * c * c2
    return AffineVector(out, sector)


def affine_basis_keys(sector: AffineSector, max_degree) -> list:
    """PBW monomials of degree <= max_degree, degree ascending."""
    max2 = int(Fraction(max_degree) * 2)
    gens = []
    for m in range(1, max2 + 1):
        for i in range(sector.lie.dim):
            if sector.admits(i, -m):
                gens.append((-m, i))
    gens.sort()
    out = []

    def rec(start, acc, deg2):
        out.append(tuple(acc))
        for j in range(start, len(gens)):
            m, i = gens[j]
            if deg2 - m <= max2:
                acc.append(gens[j])
                rec(j, acc, deg2 - m)
                acc.pop()

    rec(0, [], 0)
    out.sort(key=lambda k: (-sum(m for m, _ in k), k))
    return out


def affine_basis(sector: AffineSector, max_degree) -> list:
    return [AffineVector({k: ONE}, sector) for k in affine_basis_keys(sector, max_degree)]


# -- Sugawara ---------------------------------------------------------------------------


def sugawara_mode(n: int, k, v: AffineVector) -> AffineVector:
    """L_n = 1/(2(k + h^v)) sum_a sum_m :J_a(m) J^a(n-m): on the untwisted module."""
    k = Fraction(k)
    lie = v.sector.lie
    if v.sector.twisted:
        raise ValueError("Sugawara modes are only implemented on the untwisted module")
    if k + lie.dual_coxeter == 0:
        raise ValueError("critical level k = -h^v: Sugawara vector undefined")
    if Fraction(v.sector.k) != k:
        raise ValueError("level mismatch")
    D = max((int(d) for d in v.degrees()), default=0)
    pref = fast(Fraction(1, 2 * (k + lie.dual_coxeter)))
    dual = lie.dual_basis()
    out = AffineVector({}, v.sector)
    for a in range(lie.dim):
        for m in range(n - D - 1, D + 2):
            if m <= -1:
                left, right = ({a: ONE}, m), (dual[a], n - m)
            else:
                left, right = (dual[a], n - m), ({a: ONE}, m)
            w = affine_mode_action(right[0], right[1], v)
            if w.is_zero():
                continue
            out = out + affine_mode_action(left[0], left[1], w)
    return pref * out


# -- affine algebra brackets and checks ---------------------------------------------------


def mode_bracket(lie: LieData, k, x: tuple, y: tuple) -> tuple:
    """[a_m, b_n] for x = (i, m2), y = (j, n2): ({(idx, mode2): c}, central)."""
    (i, m2), (j, n2) = x, y
    out = {}
    for kk, c in lie.brackets[i][j]:
        out[(kk, m2 + n2)] = out.get((kk, m2 + n2), 0) + c
    central = mpq(m2, 2) * lie.form[i][j] * fast(Fraction(k)) if m2 + n2 == 0 else mpq(0)
    return out, central


def _bracket_elem(lie, k, x: dict, y: dict) -> dict:
    """Bracket of mode combinations; the central element is keyed 'K'."""
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            if a == "K" or b == "K":
                continue
            terms, cent = mode_bracket(lie, k, a, b)
            for t, c in terms.items():
                out[t] = out.get(t, 0) + ca * cb * c
            if cent:
                out["K"] = out.get("K", 0) + ca * cb * cent
    return {t: c for t, c in out.items() if c}


def _modes(sector: AffineSector, bound) -> Iterator[tuple]:
    b2 = int(Fraction(bound) * 2)
    for i in range(sector.lie.dim):
        for m2 in range(-b2, b2 + 1):
            if sector.admits(i, m2):
                yield (i, m2)


def jacobi_check(sector: AffineSector, bound=2) -> Witness:
    """Jacobi identity for all triples of basis modes with |n| <= bound."""
    lie, k = sector.lie, sector.k
    modes = list(_modes(sector, bound))
    checked = 0
    for x, y, z in itertools.product(modes, repeat=3):
        tot: dict = {}
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            inner = _bracket_elem(lie, k, {b: ONE}, {c: ONE})
            for t, v in _bracket_elem(lie, k, {a: ONE}, inner).items():
                tot[t] = tot.get(t, 0) + v
        checked += 1
        if any(tot.values()):
            return Witness(False, checked, "Jacobi fails at %s %s %s" % (x, y, z), tot)
    return Witness(True, checked)


def representation_check(sector: AffineSector, bound=2, max_degree=2) -> Witness:
    """a_m b_n - b_n a_m = [a_m, b_n] as operators on a basis slice."""
    modes = list(_modes(sector, bound))
    basis = affine_basis(sector, max_degree)
    checked = 0
    for x, y in itertools.product(modes, repeat=2):
        terms, cent = mode_bracket(sector.lie, sector.k, x, y)
        for v in basis:
            lhs = affine_mode_action(x[0], Fraction(x[1], 2), affine_mode_action(y[0], Fraction(y[1], 2), v))
            lhs = lhs - affine_mode_action(y[0], Fraction(y[1], 2), affine_mode_action(x[0], Fraction(x[1], 2), v))
            rhs = cent * v
            for (kk, m2), c in terms.items():
                rhs = rhs + c * affine_mode_action(kk, Fraction(m2, 2), v)
            checked += 1
            if lhs != rhs:
                return Witness(False, checked, "[%s, %s] on %s" % (x, y, v), lhs - rhs)
    return Witness(True, checked)


def sugawara_grading_check(sector: AffineSector, bound=2, max_degree=2) -> Witness:
    """[L_0, a_n] = -n a_n and L_0 = degree on a slice of the untwisted module."""
    basis = affine_basis(sector, max_degree)
    checked = 0
    for v in basis:
        d = next(iter(v.degrees()))
        checked += 1
        if sugawara_mode(0, sector.k, v) != fast(d) * v:
            return Witness(False, checked, "L_0 != degree on %s" % v)
    for i, m2 in _modes(sector, bound):
        n = Fraction(m2, 2)
        for v in basis:
            a = sugawara_mode(0, sector.k, affine_mode_action(i, n, v))
            b = affine_mode_action(i, n, sugawara_mode(0, sector.k, v))
            checked += 1
            if a - b != fast(-n) * affine_mode_action(i, n, v):
                return Witness(False, checked, "[L_0, %s_%s] on %s" % (sector.lie.names[i], n, v))
    return Witness(True, checked)


# -- g_out on the double cover -------------------------------------------------------------


def g_out_basis(cfg: CoverConfig, pole_bound: int, lie: LieData = SL2_ADAPTED) -> list:
    """Pairs (basis index, function): g_0 with even functions, g_1 with odd ones."""
    even = even_function_basis(cfg, pole_bound)
    odd = odd_function_basis(cfg, pole_bound)
    out = []
    for i in range(lie.dim):
        out.extend((i, f) for f in (even if lie.parity[i] == 0 else odd))
    return out


def g_out_admits(i: int, f: RationalFunction, lie: LieData = SL2_ADAPTED) -> bool:
    want = "even" if lie.parity[i] == 0 else "odd"
    return f.is_zero() or f.parity() == want


def g_out_closure_check(cfg: CoverConfig, pole_bound: int, lie: LieData = SL2_ADAPTED) -> Witness:
    """[a (x) f, b (x) g] = [a, b] (x) fg stays in g_out."""
    basis = g_out_basis(cfg, pole_bound, lie)
    checked = 0
    for (i, f), (j, g) in itertools.product(basis, repeat=2):
        fg = f * g
        checked += 1
        for kk, c in lie.brackets[i][j]:
            if not g_out_admits(kk, fg, lie) or not in_function_space(fg, cfg):
                return Witness(False, checked, "[%s (x) %s, %s (x) %s]" % (lie.names[i], f, lie.names[j], g))
    return Witness(True, checked)


class AffineSlot:
    """Affine insertion: twisted module at a branch point, V_k along an unramified fiber.

    a (x) f acts by sum_j f_j a_{j/2} at a branch point (y-expansion of f) and by
    sum_j f_j a_j at the chosen point of an unramified fiber.  The companion
    point gives the same operator (the module there is sigma-conjugated and f has
    the matching parity), so an unramified fiber is counted once.
    """

    def __init__(self, mp, lie: LieData = SL2_ADAPTED):
        if mp.module not in ("affine_vacuum", "affine_twisted"):
            raise ValueError("not an affine insertion: %s" % mp.module)
        self.marked = mp
        self.sector = AffineSector(mp.module == "affine_twisted", Fraction(mp.param), lie)
        self.point = mp.fiber()[0]

    def basis(self, max_degree) -> list:
        return affine_basis_keys(self.sector, max_degree)

    def grid_step(self) -> Fraction:
        return Fraction(1, 2) if self.sector.twisted else Fraction(1)

    @staticmethod
    def degree(key) -> Fraction:
        return _key_degree(key)

    def operator(self, gen, max_degree) -> dict:
        i, f = gen
        scale = 2 if self.sector.twisted else 1
        fexp = local_expansion(f, self.point, int(Fraction(scale * max_degree) // 1))
        out = {}
        for j, c in fexp.items():
            m2 = j if self.sector.twisted else 2 * j
            if not self.sector.admits(i, m2):
                raise ValueError("generator %s (x) %s has the wrong parity" % (self.sector.lie.names[i], f))
            out[(m2, i)] = fast(c)
        return out

    def apply(self, op: dict, key) -> list:
        out = []
        for (m2, i), c in op.items():
            for k2, x in _act(i, m2, key, self.sector).items():
                out.append((k2, c * x))
        return out

    def format(self, key) -> str:
        return format_affine_key(key, self.sector.lie, self.sector.twisted)


def affine_slots(cfg: CoverConfig) -> list:
    levels = {m.param for m in cfg.marked}
    if len(levels) != 1:
        raise ValueError("all affine insertions must share one level")
    (k,) = levels
    if cfg.grading == "sugawara" and k == -2:
        raise ValueError("critical level k = -2 (k = -h^v): Sugawara grading undefined")
    return [AffineSlot(m) for m in cfg.marked]


def affine_coinvariant_solver(cfg: CoverConfig, D, P, source_degree=None, max_sources=None) -> CoinvariantSolver:
    slots = affine_slots(cfg)
    S = Fraction(D) if source_degree is None else Fraction(source_degree)
    ops = [[s.operator(g, S) for s in slots] for g in g_out_basis(cfg, P)]
    return CoinvariantSolver(slots, ops, D, S, max_sources)


def affine_coinvariant_dims(cfg: CoverConfig, degree_cutoff=None, pole_bound=None, step=2):
    from .blocks import coinvariant_dims

    return coinvariant_dims(cfg, degree_cutoff, pole_bound, step=step)


def affine_act_on_tensor(gen, v, window=None):
    """(a (x) f) . v on a TensorState of affine slots."""
    from .blocks import TensorState, _apply_slot_ops

    slots = v.slots
    top = max((max((s.degree(k) for s, k in zip(slots, key)), default=0) for key in v.terms), default=0)
    window = top if window is None else Fraction(window)
    ops = [s.operator(gen, window) for s in slots]
    out: dict = {}
    for key, c in v.terms.items():
        for k2, x in _apply_slot_ops(ops, slots, key).items():
            out[k2] = out.get(k2, 0) + c * x
    return TensorState(out, slots)


def g_out_action_check(cfg: CoverConfig, pole_bound=2, max_degree=1) -> Witness:
    """x.(y.v) - y.(x.v) = [x, y].v for g_out basis pairs on basis tensors.

    The central terms cancel by the residue theorem, so this is the statement
    that g_out acts as a Lie algebra.
    """
    from .blocks import TensorState, tensor_basis

    slots = affine_slots(cfg)
    gens = g_out_basis(cfg, pole_bound)
    lie = slots[0].sector.lie
    basis = tensor_basis(slots, max_degree)
    checked = 0
    for (i, f), (j, g) in itertools.combinations(gens, 2):
        fg = f * g
        for key, _ in basis:
            v = TensorState.basis_vector(key, slots)
            top = max_degree + 2 * pole_bound + 2
            a = affine_act_on_tensor((i, f), affine_act_on_tensor((j, g), v, top), top)
            b = affine_act_on_tensor((j, g), affine_act_on_tensor((i, f), v, top), top)
            rhs = TensorState({}, slots)
            for kk, c in lie.brackets[i][j]:
                rhs = rhs + c * affine_act_on_tensor((kk, fg), v, top)
            checked += 1
            if a - b != rhs:
                return Witness(False, checked, "[%s (x) %s, %s (x) %s] on %s" % (lie.names[i], f, lie.names[j], g, key))
    return Witness(True, checked)
