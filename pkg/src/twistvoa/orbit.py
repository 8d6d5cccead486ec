"""Modules along a fiber of the double cover, for the group H = Z/2.

A fiber of t -> t^2 is either one ramified point (stabilizer Z/2, monodromy
sigma) or two unramified points p, g(p).  Starting from a module M at a chosen
point p, the other point of an unramified fiber carries the same space with
the action A -> Y(g^-1 . A); the intertwiners between the two are identities.
At a ramified point the only nontrivial intertwiner is S_sigma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coords import CoordChange, group_transform_check
from .heisenberg import (
    FockVector,
    Sector,
    Witness,
    basis_upto,
    s_sigma,
    sigma,
    vertex_mode,
)

GROUP = ("e", "g")


def group_mul(a: str, b: str) -> str:
    return "e" if a == b else "g"


def _identity(v: FockVector) -> FockVector:
    return v


@dataclass
class OrbitModule:
    """Modules at the points of one fiber plus the intertwiners S_{g,p,g(p)}."""

    kind: str  # "ramified" or "unramified"
    points: tuple  # point labels; the first one carries the defining module
    sector: Sector
    # (g, p) -> linear map M_p -> M_{g(p)}
    intertwiners: dict

    def stabilizer_order(self, p) -> int:
        return 2 if self.kind == "ramified" else 1

    def monodromy(self, p) -> str:
        return "g" if self.kind == "ramified" else "e"

    def act(self, g: str, p):
        """g(p)."""
        if g == "e" or self.kind == "ramified":
            return p
        a, b = self.points
        return b if p == a else a

    def twist(self, p) -> str:
        """The group element h with Y^{M_p}(A) = Y^{M}(h . A)."""
        return "e" if p == self.points[0] else "g"

    def vertex_mode(self, p, A: FockVector, n, v: FockVector) -> FockVector:
        """A_(n) on M_p, including the induced structure at the companion point."""
        if p not in self.points:
            raise KeyError("point %r not in this fiber" % (p,))
        state = sigma(A) if self.twist(p) == "g" else A
        return vertex_mode(state, n, v)


def build_orbit_module(kind: str, sector: Sector, points=None, group_order: int = 2) -> OrbitModule:
    """Orbit module from a single module at the first point of the fiber."""
    if group_order != 2:
        raise NotImplementedError("only H = Z/2 is supported")
    if kind == "ramified":
        if not sector.twisted:
            raise ValueError("a ramified point carries a sigma-twisted module")
        pts = tuple(points or ("0",))
        if len(pts) != 1:
            raise ValueError("a ramified fiber has one point")
        p = pts[0]
        maps = {("e", p): _identity, ("g", p): s_sigma}
    elif kind == "unramified":
        if sector.twisted:
            raise ValueError("an unramified point carries an untwisted module")
        pts = tuple(points or ("+", "-"))
        if len(pts) != 2:
            raise ValueError("an unramified fiber has two points")
        maps = {(g, p): _identity for g in GROUP for p in pts}
    else:
        raise ValueError("kind must be 'ramified' or 'unramified'")
    return OrbitModule(kind, pts, sector, maps)


def _basis(orbit: OrbitModule, max_degree):
    return [FockVector._raw({k: Fraction(1)}, orbit.sector) for k in basis_upto(orbit.sector, max_degree)]


def cocycle_check(orbit: OrbitModule, max_degree) -> Witness:
    """Cocycle, inverse and stabilizer laws for the intertwiners on a slice."""
    checked = 0
    S = orbit.intertwiners
    for v in _basis(orbit, max_degree):
        for p in orbit.points:
            for g in GROUP:
                for k in GROUP:
                    lhs = S[(group_mul(g, k), p)](v)
                    rhs = S[(g, orbit.act(k, p))](S[(k, p)](v))
                    checked += 1
                    if lhs != rhs:
                        return Witness(False, checked, "cocycle g=%s k=%s p=%s" % (g, k, p), lhs - rhs)
            if S[("e", p)](v) != v:
                return Witness(False, checked, "identity intertwiner at %s" % p)
            back = S[("g", orbit.act("g", p))](S[("g", p)](v))
            if back != v:
                return Witness(False, checked, "inverse law at %s" % p, back - v)
            if orbit.kind == "ramified" and S[("g", p)](v) != s_sigma(v):
                return Witness(False, checked, "stabilizer intertwiner at %s is not S_sigma" % p)
    return Witness(True, checked)


def intertwiner_check(orbit: OrbitModule, states, max_degree, max_mode=3) -> Witness:
    """S_{g,p,g(p)} A_(n) S^-1 = (g . A)_(n) at g(p), on a slice."""
    checked = 0
    S = orbit.intertwiners
    for A in states:
        for p in orbit.points:
            q = orbit.act("g", p)
            n = Fraction(-max_mode)
            while n <= max_mode:
                for v in _basis(orbit, max_degree):
                    # S^-1 = S_{g, q, p}
                    lhs = S[("g", p)](orbit.vertex_mode(p, A, n, S[("g", q)](v)))
                    rhs = orbit.vertex_mode(q, sigma(A), n, v)
                    checked += 1
                    if lhs != rhs:
                        return Witness(
                            False, checked, "A=%s n=%s at %s" % (A, n, q), lhs - rhs
                        )
                n += Fraction(1, 2) if orbit.kind == "ramified" else 1
    return Witness(True, checked)


def negate_charge(sector: Sector) -> Sector:
    return Sector(False, -sector.lam)


def involution_consistency_check(orbit: OrbitModule, states, max_degree, max_mode=3) -> Witness:
    """Building from p with pi^lam matches building from g(p) with pi^(-lam).

    The isomorphism is b~_n -> -b~_n on Fock spaces, i.e. sigma on monomials.
    """
    if orbit.kind != "unramified":
        return Witness(True, 0, "ramified fibers have a single point")
    p, q = orbit.points
    other = build_orbit_module("unramified", negate_charge(orbit.sector), (q, p))
    checked = 0
    for A in states:
        for pt in orbit.points:
            for n in range(-max_mode, max_mode + 1):
                for v in _basis(orbit, max_degree):
                    lhs = sigma(orbit.vertex_mode(pt, A, n, v))
                    w = FockVector._raw(sigma(v).terms, other.sector)
                    rhs = other.vertex_mode(pt, A, n, w)
                    checked += 1
                    if FockVector._raw(lhs.terms, other.sector) != rhs:
                        return Witness(False, checked, "A=%s n=%s at %s on %s" % (A, n, pt, v))
    return Witness(True, checked)


def section_coordinate_independence_check(
    orbit: OrbitModule, rho: CoordChange, A: FockVector, max_degree, hi=4
) -> Witness:
    """Matrix elements of Y(A) agree in coordinates related by a special change rho.

    At the defining point this is the transformation formula; at the companion
    point of an unramified fiber the induced structure Y(sigma A) is used, and
    since sigma commutes with the Virasoro action the same identity must hold.
    """
    results = []
    for p in orbit.points:
        state = sigma(A) if orbit.twist(p) == "g" else A
        if orbit.kind == "ramified" and rho.N != 2:
            raise ValueError("ramified points need N = 2 coordinate changes")
        if orbit.kind == "unramified" and rho.N != 1:
            raise ValueError("unramified points need N = 1 coordinate changes")
        w = group_transform_check(rho, state, max_degree, hi, orbit.sector)
        if not w:
            w.detail = "at point %s: %s" % (p, w.detail)
            return w
        results.append(w.checked)
    return Witness(True, sum(results), "points %s" % (orbit.points,))


def pushforward_check(orbit: OrbitModule, states, max_degree, max_mode=3) -> Witness:
    """Y^{M_g(p)}(g . A) equals Y^{M_p}(A) through the identity intertwiner."""
    if orbit.kind != "unramified":
        return Witness(True, 0, "ramified fibers have a single point")
    p, q = orbit.points
    checked = 0
    for A in states:
        for n in range(-max_mode, max_mode + 1):
            for v in _basis(orbit, max_degree):
                lhs = orbit.vertex_mode(q, sigma(A), n, v)
                rhs = orbit.vertex_mode(p, A, n, v)
                checked += 1
                if lhs != rhs:
                    return Witness(False, checked, "A=%s n=%s on %s" % (A, n, v), lhs - rhs)
    return Witness(True, checked)
