"""Command-line front end: ``twistvoa delta | verify | blocks``.

Every number is printed exactly ("p/q"); exit status is 0 when all requested
identities hold, 1 when one fails, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .scalars import format_scalar

SUITES = ("commutator", "ta-lemma", "transform", "primary", "orbit", "parity")


@dataclass
class RunManifest:
    """Everything needed to reproduce a run; outputs are deterministic."""

    command: str
    config: object = None
    cutoffs: dict = field(default_factory=dict)
    format: str = "json"
    deterministic: bool = True


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("expected a rational like 7/2, got %r" % text) from None


def _nonneg_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, got %r" % text) from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative, got %d" % n)
    return n


def _pmap(fn, items, threads: int) -> list:
    # results come back in input order whatever the thread count
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _emit(doc: dict, fmt: str, rows=None, header=None, out=None) -> None:
    out = out or sys.stdout
    if fmt == "tsv" and rows is not None:
        out.write("\t".join(header) + "\n")
        for r in rows:
            out.write("\t".join(str(x) for x in r) + "\n")
        return
    out.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


# -- delta ---------------------------------------------------------------------------


def cmd_delta(args) -> int:
    from .series import delta_coefficients

    table = delta_coefficients(args.order)
    rows = []
    for total in range(args.order + 1):
        for m in range(total + 1):
            rows.append((m, total - m, format_scalar(table[(m, total - m)])))
    doc = {
        "manifest": asdict(RunManifest("delta", cutoffs={"order": args.order}, format=args.format)),
        "c": [{"m": m, "n": n, "value": v} for m, n, v in rows],
    }
    _emit(doc, args.format, rows, ("m", "n", "c_mn"))
    return 0


# -- verify --------------------------------------------------------------------------


def _states(max_degree):
    from .heisenberg import ONE, VACUUM_SECTOR, FockVector, basis_upto

    return [FockVector._raw({m: ONE}, VACUUM_SECTOR) for m in basis_upto(VACUUM_SECTOR, max_degree)]


def _suite_commutator(args):
    from .heisenberg import commutator_check, format_fock

    deg = 4 if args.deg is None else args.deg
    bound = Fraction(7, 2) if args.modes is None else args.modes
    states = _states(deg)
    span = int(bound) + 1

    def modes(A):
        p = A.parity()
        return [Fraction(2 * i + p, 2) for i in range(-span, span + 1) if abs(Fraction(2 * i + p, 2)) <= bound]

    jobs = [(A, B) for A in states for B in states]

    def run(ab):
        A, B = ab
        total, bad = 0, None
        for m in modes(A):
            for k in modes(B):
                w = commutator_check(A, B, m, k, deg)
                total += w.checked
                if not w and bad is None:
                    bad = "[%s_(%s), %s_(%s)]: %s" % (format_fock(A), m, format_fock(B), k, w.detail)
        return {"name": "commutator %s, %s" % (format_fock(A), format_fock(B)), "ok": bad is None,
                "checked": total, "detail": bad or ""}

    return _pmap(run, jobs, args.threads)


def _suite_ta(args):
    from .heisenberg import format_fock, ta_lemma_check

    deg = 4 if args.deg is None else args.deg

    def run(A):
        w = ta_lemma_check(A, deg)
        return {"name": "Y(TA) = dY(A) for %s" % format_fock(A), **w.as_dict()}

    return _pmap(run, _states(deg + 1), args.threads)


def _rho(args):
    from .coords import CoordChange

    coeffs = [Fraction(c) for c in (args.rho or "1,1").split(",")]
    # the coefficient list is taken as an exact polynomial; --order sets the window
    return CoordChange.from_coefficients(coeffs, 2), 6 if args.order is None else args.order


def _suite_transform(args):
    from .coords import DerElement, group_transform_check, infinitesimal_transform_check
    from .heisenberg import ONE, VACUUM_SECTOR, FockVector, format_fock, omega

    deg = 3 if args.deg is None else args.deg
    rho, order = _rho(args)
    hi = max(order, 6)
    jobs = [("inf", k, A) for k in range(4) for A in _states(deg)]
    group_states = [FockVector.vacuum(VACUUM_SECTOR), FockVector._raw({(-2,): ONE}, VACUUM_SECTOR), omega()]
    jobs += [("group", None, A) for A in group_states]

    def run(job):
        kind, k, A = job
        if kind == "inf":
            w = infinitesimal_transform_check(DerElement.generator(k), A, deg, hi)
            name = "infinitesimal k=%d, A=%s" % (k, format_fock(A))
        else:
            w = group_transform_check(rho, A, deg, order)
            name = "group rho=%s, A=%s" % (rho, format_fock(A))
        return {"name": name, **w.as_dict()}

    return _pmap(run, jobs, args.threads)


def _suite_primary(args):
    from .coords import primary_transform_check
    from .heisenberg import ONE, VACUUM_SECTOR, FockVector, omega

    deg = 3 if args.deg is None else args.deg
    rho, order = _rho(args)
    A = FockVector._raw({(-2,): ONE}, VACUUM_SECTOR)
    out = [{"name": "primary law for b(-1)|0>, rho=%s" % rho, **primary_transform_check(rho, A, deg, order).as_dict()}]
    try:
        primary_transform_check(rho, omega(), deg, order)
        out.append({"name": "omega rejected as non-primary", "ok": False, "checked": 1, "detail": "accepted"})
    except ValueError as exc:
        out.append({"name": "omega rejected as non-primary", "ok": True, "checked": 1, "detail": str(exc)})
    return out


def _suite_orbit(args):
    from .coords import CoordChange
    from .heisenberg import TWISTED, Sector
    from .orbit import (
        build_orbit_module,
        cocycle_check,
        intertwiner_check,
        involution_consistency_check,
        pushforward_check,
        section_coordinate_independence_check,
    )
    from .scalars import Surd

    deg = 3 if args.deg is None else args.deg
    states = _states(2)
    orbits = [
        ("ramified pi^sigma", build_orbit_module("ramified", TWISTED), CoordChange.from_coefficients([1, 1], 2)),
        ("unramified pi^0", build_orbit_module("unramified", Sector(False, Fraction(0))), CoordChange.from_coefficients([1, 1], 1)),
        ("unramified pi^1", build_orbit_module("unramified", Sector(False, Fraction(1))), CoordChange.from_coefficients([1, 1], 1)),
        ("unramified pi^sqrt(2)", build_orbit_module("unramified", Sector(False, Surd(0, 1, 2))), CoordChange.from_coefficients([1, 1], 1)),
    ]
    out = []
    for name, orb, rho in orbits:
        for label, w in (
            ("cocycle", cocycle_check(orb, deg)),
            ("intertwiner", intertwiner_check(orb, states, deg)),
            ("involution consistency", involution_consistency_check(orb, states, deg)),
            ("pushforward", pushforward_check(orb, states, deg)),
            ("coordinate independence", section_coordinate_independence_check(orb, rho, states[1], min(deg, 2))),
        ):
            out.append({"name": "%s: %s" % (name, label), **w.as_dict()})
    return out


def _suite_parity(args):
    from fractions import Fraction as F

    from .blocks import parity_annihilation_check
    from .curve import MarkedPoint, two_branch_config
    from .scalars import Surd

    P = 7 if args.pole_bound is None else args.pole_bound
    deg = 2 if args.deg is None else args.deg
    base = two_branch_config()
    cfgs = [
        ("pi_sigma at 0, inf", base),
        ("+ pi^0 at s=1", base.with_point(MarkedPoint(F(1), "pi_lambda", F(0)))),
        ("+ pi^sqrt(2) at s=4", base.with_point(MarkedPoint(F(4), "pi_lambda", Surd(0, 1, 2)))),
    ]
    return [{"name": "even functions act by zero, %s" % n, **parity_annihilation_check(c, P, deg).as_dict()} for n, c in cfgs]


_SUITE_FNS = {
    "commutator": _suite_commutator,
    "ta-lemma": _suite_ta,
    "transform": _suite_transform,
    "primary": _suite_primary,
    "orbit": _suite_orbit,
    "parity": _suite_parity,
}


def cmd_verify(args) -> int:
    results = _SUITE_FNS[args.suite](args)
    ok = all(r["ok"] for r in results)
    cut = {k: (format_scalar(v) if isinstance(v, Fraction) else v) for k, v in
           (("deg", args.deg), ("modes", args.modes), ("order", args.order), ("pole_bound", args.pole_bound)) if v is not None}
    doc = {
        "manifest": asdict(RunManifest("verify " + args.suite, cutoffs=cut, format=args.format)),
        "suite": args.suite,
        "ok": ok,
        "witnesses": results,
    }
    rows = [(r["name"], "PASS" if r["ok"] else "FAIL", r["checked"], r["detail"]) for r in results]
    _emit(doc, args.format, rows, ("identity", "result", "checked", "detail"))
    return 0 if ok else 1


# -- blocks --------------------------------------------------------------------------


def _load_config(text: str) -> dict:
    if text.lstrip().startswith("{"):
        return json.loads(text)
    return json.loads(Path(text).read_text())


def cmd_blocks(args) -> int:
    from .blocks import coinvariant_dims
    from .curve import CoverConfig

    raw = _load_config(args.config)
    cfg = CoverConfig.from_dict(raw)
    D = cfg.degree_cutoff if args.deg is None else args.deg
    P = cfg.pole_bound if args.pole_bound is None else args.pole_bound
    table = coinvariant_dims(cfg, D, P)
    doc = {
        "manifest": asdict(RunManifest("blocks", raw, {"deg": D, "pole_bound": P}, args.format)),
        "family": cfg.family,
        **table.as_dict(),
    }
    rows = [(format_scalar(d), n) for d, n in sorted(table.dims.items())]
    _emit(doc, args.format, rows, ("degree", "dimension"))
    if args.format == "tsv":
        sys.stdout.write("# pole_bound=%d stable=%s\n" % (P, str(table.stable).lower()))
    return 0


# -- entry point -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistvoa", description="Exact computations for the twisted free boson on a double cover.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "tsv"), default="json")
        sp.add_argument("--threads", type=int, default=1, help="bound on parallel workers")

    d = sub.add_parser("delta", help="coefficients c_mn of the Delta_z generating function")
    d.add_argument("--order", type=_nonneg_int, required=True, help="total degree m+n")
    common(d)
    d.set_defaults(fn=cmd_delta)

    v = sub.add_parser("verify", help="check an identity family on finite slices")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--deg", type=_nonneg_int, default=None, help="slice degree cutoff")
    v.add_argument("--modes", type=_fraction, default=None, help="mode bound |m|, |k| (commutator)")
    v.add_argument("--order", type=_nonneg_int, default=None, help="truncation order / window radius (transform, primary)")
    v.add_argument("--rho", default=None, help="coefficient list of rho, e.g. 1,0,1")
    v.add_argument("--pole-bound", type=_nonneg_int, default=None, dest="pole_bound")
    common(v)
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("blocks", help="graded coinvariant dimensions for a cover configuration")
    b.add_argument("config", help="path to a JSON config, or the JSON text itself")
    b.add_argument("--deg", type=_nonneg_int, default=None)
    b.add_argument("--pole-bound", type=_nonneg_int, default=None, dest="pole_bound")
    common(b)
    b.set_defaults(fn=cmd_blocks)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
