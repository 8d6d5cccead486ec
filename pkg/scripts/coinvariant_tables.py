"""Graded coinvariant tables for the sample configurations, with pole-bound scans.

For each config the table is printed for P = 1, 3, 5, ... up to --limit, so the
point where it stops changing is visible.
"""

import argparse
from pathlib import Path

from twistvoa.blocks import coinvariant_table
from twistvoa.curve import CoverConfig
from twistvoa.scalars import format_scalar

HERE = Path(__file__).resolve().parent


def row(dims):
    return "  ".join("%s:%d" % (format_scalar(d), n) for d, n in sorted(dims.items()))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--limit", type=int, default=7)
    ap.add_argument("--deg", type=int, default=None)
    args = ap.parse_args()
    paths = args.configs or sorted(p for p in (HERE / "configs").glob("*.json") if "critical" not in p.name)
    for path in paths:
        cfg = CoverConfig.from_json(path.read_text())
        D = cfg.degree_cutoff if args.deg is None else args.deg
        print("%s  (D=%d)" % (path.name, D))
        for P in range(1, args.limit + 1, 2):
            t = coinvariant_table(cfg, D, P)
            print("  P=%-2d %s" % (P, row(t.dims)))


if __name__ == "__main__":
    main()
