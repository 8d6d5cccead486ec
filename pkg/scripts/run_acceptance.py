"""Run the twelve acceptance checks and print one PASS/FAIL line each.

    python scripts/run_acceptance.py            # all criteria
    python scripts/run_acceptance.py 1 2 9      # a subset
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from test_acceptance import CRITERIA, run  # noqa: E402


def main(argv):
    wanted = {int(a) for a in argv} or {c[0] for c in CRITERIA}
    results = [run(*c) for c in CRITERIA if c[0] in wanted]
    print("%d/%d passed" % (sum(results), len(results)))
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
