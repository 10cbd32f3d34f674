"""Run every declared check suite over the bundled corpus and print reports.

Usage:  python3 scripts/run_corpus_checks.py [--seed 0xC0FFEE]
Exits nonzero if any suite fails, so it doubles as a smoke gate.
"""

import argparse
import sys

from clmech.corpus import bundled_corpus
from clmech.sampling import DEFAULT_SEED
from clmech.suites import format_report, run_suites


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    args = parser.parse_args()

    failed = 0
    for sc in bundled_corpus():
        results = run_suites(sc, sc.checks, seed=args.seed)
        print(format_report(results, args.seed))
        failed += sum(not r.passed for r in results)
    print(f"corpus: {failed} failing suite(s)")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
