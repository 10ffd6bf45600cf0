#!/usr/bin/env python3
"""Run theorem checks and print one line per check, plus any witnesses.

    python scripts/run_harness.py                 # everything
    python scripts/run_harness.py thm-2.4 thm-3.2
    python scripts/run_harness.py --replay        # re-evaluate each witness
"""
import argparse
import sys
import time

from summaprob import harness


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("ids", nargs="*", help="check ids (default: all)")
    ap.add_argument("--replay", action="store_true", help="replay witnesses and confirm they reproduce")
    ap.add_argument("--details", action="store_true", help="print per-check notes")
    args = ap.parse_args(argv)

    unknown = [i for i in args.ids if i not in harness.CHECKS]
    if unknown:
        ap.error(f"unknown check id(s): {', '.join(unknown)}; known: {', '.join(sorted(harness.CHECKS))}")

    t0 = time.perf_counter()
    failed = 0
    for report in harness.run_all(args.ids or None):
        print(report.line(), flush=True)
        if args.details:
            for d in report.details:
                print(f"    {d}")
        for w in report.witnesses:
            print(f"    witness {w.describe()}")
            if args.replay:
                print(f"    replay reproduces: {w.reproduces()}")
        failed += report.outcome == "fail"
    print(f"{failed} failing check(s), {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
