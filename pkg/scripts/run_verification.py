#!/usr/bin/env python3
"""Run every verification suite over a bias grid and summarize exit codes."""

import argparse
import sys

from walshlab.cli import run_command


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", type=int, default=3)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 0.3, 0.1])
    args = ap.parse_args()

    failures = 0
    for alpha in args.alphas:
        for suite in ("walsh", "expectations", "identity", "blocks"):
            print(f"== suite={suite} level={args.level} alpha={alpha}")
            code = run_command(
                ["verify", "--suite", suite, "--level", str(args.level), "--alpha", str(alpha)]
            )
            failures += code != 0
    print(f"suites failed: {failures}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
