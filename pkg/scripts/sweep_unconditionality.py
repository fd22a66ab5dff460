#!/usr/bin/env python3
"""Sign-sweep experiments over an (exponent, bias) grid, one CSV per cell."""

import argparse
import pathlib
import sys

from walshlab.cli import run_command


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", type=int, default=2)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 0.3, 0.1])
    ap.add_argument("--ps", type=float, nargs="+", default=[2.0, 4.0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="out/unconditionality")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for alpha in args.alphas:
        for p in args.ps:
            out = outdir / f"signs_m{args.level}_a{alpha}_p{p}.csv"
            argv = [
                "unconditionality",
                "--level", str(args.level),
                "--alpha", str(alpha),
                "--p", str(p),
                "--mode", "exhaustive",
                "--trials", str(args.trials),
                "--seed", str(args.seed),
                "--out", str(out),
            ]
            print("::", " ".join(argv))
            code = run_command(argv)
            if code != 0:
                return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
