"""Run every bench preset at one tier and collect the summaries.

    python3 scripts/run_presets.py --tier desk --out runs/desk
"""

import argparse
import sys

from pinnmg.cli import PRESETS, TIERS, dispatch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tier", choices=TIERS, default="desk")
    ap.add_argument("--out", default="runs")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=PRESETS, default=list(PRESETS))
    args = ap.parse_args()
    failed = []
    for preset in args.only:
        print(f"== {preset}", flush=True)
        code = dispatch(["bench", preset, "--tier", args.tier, "--out", args.out,
                         "--repeats", str(args.repeats), "--seeds", str(args.seeds)])
        if code:
            failed.append(preset)
    if failed:
        print("failed presets:", " ".join(failed))
        sys.exit(1)


if __name__ == "__main__":
    main()
