"""Optimal vs noisy matchmaking over paired seeds; prints both deltas."""

import argparse
import json
from pathlib import Path

from citysim.cli import compare_matching
from citysim.presets import get_preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="matching-comparison")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--out", type=Path, default=Path("results/matching_comparison"))
    args = parser.parse_args()

    scenario = get_preset(args.preset)
    report = compare_matching(scenario, args.seeds, args.out)
    print(json.dumps(report["paired_means"], indent=2))
    for metric, direction in report["direction"].items():
        diff = report["differences_noisy_minus_optimal"][metric]
        print(f"{metric}: noisy - optimal = {diff:+.4f} ({direction})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
