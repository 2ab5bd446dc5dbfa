"""Sweep the learning-rate multiplier and tabulate time-to-plateau.

Runs the mutation-free sweep preset at each multiplier for several seeds,
then pools the (multiplier, plateau time) pairs into a Spearman rank
correlation. The expected signature is strongly negative: faster societal
adaptation reaches its plateau sooner.
"""

import argparse
from pathlib import Path

from scipy.stats import spearmanr

from citysim.cli import sweep_lambda
from citysim.presets import get_preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="lambda-sweep")
    parser.add_argument("--multipliers", default="1,3,10,30")
    parser.add_argument("--seeds", type=int, default=3, help="number of seeds, from 0")
    parser.add_argument("--out", type=Path, default=Path("results/lambda_sweep"))
    args = parser.parse_args()

    multipliers = [float(tok) for tok in args.multipliers.split(",") if tok.strip()]
    pooled_m: list[float] = []
    pooled_t: list[float] = []
    for seed in range(args.seeds):
        scenario = get_preset(args.preset, seed=seed)
        rows = sweep_lambda(scenario, multipliers, args.out / f"seed-{seed}")
        for row in rows:
            print(
                f"seed {seed} multiplier {row['multiplier']:>4}: "
                f"plateau at t={row['time_to_plateau']}, "
                f"level {row['plateau_happiness']}"
            )
            pooled_m.append(float(row["multiplier"]))
            pooled_t.append(float(row["time_to_plateau"]))
    rho = spearmanr(pooled_m, pooled_t).statistic
    print(f"pooled spearman rho (multiplier vs time-to-plateau): {rho:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
