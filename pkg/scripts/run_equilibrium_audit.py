"""Enumerate equilibria of the default common-interest game to results/."""

import argparse
import json
from pathlib import Path

from citysim.cli import equilibrium_audit


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results/equilibria"))
    args = parser.parse_args()
    print(json.dumps(equilibrium_audit(args.out), indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
