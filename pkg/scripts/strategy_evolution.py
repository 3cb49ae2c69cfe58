"""Population-average AP strategy on five power levels, one row per iteration.

    python3 scripts/strategy_evolution.py --config configs/desk.json --out results/strategy
"""

import argparse
from pathlib import Path

from blottojam import experiments
from blottojam.cli import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/desk.json")
    ap.add_argument("--out", default="results/strategy_evolution")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()

    cfg = parse_config(args.config, ["l_levels=5"], seed=args.seed)
    spec = cfg.experiment()
    rows = experiments.run_strategy_evolution(spec)
    experiments.export_strategy(rows, Path(args.out))

    levels_mw = spec.base.ap_grid(5).levels * 1e3
    print("iter  " + "  ".join(f"{x:6.2f}mW" for x in levels_mw))
    for t, row in enumerate(rows):
        print(f"{t:4d}  " + "  ".join(f"{p:8.4f}" for p in row))


if __name__ == "__main__":
    main()
