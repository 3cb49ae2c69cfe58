"""Evolved vs. random-allocation AP payoff per iteration (trace.csv, summary.json).

    python3 scripts/payoff_trace.py --config configs/desk.json --out results/desk
"""

import argparse
from pathlib import Path

from blottojam import experiments
from blottojam.cli import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/desk.json")
    ap.add_argument("--out", default="results/payoff_trace")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()

    cfg = parse_config(args.config, seed=args.seed)
    result = experiments.run_payoff_trace(cfg.experiment())
    out = Path(args.out)
    experiments.export_trace(result, out)
    metrics = experiments.trace_metrics(result)
    experiments.export_summary({"config": cfg.to_dict(), "seed": cfg.seed, "metrics": metrics}, out)

    tr = result.trace
    for t in range(tr.iterations):
        print(f"{t:4d}  AP {tr.mean_payoff_ap[t]:.4f}  jammer {tr.mean_payoff_jammer[t]:.4f}")
    print(f"baseline {result.baseline_ap:.4f}, gain {result.gain_over_baseline:+.1%} "
          f"(reported {experiments.REPORTED_EVOLVED_PAYOFF} vs {experiments.REPORTED_RANDOM_PAYOFF})")


if __name__ == "__main__":
    main()
