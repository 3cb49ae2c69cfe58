"""AP payoff, system BER and jammer variance versus the number of subcarriers.

    python3 scripts/network_sweep.py --config configs/sweep.json --out results/sweep --workers 0
"""

import argparse
from pathlib import Path

from scipy.stats import spearmanr

from blottojam import experiments
from blottojam.cli import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/sweep.json")
    ap.add_argument("--out", default="results/network_sweep")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1, help="0 = one per CPU")
    args = ap.parse_args()

    cfg = parse_config(args.config, seed=args.seed)
    spec = cfg.experiment()
    result = experiments.sweep_network_size(spec, workers=args.workers)
    out = Path(args.out)
    experiments.export_sweep(result, out)
    experiments.export_summary(
        {"config": cfg.to_dict(), "seed": cfg.seed, "metrics": experiments.sweep_metrics(result)}, out
    )

    for pj in spec.sweep_p_j_watts:
        part = result.at_p_j(pj)
        m = part.column("m")
        print(f"P_J = {pj * 1e3:g} mW")
        for r in part.rows:
            print(f"  M={r.m:4d}  payoff {r.payoff_ap:.4f}  BER {r.ber:.3e}  "
                  f"jammer var {r.jammer_variance:.3e}  baseline {r.baseline_ap:.4f}")
        print(f"  Spearman: payoff {spearmanr(m, part.column('payoff_ap')).statistic:+.2f}, "
              f"BER {spearmanr(m, part.column('ber')).statistic:+.2f}")


if __name__ == "__main__":
    main()
