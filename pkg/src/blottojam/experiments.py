"""Experiment drivers: payoff traces, strategy evolution, network-size sweeps.

Every driver is a pure function of its :class:`ExperimentSpec`; the master seed
fixes all numbers, and sweep cells may run in any order or in parallel.

Within a sweep, cells that share a jammer budget share an evolution seed (common
random numbers): every network size starts from the same initial weights, so
differences along the M axis come from M rather than from sampling noise.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import evolution
from .blotto import GameConfig, nash_gaps
from .channel import expected_ber, success_probability
from .errors import ConfigurationError
from .evolution import EvolutionParams, EvolutionTrace

_CELL_STREAM = 2
_BASELINE_STREAM = 3

# reference figures printed next to our results for comparison
REPORTED_EVOLVED_PAYOFF = 0.96
REPORTED_RANDOM_PAYOFF = 0.75
REPORTED_GAIN = 0.3067


@dataclass(frozen=True)
class ExperimentSpec:
    base: GameConfig
    evolution: EvolutionParams
    sweep_m: tuple = ()
    sweep_p_j_watts: tuple = ()
    baseline_trials: int = 1000
    ber_nodes: int = 32

    def __post_init__(self):
        object.__setattr__(self, "sweep_m", tuple(self.sweep_m))
        object.__setattr__(self, "sweep_p_j_watts", tuple(self.sweep_p_j_watts))
        if self.baseline_trials < 1:
            raise ConfigurationError(f"baseline_trials must be >= 1, got {self.baseline_trials!r}")
        if any(m < 1 or int(m) != m for m in self.sweep_m):
            raise ConfigurationError(f"sweep_m values must be positive integers, got {self.sweep_m!r}")
        if any(not p > 0 for p in self.sweep_p_j_watts):
            raise ConfigurationError(f"sweep_p_j_watts values must be > 0, got {self.sweep_p_j_watts!r}")

    def cells(self) -> list:
        """``(M, P_J, row)`` triples, ``row`` indexing the jammer budget.

        Missing sweep axes fall back to the base config.
        """
        ms = self.sweep_m or (self.base.m_subcarriers,)
        pjs = self.sweep_p_j_watts or (self.base.p_j_watts,)
        return [(int(m), float(pj), row) for row, pj in enumerate(pjs) for m in ms]


def derived_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint32)[0])


def random_baseline(cfg: GameConfig, trials: int, rng: np.random.Generator, chunk: int = 256) -> float:
    """Mean success fraction when both sides split their budgets uniformly at random.

    Each trial draws both allocation vectors from the flat Dirichlet over the
    ``M`` subcarriers scaled by the budget, and scores the gain-averaged success
    probability on every subcarrier.
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials!r}")
    m = cfg.m_subcarriers
    alpha = np.ones(m)
    total = 0.0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        p = cfg.p_ap_watts * rng.dirichlet(alpha, size=n)
        j = cfg.p_j_watts * rng.dirichlet(alpha, size=n)
        total += float(np.sum(success_probability(p, j, cfg.radio)))
        done += n
    return total / (trials * m)


def baseline_for(spec: ExperimentSpec, cfg: Optional[GameConfig] = None, key: int = 0) -> float:
    rng = np.random.default_rng(np.random.SeedSequence(spec.evolution.seed, spawn_key=(_BASELINE_STREAM, key)))
    return random_baseline(cfg or spec.base, spec.baseline_trials, rng)


@dataclass
class PayoffTrace:
    trace: EvolutionTrace
    baseline_ap: float
    cfg: GameConfig
    params: EvolutionParams

    @property
    def final_payoff_ap(self) -> float:
        return float(self.trace.mean_payoff_ap[-1])

    @property
    def gain_over_baseline(self) -> float:
        return self.final_payoff_ap / self.baseline_ap - 1.0


def run_payoff_trace(spec: ExperimentSpec) -> PayoffTrace:
    trace = evolution.run(spec.evolution, spec.base)
    return PayoffTrace(trace, baseline_for(spec), spec.base, spec.evolution)


def run_strategy_evolution(spec: ExperimentSpec, trace: Optional[EvolutionTrace] = None) -> np.ndarray:
    """Population-average AP strategy per iteration (one row per iteration)."""
    if spec.evolution.l_levels != 5:
        raise ConfigurationError(f"strategy evolution is reported on 5 levels, got l_levels={spec.evolution.l_levels}")
    if trace is None:
        trace = evolution.run(spec.evolution, spec.base)
    return trace.avg_ap


def system_ber(trace: EvolutionTrace, cfg: GameConfig, n_nodes: int = 32) -> float:
    """Expected BER under the product of the final population-average strategies."""
    f, h = trace.avg_ap[-1], trace.avg_jammer[-1]
    ber = expected_ber(trace.ap_grid.levels[:, None], trace.j_grid.levels[None, :], cfg.radio, n_nodes=n_nodes)
    return float(f @ ber @ h)


@dataclass(frozen=True)
class SweepRow:
    m: int
    p_j_watts: float
    payoff_ap: float
    payoff_jammer: float
    ber: float
    jammer_variance: float
    iters: int
    converged: bool
    baseline_ap: float

    def check(self) -> None:
        if not (0 <= self.payoff_ap <= 1 and 0 <= self.payoff_jammer <= 1):
            raise ValueError(f"payoffs out of [0, 1]: {self}")
        if abs(self.payoff_ap + self.payoff_jammer - 1) > 1e-9:
            raise ValueError(f"payoffs are not complementary: {self}")
        if not 0 <= self.ber <= 0.5:
            raise ValueError(f"BER out of [0, 0.5]: {self}")


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def at_p_j(self, p_j_watts: float) -> "SweepResult":
        return SweepResult([r for r in self.rows if r.p_j_watts == p_j_watts])


def _run_cell(args) -> SweepRow:
    spec, index, m, p_j, replicate = args
    cfg = replace(spec.base, m_subcarriers=m, p_j_watts=p_j)
    params = replace(spec.evolution, seed=derived_seed(spec.evolution.seed, _CELL_STREAM, replicate))
    trace = evolution.run(params, cfg)
    h = trace.final_jammer_strategy()
    out = SweepRow(
        m=m,
        p_j_watts=p_j,
        payoff_ap=float(trace.mean_payoff_ap[-1]),
        payoff_jammer=float(trace.mean_payoff_jammer[-1]),
        ber=system_ber(trace, cfg, spec.ber_nodes),
        jammer_variance=h.variance(),
        iters=trace.iterations,
        converged=trace.converged,
        baseline_ap=baseline_for(spec, cfg, key=index),
    )
    out.check()
    return out


def sweep_network_size(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    """Evolve every (M, P_J) cell to convergence and collect the summary metrics."""
    jobs = [(spec, i, *cell) for i, cell in enumerate(spec.cells())]
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        rows = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_run_cell, jobs))
    return SweepResult(rows)


# -- export ---------------------------------------------------------------

TRACE_HEADER = ["iter", "mean_payoff_ap", "mean_payoff_jammer", "baseline_ap"]
SWEEP_HEADER = ["m", "p_j_watts", "payoff_ap", "payoff_jammer", "ber", "jammer_variance", "iters", "baseline_ap"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def trace_csv(result: PayoffTrace) -> str:
    tr = result.trace
    rows = (
        (t, tr.mean_payoff_ap[t], tr.mean_payoff_jammer[t], result.baseline_ap) for t in range(tr.iterations)
    )
    return _csv_text(TRACE_HEADER, rows)


def strategy_csv(avg_ap: np.ndarray) -> str:
    header = ["iter"] + [f"level_{k}" for k in range(avg_ap.shape[1])]
    return _csv_text(header, ((t, *row) for t, row in enumerate(avg_ap)))


def sweep_csv(result: SweepResult) -> str:
    rows = (
        (r.m, r.p_j_watts, r.payoff_ap, r.payoff_jammer, r.ber, r.jammer_variance, r.iters, r.baseline_ap)
        for r in result.rows
    )
    return _csv_text(SWEEP_HEADER, rows)


def read_csv(path) -> tuple[list, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def export_trace(result: PayoffTrace, out_dir) -> Path:
    return _write(Path(out_dir) / "trace.csv", trace_csv(result))


def export_strategy(avg_ap: np.ndarray, out_dir) -> Path:
    return _write(Path(out_dir) / "strategy.csv", strategy_csv(avg_ap))


def export_sweep(result: SweepResult, out_dir) -> Path:
    return _write(Path(out_dir) / "sweep.csv", sweep_csv(result))


def summary_text(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n"


def export_summary(summary: dict, out_dir) -> Path:
    return _write(Path(out_dir) / "summary.json", summary_text(summary))


def read_summary(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def trace_metrics(result: PayoffTrace) -> dict:
    tr = result.trace
    f, h = tr.final_ap_strategy(), tr.final_jammer_strategy()
    gaps = nash_gaps(f, h, result.cfg)
    return {
        "converged": bool(tr.converged),
        "iterations": int(tr.iterations),
        "final_payoff_ap": float(tr.mean_payoff_ap[-1]),
        "final_payoff_jammer": float(tr.mean_payoff_jammer[-1]),
        "baseline_ap": float(result.baseline_ap),
        "gain_over_baseline": float(result.gain_over_baseline),
        "ap_levels_watts": [float(x) for x in tr.ap_grid.levels],
        "jammer_levels_watts": [float(x) for x in tr.j_grid.levels],
        "ap_strategy": [float(x) for x in f.probs],
        "jammer_strategy": [float(x) for x in h.probs],
        "jammer_variance": float(h.variance()),
        "nash_gap_ap": float(gaps.ap_gap),
        "nash_gap_jammer": float(gaps.jammer_gap),
        "reported_reference": {
            "evolved_payoff": REPORTED_EVOLVED_PAYOFF,
            "random_payoff": REPORTED_RANDOM_PAYOFF,
            "gain": REPORTED_GAIN,
        },
    }


def sweep_metrics(result: SweepResult) -> dict:
    return {
        "cells": len(result.rows),
        "all_converged": all(r.converged for r in result.rows),
        "rows": [
            {
                "m": r.m,
                "p_j_watts": r.p_j_watts,
                "payoff_ap": r.payoff_ap,
                "ber": r.ber,
                "jammer_variance": r.jammer_variance,
                "iters": r.iters,
                "converged": r.converged,
                "baseline_ap": r.baseline_ap,
            }
            for r in result.rows
        ],
    }
