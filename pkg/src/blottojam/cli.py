"""Command-line entry point.

Configuration is a JSON object whose keys carry their units (``n0_dbm``,
``tau_db``, ``p_ap_watts`` ...). dB and dBm values are converted to linear
units when the domain objects are built here, and nowhere else.

Exit codes: 0 success, 1 failed equilibrium verification, 2 configuration or
I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional


from . import evolution, experiments
from .blotto import GameConfig, MixedStrategy, PowerGrid, nash_gaps
from .channel import ChannelKind, RadioParams, db_to_linear, dbm_to_watts
from .errors import ConfigurationError
from .evolution import EvolutionParams
from .experiments import ExperimentSpec

REQUIRED = object()


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _positive(v):
    return _is_num(v) and v > 0


def _int_at_least(n):
    return lambda v: _is_int(v) and v >= n


def _optional_factor(v):
    return v is None or (_is_num(v) and v >= 1)


def _list_of(check):
    return lambda v: isinstance(v, list) and all(check(x) for x in v)


# key -> (default, validator, description of the valid range)
SCHEMA = {
    "n0_dbm": (REQUIRED, _is_num, "a finite number"),
    "tau_db": (REQUIRED, _is_num, "a finite number"),
    "p_ap_watts": (REQUIRED, _positive, "a number > 0"),
    "p_j_watts": (REQUIRED, _positive, "a number > 0"),
    "m_subcarriers": (REQUIRED, _int_at_least(1), "an integer >= 1"),
    "seed": (REQUIRED, _int_at_least(0), "an integer >= 0"),
    "mean_gain_ap": (1.0, _positive, "a number > 0"),
    "mean_gain_jammer": (1.0, _positive, "a number > 0"),
    "channel_kind": ("rayleigh", lambda v: v in [k.value for k in ChannelKind], "'deterministic' or 'rayleigh'"),
    "k_ap": (100, _int_at_least(2), "an integer >= 2"),
    "k_j": (100, _int_at_least(2), "an integer >= 2"),
    "xi": (1.25e-3, lambda v: _is_num(v) and 0 <= v <= 1, "a number in [0, 1]"),
    "q": (0.01, _positive, "a number > 0"),
    "l_levels": (5, _int_at_least(3), "an integer >= 3"),
    "max_iters": (1000, _int_at_least(1), "an integer >= 1"),
    "conv_eps": (1e-3, lambda v: _is_num(v) and v >= 0, "a number >= 0"),
    "conv_window": (10, _int_at_least(1), "an integer >= 1"),
    "baseline_trials": (1000, _int_at_least(1), "an integer >= 1"),
    "ap_grid_hi_factor": (None, _optional_factor, "null or a number >= 1"),
    "j_grid_hi_factor": (None, _optional_factor, "null or a number >= 1"),
    "ap_floor": (False, lambda v: isinstance(v, bool), "true or false"),
    "sweep_m_subcarriers": ([32, 64, 128, 256, 512], _list_of(_int_at_least(1)), "a list of integers >= 1"),
    "sweep_p_j_watts": ([0.05, 0.1, 0.2], _list_of(_positive), "a list of numbers > 0"),
    "epsilon": (0.05, lambda v: _is_num(v) and v >= 0, "a number >= 0"),
    "ber_nodes": (32, _int_at_least(2), "an integer >= 2"),
}


@dataclass(frozen=True)
class CliConfig:
    n0_dbm: float
    tau_db: float
    p_ap_watts: float
    p_j_watts: float
    m_subcarriers: int
    seed: int
    mean_gain_ap: float = 1.0
    mean_gain_jammer: float = 1.0
    channel_kind: str = "rayleigh"
    k_ap: int = 100
    k_j: int = 100
    xi: float = 1.25e-3
    q: float = 0.01
    l_levels: int = 5
    max_iters: int = 1000
    conv_eps: float = 1e-3
    conv_window: int = 10
    baseline_trials: int = 1000
    ap_grid_hi_factor: Optional[float] = None
    j_grid_hi_factor: Optional[float] = None
    ap_floor: bool = False
    sweep_m_subcarriers: list = field(default_factory=lambda: [32, 64, 128, 256, 512])
    sweep_p_j_watts: list = field(default_factory=lambda: [0.05, 0.1, 0.2])
    epsilon: float = 0.05
    ber_nodes: int = 32

    def to_dict(self) -> dict:
        return asdict(self)

    def radio(self) -> RadioParams:
        return RadioParams(
            n0_watts=float(dbm_to_watts(self.n0_dbm)),
            tau_linear=float(db_to_linear(self.tau_db)),
            mean_gain_ap=self.mean_gain_ap,
            mean_gain_jammer=self.mean_gain_jammer,
            channel_kind=ChannelKind(self.channel_kind),
        )

    def game(self) -> GameConfig:
        return GameConfig(
            m_subcarriers=self.m_subcarriers,
            p_ap_watts=self.p_ap_watts,
            p_j_watts=self.p_j_watts,
            radio=self.radio(),
            ap_grid_hi_factor=self.ap_grid_hi_factor,
            j_grid_hi_factor=self.j_grid_hi_factor,
            ap_floor=self.ap_floor,
        )

    def evolution(self) -> EvolutionParams:
        return EvolutionParams(
            k_ap=self.k_ap,
            k_j=self.k_j,
            xi=self.xi,
            q=self.q,
            l_levels=self.l_levels,
            max_iters=self.max_iters,
            conv_eps=self.conv_eps,
            conv_window=self.conv_window,
            seed=self.seed,
        )

    def experiment(self) -> ExperimentSpec:
        return ExperimentSpec(
            base=self.game(),
            evolution=self.evolution(),
            sweep_m=tuple(self.sweep_m_subcarriers),
            sweep_p_j_watts=tuple(self.sweep_p_j_watts),
            baseline_trials=self.baseline_trials,
            ber_nodes=self.ber_nodes,
        )

    def resolved(self) -> dict:
        radio = self.radio()
        return {"n0_watts": radio.n0_watts, "tau_linear": radio.tau_linear}


assert [f.name for f in fields(CliConfig)] == list(SCHEMA)


def config_from_dict(doc: dict, source: str = "config") -> CliConfig:
    """Validate a config mapping, apply defaults and build a :class:`CliConfig`."""
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{source}: expected a JSON object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(SCHEMA))
    if unknown:
        raise ConfigurationError(f"{source}: {unknown[0]}: unknown key")
    values = {}
    for key, (default, check, expected) in SCHEMA.items():
        if key not in doc:
            if default is REQUIRED:
                raise ConfigurationError(f"{source}: {key}: missing required key")
            values[key] = list(default) if isinstance(default, list) else default
            continue
        value = doc[key]
        if not check(value):
            raise ConfigurationError(f"{source}: {key}: expected {expected}, got {value!r}")
        if isinstance(default, float) and _is_int(value):
            value = float(value)
        values[key] = value
    for key in ("n0_dbm", "tau_db", "p_ap_watts", "p_j_watts"):
        values[key] = float(values[key])
    cfg = CliConfig(**values)
    try:
        spec = cfg.experiment()
        spec.base.ap_grid(cfg.l_levels)
        spec.base.jammer_grid(cfg.l_levels)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None
    return cfg


def load_document(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON: {exc}") from None


def parse_config(path, overrides=(), seed: Optional[int] = None) -> CliConfig:
    """Read a JSON config file, apply ``key=value`` overrides and validate it."""
    doc = load_document(path)
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set {item!r}: expected key=value")
        try:
            doc[key] = json.loads(raw)
        except json.JSONDecodeError:
            doc[key] = raw
    if seed is not None:
        doc["seed"] = seed
    return config_from_dict(doc, source=str(path))


def serialize_config(cfg: CliConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


def worker_count() -> int:
    raw = os.environ.get("BLOTTO_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"BLOTTO_THREADS: expected an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigurationError(f"BLOTTO_THREADS: expected >= 0, got {n}")
    return n


def _summary(command: str, cfg: CliConfig, metrics: dict) -> dict:
    return {
        "command": command,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "resolved": cfg.resolved(),
        "metrics": metrics,
    }


def cmd_run(cfg: CliConfig, out: Path, args) -> int:
    spec = cfg.experiment()
    result = experiments.run_payoff_trace(spec)
    experiments.export_trace(result, out)
    experiments.export_strategy(result.trace.avg_ap, out)
    metrics = experiments.trace_metrics(result)
    experiments.export_summary(_summary("run", cfg, metrics), out)
    print(
        f"iterations={metrics['iterations']} converged={metrics['converged']} "
        f"payoff_ap={metrics['final_payoff_ap']:.4f} baseline_ap={metrics['baseline_ap']:.4f} "
        f"gain={metrics['gain_over_baseline']:+.2%} "
        f"(reported: {experiments.REPORTED_EVOLVED_PAYOFF:.2f} vs {experiments.REPORTED_RANDOM_PAYOFF:.2f}, "
        f"gain {experiments.REPORTED_GAIN:+.2%})"
    )
    return 0


def cmd_sweep(cfg: CliConfig, out: Path, args) -> int:
    result = experiments.sweep_network_size(cfg.experiment(), workers=worker_count())
    experiments.export_sweep(result, out)
    experiments.export_summary(_summary("sweep", cfg, experiments.sweep_metrics(result)), out)
    for r in result.rows:
        print(
            f"M={r.m:4d} P_J={r.p_j_watts:g} W payoff_ap={r.payoff_ap:.4f} ber={r.ber:.4g} "
            f"jammer_var={r.jammer_variance:.4g} iters={r.iters} baseline={r.baseline_ap:.4f}"
        )
    return 0


def cmd_baseline(cfg: CliConfig, out: Path, args) -> int:
    value = experiments.baseline_for(cfg.experiment())
    experiments.export_summary(_summary("baseline", cfg, {"baseline_ap": value}), out)
    print(f"baseline_ap={value:.6f}")
    return 0


def _strategies_from_summary(path, game: GameConfig):
    doc = experiments.read_summary(path)
    try:
        m = doc["metrics"]
        f = MixedStrategy(PowerGrid(m["ap_levels_watts"]), m["ap_strategy"])
        h = MixedStrategy(PowerGrid(m["jammer_levels_watts"]), m["jammer_strategy"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"{path}: not a run summary ({exc})") from None
    return f, h


def cmd_verify(cfg: CliConfig, out: Path, args) -> int:
    game = cfg.game()
    epsilon = cfg.epsilon if args.epsilon is None else args.epsilon
    if epsilon < 0:
        raise ConfigurationError(f"--epsilon: expected a number >= 0, got {epsilon!r}")
    if args.source is not None:
        f, h = _strategies_from_summary(args.source, game)
    else:
        trace = evolution.run(cfg.evolution(), game)
        f, h = trace.final_ap_strategy(), trace.final_jammer_strategy()
    gaps = nash_gaps(f, h, game)
    ok = gaps.within(epsilon)
    report = {
        "epsilon": epsilon,
        "passed": ok,
        "payoff_ap": gaps.payoff_ap,
        "best_response_ap": gaps.best_ap,
        "best_response_jammer": gaps.best_jammer,
        "gap_ap": gaps.ap_gap,
        "gap_jammer": gaps.jammer_gap,
    }
    experiments._write(out / "verify.json", experiments.summary_text(_summary("verify", cfg, report)))
    print(
        f"epsilon-Nash {'PASS' if ok else 'FAIL'}: gap_ap={gaps.ap_gap:.4g} "
        f"gap_jammer={gaps.jammer_gap:.4g} epsilon={epsilon:g}"
    )
    return 0 if ok else 1


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "baseline": cmd_baseline, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blottojam", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "evolve one configuration; write trace.csv, strategy.csv, summary.json"),
        ("sweep", "network-size sweep; write sweep.csv, summary.json"),
        ("baseline", "random-allocation baseline payoff; write summary.json"),
        ("verify", "check the evolved strategy pair is an epsilon-Nash equilibrium"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (value parsed as JSON)")
        if name == "verify":
            p.add_argument("--epsilon", type=float, help="tolerance (default: config epsilon)")
            p.add_argument("--from", dest="source", help="summary.json of a previous run to verify")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides, args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args)
    except (ConfigurationError, OSError) as exc:
        print(f"blottojam {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
