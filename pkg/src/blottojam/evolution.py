"""Evolutionary imitation/mutation dynamics over discretized mixed strategies.

A population holds ``k_ap`` AP-type and ``k_j`` jammer-type players. Each
iteration every player's payoff is evaluated against the whole opposing
population, then players imitate a randomly drawn better-performing peer of the
same type and occasionally mutate. Updates are synchronous: all decisions read
the snapshot taken at the start of the iteration.

Randomness is derived from one master seed. Initial strategies use one stream
per player; iteration ``t`` uses a stream keyed by ``t`` from which every
player's draws are taken by index, so results never depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .blotto import GameConfig, MixedStrategy, PowerGrid, Side, success_matrix
from .errors import ConfigurationError

_INIT_STREAM = 0
_STEP_STREAM = 1


@dataclass(frozen=True)
class EvolutionParams:
    k_ap: int = 100
    k_j: int = 100
    xi: float = 1.25e-3
    q: float = 0.01
    l_levels: int = 5
    max_iters: int = 1000
    conv_eps: float = 1e-3
    conv_window: int = 10
    seed: int = 0

    def __post_init__(self):
        checks = [
            ("k_ap", self.k_ap >= 2),
            ("k_j", self.k_j >= 2),
            ("xi", 0 <= self.xi <= 1),
            ("q", self.q > 0),
            ("l_levels", self.l_levels >= 3),
            ("max_iters", self.max_iters >= 1),
            ("conv_eps", self.conv_eps >= 0),
            ("conv_window", self.conv_window >= 1),
            ("seed", self.seed >= 0),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigurationError(f"{name} out of range: {getattr(self, name)!r}")
        for name in ("k_ap", "k_j", "l_levels", "max_iters", "conv_window", "seed"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ConfigurationError(f"{name} must be an integer, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class Player:
    id: int
    side: Side
    strategy: MixedStrategy
    payoff: float


@dataclass
class Population:
    """Strategies (one row per player) and last computed payoffs of both sides."""

    ap_grid: PowerGrid
    j_grid: PowerGrid
    ap: np.ndarray
    jammer: np.ndarray
    payoff_ap: np.ndarray = None
    payoff_jammer: np.ndarray = None

    def __post_init__(self):
        if self.payoff_ap is None:
            self.payoff_ap = np.zeros(len(self.ap))
        if self.payoff_jammer is None:
            self.payoff_jammer = np.zeros(len(self.jammer))

    @property
    def size(self) -> int:
        return len(self.ap) + len(self.jammer)

    def average_ap(self) -> np.ndarray:
        return self.ap.mean(axis=0)

    def average_jammer(self) -> np.ndarray:
        return self.jammer.mean(axis=0)

    def player(self, side: Side, i: int) -> Player:
        if Side(side) is Side.AP:
            return Player(i, Side.AP, MixedStrategy(self.ap_grid, self.ap[i]), float(self.payoff_ap[i]))
        return Player(i, Side.JAMMER, MixedStrategy(self.j_grid, self.jammer[i]), float(self.payoff_jammer[i]))

    def players(self):
        for i in range(len(self.ap)):
            yield self.player(Side.AP, i)
        for i in range(len(self.jammer)):
            yield self.player(Side.JAMMER, i)

    def copy(self) -> "Population":
        return Population(
            self.ap_grid,
            self.j_grid,
            self.ap.copy(),
            self.jammer.copy(),
            self.payoff_ap.copy(),
            self.payoff_jammer.copy(),
        )

    def check(self, cfg: GameConfig) -> None:
        """Raise :class:`ConfigurationError` if any player's strategy is infeasible."""
        for player in self.players():
            try:
                player.strategy.check(cfg.target_mean(player.side))
            except ConfigurationError as exc:
                raise ConfigurationError(f"{player.side.value} player {player.id}: {exc}") from None


def tilt_to_mean(weights: np.ndarray, levels: np.ndarray, target: float) -> np.ndarray:
    """Reweight ``weights`` by ``exp(beta x)`` so each row has mean ``target``.

    ``weights`` is one positive weight vector per row (a 1-D vector is one row).
    The mean of an exponentially tilted distribution is increasing in ``beta``,
    so ``beta`` is found per row by bisection down to floating-point resolution.
    """
    weights = np.asarray(weights, dtype=float)
    single = weights.ndim == 1
    log_w = np.log(np.atleast_2d(weights))
    lo, hi = levels[0], levels[-1]
    t = (target - lo) / (hi - lo)
    u = (levels - lo) / (hi - lo)
    if t < -1e-12 or t > 1 + 1e-12:
        raise ConfigurationError(f"mean {target!r} W lies outside the grid [{lo!r}, {hi!r}] W")
    if t <= 0 or t >= 1:
        probs = np.zeros(log_w.shape)
        probs[:, 0 if t <= 0 else -1] = 1.0
        return probs[0] if single else probs

    def tilted(beta):
        z = log_w + beta[:, None] * u
        p = np.exp(z - z.max(axis=1, keepdims=True))
        return p / p.sum(axis=1, keepdims=True)

    def mean_of(beta):
        return (tilted(beta) * u).sum(axis=1)

    n = len(log_w)
    b_lo, b_hi = np.full(n, -1.0), np.full(n, 1.0)
    while np.any(low := mean_of(b_lo) > t):
        b_lo[low] *= 2.0
    while np.any(high := mean_of(b_hi) < t):
        b_hi[high] *= 2.0
    for _ in range(200):
        mid = 0.5 * (b_lo + b_hi)
        below = mean_of(mid) < t
        b_lo = np.where(below, mid, b_lo)
        b_hi = np.where(below, b_hi, mid)
    err_lo = np.abs(mean_of(b_lo) - t)
    err_hi = np.abs(mean_of(b_hi) - t)
    probs = tilted(np.where(err_lo <= err_hi, b_lo, b_hi))
    return probs[0] if single else probs


def random_weights(size: int, rng: np.random.Generator) -> np.ndarray:
    # uniform() is on [0, 1); a zero weight would pin that level to 0 forever
    return np.maximum(rng.uniform(size=size), np.finfo(float).tiny)


def random_strategy(grid: PowerGrid, target: float, rng: np.random.Generator) -> np.ndarray:
    """Strictly interior random distribution on ``grid`` with mean ``target``."""
    return tilt_to_mean(random_weights(grid.size, rng), grid.levels, target)


def _init_rng(seed: int, side: Side, index: int) -> np.random.Generator:
    side_code = 0 if side is Side.AP else 1
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_INIT_STREAM, side_code, index)))


def _step_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STEP_STREAM, t)))


def init_population(params: EvolutionParams, cfg: GameConfig) -> Population:
    ap_grid = cfg.ap_grid(params.l_levels)
    j_grid = cfg.jammer_grid(params.l_levels)
    sides = []
    for side, grid, k in ((Side.AP, ap_grid, params.k_ap), (Side.JAMMER, j_grid, params.k_j)):
        weights = np.array([random_weights(grid.size, _init_rng(params.seed, side, i)) for i in range(k)])
        sides.append(tilt_to_mean(weights, grid.levels, cfg.target_mean(side)))
    return Population(ap_grid, j_grid, *sides)


def payoff_sweep(pop: Population, cfg: GameConfig) -> Population:
    """Set each player's payoff to its mean expected payoff against every opponent.

    Averaging over opponents equals playing the opponents' average strategy, since
    the payoff is bilinear. Sums use numpy reductions rather than BLAS so the
    numbers do not depend on the BLAS thread count.
    """
    s = success_matrix(pop.ap_grid, pop.j_grid, cfg.radio)
    h, f = pop.average_jammer()[None, :], pop.average_ap()[:, None]
    # win and loss mass kept apart so certain outcomes come out as exactly 0 or 1
    ap_win = (pop.ap * (s * h).sum(axis=1)).sum(axis=1)
    ap_loss = (pop.ap * ((1.0 - s) * h).sum(axis=1)).sum(axis=1)
    j_win = (pop.jammer * ((1.0 - s) * f).sum(axis=0)).sum(axis=1)
    j_loss = (pop.jammer * (s * f).sum(axis=0)).sum(axis=1)
    pop.payoff_ap = ap_win / (ap_win + ap_loss)
    pop.payoff_jammer = j_win / (j_win + j_loss)
    return pop


def _partners(rng: np.random.Generator, k: int) -> np.ndarray:
    # uniform over the other k - 1 players
    draw = rng.integers(0, k - 1, size=k)
    return draw + (draw >= np.arange(k))


def _imitate(strategies, payoffs, partners):
    better = payoffs < payoffs[partners]
    out = strategies.copy()
    out[better] = strategies[partners[better]]
    return out


def imitation_step(pop: Population, rng: np.random.Generator) -> Population:
    """Each player copies a random same-type peer whose payoff is strictly higher."""
    ap_partners = _partners(rng, len(pop.ap))
    j_partners = _partners(rng, len(pop.jammer))
    pop.ap = _imitate(pop.ap, pop.payoff_ap, ap_partners)
    pop.jammer = _imitate(pop.jammer, pop.payoff_jammer, j_partners)
    return pop


def mutate_strategy(probs: np.ndarray, q: float, pick: float) -> bool:
    """Move ``2q`` of mass from an interior level to its two neighbours, in place.

    ``pick`` in [0, 1) selects among the interior levels holding at least ``2q``.
    Returns False (and leaves ``probs`` untouched) when no level is eligible.
    On a uniform grid the move preserves both the total mass and the mean.
    """
    eligible = np.flatnonzero(probs[1:-1] >= 2 * q) + 1
    if eligible.size == 0:
        return False
    k = eligible[min(int(pick * eligible.size), eligible.size - 1)]
    probs[k] -= 2 * q
    probs[k - 1] += q
    probs[k + 1] += q
    return True


def _mutate_side(strategies, coins, picks, params):
    for i in np.flatnonzero(coins < params.xi):
        mutate_strategy(strategies[i], params.q, picks[i])


def mutation_step(pop: Population, params: EvolutionParams, rng: np.random.Generator) -> Population:
    k_ap, k_j = len(pop.ap), len(pop.jammer)
    coins_ap, picks_ap = rng.uniform(size=k_ap), rng.uniform(size=k_ap)
    coins_j, picks_j = rng.uniform(size=k_j), rng.uniform(size=k_j)
    _mutate_side(pop.ap, coins_ap, picks_ap, params)
    _mutate_side(pop.jammer, coins_j, picks_j, params)
    return pop


@dataclass
class EvolutionTrace:
    """Per-iteration record of a run.

    Row ``t`` holds the payoffs and population-average strategies evaluated at
    the start of iteration ``t``. The run stops right after recording the row
    that satisfies the convergence test, so the last row describes ``final``.
    """

    ap_grid: PowerGrid
    j_grid: PowerGrid
    mean_payoff_ap: np.ndarray
    mean_payoff_jammer: np.ndarray
    avg_ap: np.ndarray
    avg_jammer: np.ndarray
    movement: np.ndarray
    converged: bool
    final: Population = field(repr=False)

    @property
    def iterations(self) -> int:
        return len(self.mean_payoff_ap)

    def final_ap_strategy(self) -> MixedStrategy:
        return MixedStrategy(self.ap_grid, self.avg_ap[-1])

    def final_jammer_strategy(self) -> MixedStrategy:
        return MixedStrategy(self.j_grid, self.avg_jammer[-1])


def run(
    params: EvolutionParams,
    cfg: GameConfig,
    callback: Optional[Callable[[int, Population], None]] = None,
) -> EvolutionTrace:
    """Iterate payoff sweep, imitation and mutation until the averages settle.

    Convergence: the summed L1 movement of both population-average strategies
    between consecutive iterations stays below ``conv_eps`` for ``conv_window``
    iterations in a row. ``callback(t, pop)`` is called after every update.
    """
    pop = init_population(params, cfg)
    pay_ap, pay_j, avg_ap, avg_j, moves = [], [], [], [], []
    calm = 0
    converged = False
    for t in range(params.max_iters):
        payoff_sweep(pop, cfg)
        a, h = pop.average_ap(), pop.average_jammer()
        moves.append(np.nan if t == 0 else np.abs(a - avg_ap[-1]).sum() + np.abs(h - avg_j[-1]).sum())
        pay_ap.append(pop.payoff_ap.mean())
        pay_j.append(pop.payoff_jammer.mean())
        avg_ap.append(a)
        avg_j.append(h)
        if t > 0:
            calm = calm + 1 if moves[-1] < params.conv_eps else 0
            if calm >= params.conv_window:
                converged = True
                break
        if t == params.max_iters - 1:
            break
        rng = _step_rng(params.seed, t)
        imitation_step(pop, rng)
        mutation_step(pop, params, rng)
        if callback is not None:
            callback(t, pop)
    return EvolutionTrace(
        ap_grid=pop.ap_grid,
        j_grid=pop.j_grid,
        mean_payoff_ap=np.array(pay_ap),
        mean_payoff_jammer=np.array(pay_j),
        avg_ap=np.array(avg_ap),
        avg_jammer=np.array(avg_j),
        movement=np.array(moves),
        converged=converged,
        final=pop,
    )
