"""Game-layer math for the OFDM anti-jamming Blotto game.

Both players' mixed strategies are marginal distributions over a uniform grid of
per-subcarrier power levels. Every subcarrier is a priori equivalent, so a
strategy is feasible when it is a probability vector whose mean equals the
side's budget divided by the number of subcarriers.

Payoffs are the expected fraction of subcarriers won, computed against the
gain-averaged success probability, so every evaluation here is deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .channel import ChannelKind, RadioParams, success_probability
from .errors import ConfigurationError, UnsupportedModelError

PROB_TOL = 1e-9
MEAN_TOL = 1e-9


class Side(str, enum.Enum):
    AP = "ap"
    JAMMER = "jammer"


@dataclass(frozen=True, eq=False)
class PowerGrid:
    """``L`` equally spaced power levels in watts."""

    levels: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        if levels.ndim != 1 or levels.size < 2:
            raise ConfigurationError(f"a power grid needs at least 2 levels, got {levels.size}")
        if levels[0] < 0:
            raise ConfigurationError(f"power levels must be >= 0, got lo={levels[0]!r}")
        steps = np.diff(levels)
        if np.any(steps <= 0):
            raise ConfigurationError("power levels must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-12 * max(abs(levels[-1]), steps.mean()):
            raise ConfigurationError("power levels must be uniformly spaced")

    @classmethod
    def uniform(cls, lo: float, hi: float, size: int) -> "PowerGrid":
        if size < 2 or not hi > lo:
            raise ConfigurationError(f"cannot build a grid of {size} levels on [{lo}, {hi}]")
        return cls(np.linspace(lo, hi, size))

    @property
    def lo(self) -> float:
        return float(self.levels[0])

    @property
    def hi(self) -> float:
        return float(self.levels[-1])

    @property
    def size(self) -> int:
        return int(self.levels.size)

    def __eq__(self, other):
        return isinstance(other, PowerGrid) and np.array_equal(self.levels, other.levels)

    def __hash__(self):
        return hash(self.levels.tobytes())

    def __repr__(self):
        return f"PowerGrid(lo={self.lo!r}, hi={self.hi!r}, size={self.size})"


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability vector over the levels of a :class:`PowerGrid`."""

    grid: PowerGrid
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.grid.size,):
            raise ConfigurationError(
                f"strategy has {probs.size} probabilities for a grid of {self.grid.size} levels"
            )
        if np.any(probs < 0):
            raise ConfigurationError(f"negative probability in strategy: {probs.min()!r}")
        total = probs.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ConfigurationError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def point_mass(cls, grid: PowerGrid, index: int) -> "MixedStrategy":
        probs = np.zeros(grid.size)
        probs[index] = 1.0
        return cls(grid, probs)

    def mean(self) -> float:
        return float(self.probs @ self.grid.levels)

    def variance(self) -> float:
        centred = self.grid.levels - self.mean()
        return float(self.probs @ (centred * centred))

    def check(self, target_mean: float) -> None:
        """Raise :class:`ConfigurationError` unless the mean matches ``target_mean``.

        Sign and normalization are already enforced at construction.
        """
        mean = self.mean()
        if abs(mean - target_mean) > MEAN_TOL * max(1.0, abs(target_mean)):
            raise ConfigurationError(
                f"strategy mean {mean!r} W does not match the per-subcarrier budget {target_mean!r} W"
            )

    def __eq__(self, other):
        return (
            isinstance(other, MixedStrategy)
            and self.grid == other.grid
            and np.array_equal(self.probs, other.probs)
        )

    def __repr__(self):
        return f"MixedStrategy({self.grid!r}, probs={np.array2string(self.probs, precision=4)})"


def strategy_mean(s: MixedStrategy) -> float:
    return s.mean()


def strategy_variance(s: MixedStrategy) -> float:
    return s.variance()


@dataclass(frozen=True)
class GameConfig:
    """Number of subcarriers, both power budgets and the radio model.

    Grid options
    ------------
    ap_grid_hi_factor, j_grid_hi_factor : float, optional
        Top grid level as a multiple of the side's per-subcarrier budget,
        capped at the full budget. ``None`` puts the top level at the budget.
    ap_floor : bool
        Start the AP grid at ``tau N0 / mean_gain_ap`` instead of 0; AP powers
        below that level can never succeed.
    """

    m_subcarriers: int
    p_ap_watts: float
    p_j_watts: float
    radio: RadioParams
    ap_grid_hi_factor: Optional[float] = None
    j_grid_hi_factor: Optional[float] = None
    ap_floor: bool = False

    def __post_init__(self):
        if int(self.m_subcarriers) != self.m_subcarriers or self.m_subcarriers < 1:
            raise ConfigurationError(f"m_subcarriers must be an integer >= 1, got {self.m_subcarriers!r}")
        for name in ("p_ap_watts", "p_j_watts"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be finite and > 0, got {value!r}")
        for name in ("ap_grid_hi_factor", "j_grid_hi_factor"):
            value = getattr(self, name)
            if value is not None and not value >= 1:
                raise ConfigurationError(f"{name} must be >= 1, got {value!r}")

    @property
    def ap_mean(self) -> float:
        return self.p_ap_watts / self.m_subcarriers

    @property
    def jammer_mean(self) -> float:
        return self.p_j_watts / self.m_subcarriers

    def budget(self, side: Side) -> float:
        return self.p_ap_watts if Side(side) is Side.AP else self.p_j_watts

    def target_mean(self, side: Side) -> float:
        return self.ap_mean if Side(side) is Side.AP else self.jammer_mean

    def ap_grid(self, size: int) -> PowerGrid:
        lo = 0.0
        if self.ap_floor:
            lo = self.radio.tau_linear * self.radio.n0_watts / self.radio.mean_gain_ap
        hi = _grid_top(self.p_ap_watts, self.ap_mean, self.ap_grid_hi_factor)
        return _feasible_grid(lo, hi, size, self.ap_mean, "AP")

    def jammer_grid(self, size: int) -> PowerGrid:
        hi = _grid_top(self.p_j_watts, self.jammer_mean, self.j_grid_hi_factor)
        return _feasible_grid(0.0, hi, size, self.jammer_mean, "jammer")

    def grid(self, side: Side, size: int) -> PowerGrid:
        return self.ap_grid(size) if Side(side) is Side.AP else self.jammer_grid(size)


def _grid_top(budget, mean, factor):
    if factor is None:
        return budget
    return min(budget, factor * mean)


def _feasible_grid(lo, hi, size, mean, who):
    if not lo < hi:
        raise ConfigurationError(f"{who} grid is empty: lo={lo!r} W, hi={hi!r} W")
    if not lo <= mean <= hi:
        raise ConfigurationError(
            f"{who} per-subcarrier budget {mean!r} W lies outside the grid [{lo!r}, {hi!r}] W"
        )
    return PowerGrid.uniform(lo, hi, size)


@lru_cache(maxsize=256)
def _success_matrix(ap_grid: PowerGrid, j_grid: PowerGrid, radio: RadioParams) -> np.ndarray:
    s = success_probability(ap_grid.levels[:, None], j_grid.levels[None, :], radio)
    s = np.asarray(s, dtype=float)
    s.setflags(write=False)
    return s


def success_matrix(ap_grid: PowerGrid, j_grid: PowerGrid, radio: RadioParams) -> np.ndarray:
    """``S[k, l]`` = success probability of AP level ``k`` against jammer level ``l``."""
    return _success_matrix(ap_grid, j_grid, radio)


def _check_pair(f: MixedStrategy, h: MixedStrategy, cfg: GameConfig):
    _check_side(f, cfg, Side.AP)
    _check_side(h, cfg, Side.JAMMER)


def _check_side(s: MixedStrategy, cfg: GameConfig, side: Side):
    budget = cfg.budget(side)
    if s.grid.hi > budget * (1 + 1e-12):
        raise ConfigurationError(
            f"{side.value} grid top {s.grid.hi!r} W exceeds the budget {budget!r} W"
        )
    try:
        s.check(cfg.target_mean(side))
    except ConfigurationError as exc:
        raise ConfigurationError(f"{side.value} strategy: {exc}") from None


def expected_payoff_ap(f: MixedStrategy, h: MixedStrategy, cfg: GameConfig) -> float:
    """Expected fraction of subcarriers on which the AP transmits successfully."""
    _check_pair(f, h, cfg)
    s = success_matrix(f.grid, h.grid, cfg.radio)
    # Win and loss mass are summed separately so that a sure win is exactly 1
    # and a sure loss exactly 0, even when the probabilities sum to 1 +- ulp.
    win = f.probs @ (s @ h.probs)
    loss = f.probs @ ((1.0 - s) @ h.probs)
    return float(win / (win + loss))


def _clip_probability(x) -> float:
    return float(min(max(x, 0.0), 1.0))


def expected_payoff_jammer(f: MixedStrategy, h: MixedStrategy, cfg: GameConfig) -> float:
    return 1.0 - expected_payoff_ap(f, h, cfg)


def dominance_check(cfg: GameConfig) -> bool:
    """Whether the uniform AP allocation wins every subcarrier whatever the jammer does.

    True iff ``g_ap P_ap / M >= tau (N0 + g_j P_j)``: the per-subcarrier AP
    budget beats a jammer that puts its whole budget on one subcarrier.
    """
    radio = cfg.radio
    if radio.channel_kind is not ChannelKind.DETERMINISTIC:
        raise UnsupportedModelError("dominance_check is only defined for deterministic channel gains")
    return dominance_condition(cfg.m_subcarriers, cfg.p_ap_watts, cfg.p_j_watts, radio)


def dominance_condition(m, p_ap, p_j, radio) -> bool:
    """The inequality behind :func:`dominance_check`; accepts ``p_j = 0``."""
    lhs = radio.mean_gain_ap * (p_ap / m)
    return bool(lhs >= radio.tau_linear * (radio.n0_watts + radio.mean_gain_jammer * p_j))


def level_values(opponent: MixedStrategy, my_grid: PowerGrid, cfg: GameConfig, side: Side) -> np.ndarray:
    """Expected payoff of each pure level of ``my_grid`` against ``opponent``."""
    if Side(side) is Side.AP:
        s = success_matrix(my_grid, opponent.grid, cfg.radio)
        return s @ opponent.probs
    s = success_matrix(opponent.grid, my_grid, cfg.radio)
    return opponent.probs @ (1.0 - s)


def best_response_oracle(
    opponent: MixedStrategy,
    my_grid: PowerGrid,
    my_budget: float,
    cfg: GameConfig,
    side: Side,
) -> tuple[MixedStrategy, float]:
    """Exact best response on ``my_grid`` under the normalization and mean constraints.

    The objective is linear in the probabilities and there are two equality
    constraints, so some optimum has at most two support points. All feasible
    single points and bracketing pairs are enumerated.
    """
    side = Side(side)
    other = Side.JAMMER if side is Side.AP else Side.AP
    _check_side(opponent, cfg, other)
    x = my_grid.levels
    mu = my_budget / cfg.m_subcarriers
    tol = MEAN_TOL * max(1.0, abs(mu))
    if mu < x[0] - tol or mu > x[-1] + tol:
        raise ConfigurationError(
            f"per-subcarrier budget {mu!r} W lies outside the grid [{x[0]!r}, {x[-1]!r}] W"
        )
    v = level_values(opponent, my_grid, cfg, side)

    best_value = -np.inf
    best_probs = None
    singles = np.flatnonzero(np.abs(x - mu) <= tol)
    if singles.size:
        k = singles[np.argmax(v[singles])]
        best_value = float(v[k])
        best_probs = np.zeros(x.size)
        best_probs[k] = 1.0

    lo_idx, hi_idx = np.nonzero((x[:, None] < mu) & (x[None, :] > mu))
    if lo_idx.size:
        alpha = (x[hi_idx] - mu) / (x[hi_idx] - x[lo_idx])
        values = alpha * v[lo_idx] + (1.0 - alpha) * v[hi_idx]
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value = float(values[i])
            best_probs = np.zeros(x.size)
            best_probs[lo_idx[i]] = alpha[i]
            best_probs[hi_idx[i]] = 1.0 - alpha[i]

    if best_probs is None:
        raise ConfigurationError(f"no feasible distribution with mean {mu!r} W on {my_grid!r}")
    return MixedStrategy(my_grid, best_probs), _clip_probability(best_value)


@dataclass(frozen=True)
class NashGaps:
    """How much each side could gain by deviating to its best response."""

    payoff_ap: float
    best_ap: float
    best_jammer: float
    ap_response: MixedStrategy = field(repr=False)
    jammer_response: MixedStrategy = field(repr=False)

    @property
    def payoff_jammer(self) -> float:
        return 1.0 - self.payoff_ap

    @property
    def ap_gap(self) -> float:
        return self.best_ap - self.payoff_ap

    @property
    def jammer_gap(self) -> float:
        return self.best_jammer - self.payoff_jammer

    def within(self, epsilon: float) -> bool:
        return self.ap_gap <= epsilon and self.jammer_gap <= epsilon


def nash_gaps(f: MixedStrategy, h: MixedStrategy, cfg: GameConfig) -> NashGaps:
    payoff = expected_payoff_ap(f, h, cfg)
    ap_br, ap_best = best_response_oracle(h, f.grid, cfg.p_ap_watts, cfg, Side.AP)
    j_br, j_best = best_response_oracle(f, h.grid, cfg.p_j_watts, cfg, Side.JAMMER)
    return NashGaps(payoff, ap_best, j_best, ap_br, j_br)


def epsilon_nash_check(f: MixedStrategy, h: MixedStrategy, cfg: GameConfig, epsilon: float) -> bool:
    """True when neither side gains more than ``epsilon`` by a unilateral deviation."""
    if epsilon < 0:
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon!r}")
    return nash_gaps(f, h, cfg).within(epsilon)
