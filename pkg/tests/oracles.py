"""Independent reference implementations used only by the tests."""

import math
from functools import lru_cache

import numpy as np

from blottojam.blotto import GameConfig, MixedStrategy, PowerGrid, success_matrix
from blottojam.channel import RadioParams
from blottojam.evolution import random_strategy

STEPS = 100  # simplex lattice resolution: probabilities in multiples of 0.01


def mc_success(p, j, radio: RadioParams, n, rng):
    """Monte-Carlo success rate over exponential gains, with its standard error."""
    g_ap = rng.exponential(radio.mean_gain_ap, n)
    g_j = rng.exponential(radio.mean_gain_jammer, n)
    est = float(np.mean(g_ap * p >= radio.tau_linear * (radio.n0_watts + g_j * j)))
    return est, math.sqrt(max(est * (1 - est), 1.0 / n) / n)


@lru_cache(maxsize=None)
def lattice_points(levels: int, level_sum: int) -> np.ndarray:
    """Counts ``n`` (rows) with ``sum(n) = STEPS`` and ``sum(k n_k) = level_sum``."""
    assert levels == 5
    n2, n3, n4 = np.meshgrid(*(np.arange(STEPS + 1),) * 3, indexing="ij")
    n2, n3, n4 = n2.ravel(), n3.ravel(), n4.ravel()
    n1 = level_sum - 2 * n2 - 3 * n3 - 4 * n4
    n0 = STEPS - n1 - n2 - n3 - n4
    ok = (n1 >= 0) & (n0 >= 0)
    return np.stack([n0, n1, n2, n3, n4], axis=1)[ok]


def lattice_means() -> list:
    """Means (in grid steps, times STEPS) whose two-point optima all lie on the lattice."""
    good = []
    for s in range(1, 4 * STEPS):
        # weight on the lower point is STEPS (b - s/STEPS) / (b - a); keep it integral
        ok = all(
            (b * STEPS - s) % (b - a) == 0
            for a in range(5) for b in range(5) if a * STEPS < s < b * STEPS
        )
        if ok:
            good.append(s)
    return good


def brute_force_best(values: np.ndarray, level_sum: int) -> float:
    pts = lattice_points(len(values), level_sum)
    return float((pts @ values).max() / STEPS)


def double_loop_payoffs(ap, jam, ap_grid, j_grid, cfg: GameConfig):
    """Mean payoff of each player against every opponent, by explicit loops."""
    s = success_matrix(ap_grid, j_grid, cfg.radio)
    pay_ap = np.zeros(len(ap))
    pay_j = np.zeros(len(jam))
    for i, f in enumerate(ap):
        for z, h in enumerate(jam):
            v = 0.0
            for k in range(len(f)):
                for l in range(len(h)):
                    v += f[k] * h[l] * s[k, l]
            pay_ap[i] += v / len(jam)
            pay_j[z] += (1.0 - v) / len(ap)
    return pay_ap, pay_j


def random_mixed(grid: PowerGrid, mean: float, rng) -> MixedStrategy:
    return MixedStrategy(grid, random_strategy(grid, mean, rng))


def sparse_mixed(grid: PowerGrid, mean: float, rng) -> MixedStrategy:
    """Random feasible strategy that may put zero mass on some levels."""
    probs = random_strategy(grid, mean, rng)
    # blend with a random two-point feasible distribution to reach the boundary
    x = grid.levels
    lo = rng.choice(np.flatnonzero(x <= mean))
    hi = rng.choice(np.flatnonzero(x >= mean))
    two = np.zeros(len(x))
    if x[hi] == x[lo]:
        two[lo] = 1.0
    else:
        a = (x[hi] - mean) / (x[hi] - x[lo])
        two[lo] += a
        two[hi] += 1 - a
    t = rng.uniform()
    return MixedStrategy(grid, t * probs + (1 - t) * two)
