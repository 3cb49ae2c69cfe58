import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blottojam.blotto import (
    GameConfig,
    MixedStrategy,
    PowerGrid,
    Side,
    best_response_oracle,
    dominance_check,
    dominance_condition,
    epsilon_nash_check,
    expected_payoff_ap,
    expected_payoff_jammer,
    level_values,
    nash_gaps,
    strategy_mean,
    strategy_variance,
)
from blottojam.channel import RadioParams
from blottojam.errors import ConfigurationError, UnsupportedModelError

from oracles import brute_force_best, lattice_means, random_mixed, sparse_mixed

N0 = 1e-12
TAU = 10 ** 2.5
DET = RadioParams(N0, TAU)
RAY = RadioParams(N0, TAU, mean_gain_ap=1.0, mean_gain_jammer=0.01, channel_kind="rayleigh")
REFERENCE = GameConfig(128, 1.0, 0.1, DET)


def dominance_cfg(m=4, p_j=5e-4):
    cfg = GameConfig(m, 1.0, p_j, DET)
    assert dominance_check(cfg)
    return cfg


class TestPowerGrid:
    def test_reported_levels(self):
        grid = PowerGrid.uniform(0.0, 0.016, 5)
        np.testing.assert_allclose(grid.levels, [0, 0.004, 0.008, 0.012, 0.016], rtol=0, atol=1e-18)

    @pytest.mark.parametrize(
        "levels", [[1.0], [0.0, 2.0, 1.0], [0.0, 1.0, 3.0], [-1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    def test_invalid(self, levels):
        with pytest.raises(ConfigurationError):
            PowerGrid(levels)

    def test_equality_by_value(self):
        assert PowerGrid.uniform(0, 1, 3) == PowerGrid([0.0, 0.5, 1.0])
        assert hash(PowerGrid.uniform(0, 1, 3)) == hash(PowerGrid([0.0, 0.5, 1.0]))


class TestMixedStrategy:
    grid = PowerGrid([0.0, 0.004, 0.008])

    def test_point_mass_variance(self):
        s = MixedStrategy.point_mass(self.grid, 1)
        assert strategy_variance(s) == 0.0
        assert strategy_mean(s) == 0.004

    def test_symmetric_two_point(self):
        s = MixedStrategy(self.grid, [0.5, 0.0, 0.5])
        assert s.mean() == pytest.approx(0.004, rel=1e-15)
        assert s.variance() == pytest.approx(0.004**2, rel=1e-12)

    def test_hand_example(self):
        s = MixedStrategy(self.grid, [0.25, 0.5, 0.25])
        assert s.mean() == pytest.approx(4e-3, rel=1e-15)
        assert s.variance() == pytest.approx(8e-6, rel=1e-12)

    @pytest.mark.parametrize("probs", [[0.5, 0.6, -0.1], [0.2, 0.2, 0.2], [0.5, 0.5]])
    def test_invalid_probs(self, probs):
        with pytest.raises(ConfigurationError):
            MixedStrategy(self.grid, probs)

    def test_mean_check(self):
        s = MixedStrategy(self.grid, [0.25, 0.5, 0.25])
        s.check(0.004)
        with pytest.raises(ConfigurationError, match="mean"):
            s.check(0.005)


class TestGameConfig:
    @pytest.mark.parametrize(
        "kw", [dict(m_subcarriers=0), dict(m_subcarriers=1.5), dict(p_ap_watts=0.0), dict(p_j_watts=-1.0),
               dict(ap_grid_hi_factor=0.5)]
    )
    def test_invalid(self, kw):
        base = dict(m_subcarriers=4, p_ap_watts=1.0, p_j_watts=0.1, radio=DET)
        with pytest.raises(ConfigurationError):
            GameConfig(**{**base, **kw})

    def test_default_grids_span_budget(self):
        assert REFERENCE.ap_grid(5).hi == 1.0 and REFERENCE.ap_grid(5).lo == 0.0
        assert REFERENCE.jammer_grid(5).hi == 0.1

    def test_grid_factor(self):
        cfg = GameConfig(125, 1.0, 0.1, DET, ap_grid_hi_factor=2.0)
        np.testing.assert_allclose(cfg.ap_grid(5).levels, [0, 4e-3, 8e-3, 12e-3, 16e-3], atol=1e-18)

    def test_ap_floor(self):
        cfg = GameConfig(4, 1.0, 0.1, DET, ap_floor=True)
        assert cfg.ap_grid(5).lo == pytest.approx(TAU * N0)

    def test_infeasible_floor(self):
        cfg = GameConfig(10**6, 1e-6, 0.1, DET, ap_floor=True)
        with pytest.raises(ConfigurationError, match="AP"):
            cfg.ap_grid(5)


class TestPayoff:
    @pytest.mark.parametrize("p_j, expected", [(0.1, 0.0), (2e-4, 1.0)])
    def test_point_masses_give_indicator(self, p_j, expected):
        cfg = GameConfig(4, 1.0, p_j, DET)
        f = MixedStrategy.point_mass(cfg.ap_grid(5), 1)
        h = MixedStrategy.point_mass(cfg.jammer_grid(5), 1)
        assert expected_payoff_ap(f, h, cfg) == expected

    def test_silent_jammer(self):
        # jammer budget far below the mean tolerance, so a point mass at 0 is feasible
        cfg = GameConfig(4, 1.0, 1e-13, DET)
        f = MixedStrategy(cfg.ap_grid(9), [0, 0.5, 0, 0.5, 0, 0, 0, 0, 0])
        h = MixedStrategy.point_mass(cfg.jammer_grid(5), 0)
        assert expected_payoff_ap(f, h, cfg) == 1.0

    def test_half_on_double_budget(self):
        cfg = GameConfig(4, 1.0, 4e-4, DET)
        f = MixedStrategy(cfg.ap_grid(9), [0.5, 0, 0, 0, 0.5, 0, 0, 0, 0])
        h = MixedStrategy.point_mass(cfg.jammer_grid(5), 1)
        assert f.grid.levels[4] >= TAU * (N0 + h.mean())
        assert expected_payoff_ap(f, h, cfg) == 0.5
        assert expected_payoff_jammer(f, h, cfg) == 0.5

    def test_silent_ap_loses_everything(self, rng):
        cfg = GameConfig(4, 1e-13, 0.1, RAY)
        f = MixedStrategy.point_mass(cfg.ap_grid(5), 0)
        h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
        assert expected_payoff_jammer(f, h, cfg) == 1.0

    def test_grid_mismatch(self, rng):
        cfg = GameConfig(4, 1.0, 0.1, DET)
        f = random_mixed(cfg.ap_grid(5), cfg.ap_mean, rng)
        h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
        with pytest.raises(ConfigurationError, match="ap strategy"):
            expected_payoff_ap(f, h, GameConfig(8, 1.0, 0.1, DET))
        with pytest.raises(ConfigurationError, match="grid top"):
            expected_payoff_ap(f, h, GameConfig(4, 1.0, 0.05, DET))

    @given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["deterministic", "rayleigh"]))
    def test_zero_sum(self, seed, kind):
        rng = np.random.default_rng(seed)
        radio = RadioParams(N0, TAU, 1.0, 0.01, kind)
        cfg = GameConfig(int(rng.integers(1, 300)), 1.0, 0.1, radio)
        f = sparse_mixed(cfg.ap_grid(int(rng.integers(2, 12))), cfg.ap_mean, rng)
        h = sparse_mixed(cfg.jammer_grid(int(rng.integers(2, 12))), cfg.jammer_mean, rng)
        total = expected_payoff_ap(f, h, cfg) + expected_payoff_jammer(f, h, cfg)
        assert abs(total - 1.0) <= 1e-12
        assert 0.0 <= expected_payoff_ap(f, h, cfg) <= 1.0

    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0, 1))
    def test_bilinear(self, seed, alpha):
        rng = np.random.default_rng(seed)
        cfg = GameConfig(64, 1.0, 0.1, RAY)
        ag, jg = cfg.ap_grid(6), cfg.jammer_grid(6)
        f1, f2 = random_mixed(ag, cfg.ap_mean, rng), random_mixed(ag, cfg.ap_mean, rng)
        h = random_mixed(jg, cfg.jammer_mean, rng)
        mix = MixedStrategy(ag, alpha * f1.probs + (1 - alpha) * f2.probs)
        lhs = expected_payoff_ap(mix, h, cfg)
        rhs = alpha * expected_payoff_ap(f1, h, cfg) + (1 - alpha) * expected_payoff_ap(f2, h, cfg)
        assert abs(lhs - rhs) <= 1e-12


class TestDominance:
    def test_reference_values(self):
        assert not dominance_check(REFERENCE)

    def test_no_jammer_power(self):
        assert dominance_condition(128, 1.0, 0.0, DET)
        assert not dominance_condition(1, TAU * N0 * 0.5, 0.0, DET)

    def test_single_subcarrier(self):
        p_j = 0.1
        cfg = GameConfig(1, 2 * TAU * (N0 + p_j), p_j, DET)
        assert dominance_check(cfg)

    def test_rayleigh_unsupported(self):
        with pytest.raises(UnsupportedModelError):
            dominance_check(GameConfig(4, 1.0, 0.1, RAY))

    def test_uniform_allocation_always_wins(self, rng):
        cfg = dominance_cfg()
        f = MixedStrategy.point_mass(cfg.ap_grid(5), 1)
        assert f.grid.levels[1] == cfg.ap_mean
        for _ in range(100):
            h = sparse_mixed(cfg.jammer_grid(int(rng.integers(2, 9))), cfg.jammer_mean, rng)
            assert expected_payoff_ap(f, h, cfg) == 1.0
            assert epsilon_nash_check(f, h, cfg, 0.0)


class TestOracle:
    def test_silent_opponent(self):
        cfg = GameConfig(4, 1.0, 1e-13, DET)
        h = MixedStrategy.point_mass(cfg.jammer_grid(5), 0)
        br, value = best_response_oracle(h, cfg.ap_grid(5), cfg.p_ap_watts, cfg, Side.AP)
        assert value == 1.0
        assert br.probs[0] == 0.0

    @pytest.mark.parametrize("side", list(Side))
    def test_two_level_grid(self, side, rng):
        cfg = GameConfig(16, 1.0, 0.1, RAY)
        other = Side.JAMMER if side is Side.AP else Side.AP
        opponent = random_mixed(cfg.grid(other, 5), cfg.target_mean(other), rng)
        top = cfg.budget(side)
        grid = PowerGrid([0.0, top])
        br, value = best_response_oracle(opponent, grid, cfg.budget(side), cfg, side)
        alpha = cfg.target_mean(side) / top
        v = level_values(opponent, grid, cfg, side)
        np.testing.assert_allclose(br.probs, [1 - alpha, alpha], atol=1e-15)
        assert value == pytest.approx(alpha * v[1] + (1 - alpha) * v[0], abs=1e-15)

    @pytest.mark.parametrize("case", range(8))
    def test_matches_lattice_search(self, case):
        rng = np.random.default_rng(case)
        means = lattice_means()
        steps = means[case % len(means)] / 100
        m = 64
        cfg = GameConfig(m, 1.0, 0.1, RAY, ap_grid_hi_factor=4 / steps)
        grid = cfg.ap_grid(5)
        h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
        _, value = best_response_oracle(h, grid, cfg.p_ap_watts, cfg, Side.AP)
        v = level_values(h, grid, cfg, Side.AP)
        assert abs(value - brute_force_best(v, means[case % len(means)])) <= 1e-6

    @given(seed=st.integers(0, 2**32 - 1), side=st.sampled_from(list(Side)))
    def test_weakly_improves(self, seed, side):
        rng = np.random.default_rng(seed)
        cfg = GameConfig(int(rng.integers(2, 200)), 1.0, 0.1, RAY, 4.0, 4.0)
        f = sparse_mixed(cfg.ap_grid(7), cfg.ap_mean, rng)
        h = sparse_mixed(cfg.jammer_grid(7), cfg.jammer_mean, rng)
        gaps = nash_gaps(f, h, cfg)
        assert gaps.ap_gap >= -1e-12
        assert gaps.jammer_gap >= -1e-12
        br, value = (gaps.ap_response, gaps.best_ap) if side is Side.AP else (gaps.jammer_response, gaps.best_jammer)
        br.check(cfg.target_mean(side))
        assert np.count_nonzero(br.probs) <= 2

    @given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 1))
    def test_stronger_jammer_never_helps_ap(self, seed, t):
        rng = np.random.default_rng(seed)
        weak = GameConfig(32, 1.0, 0.1, RAY, 4.0, 8.0)
        jg = weak.jammer_grid(6)
        h = random_mixed(jg, weak.jammer_mean, rng)
        top = MixedStrategy.point_mass(jg, jg.size - 1)
        louder = MixedStrategy(jg, (1 - t) * h.probs + t * top.probs)
        strong = GameConfig(32, 1.0, 32 * louder.mean(), RAY, 4.0)
        ag = weak.ap_grid(6)
        _, v_weak = best_response_oracle(h, ag, 1.0, weak, Side.AP)
        _, v_strong = best_response_oracle(louder, ag, 1.0, strong, Side.AP)
        assert v_strong <= v_weak + 1e-12

    def test_infeasible_mean(self, rng):
        cfg = GameConfig(4, 1.0, 0.1, RAY)
        h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
        with pytest.raises(ConfigurationError, match="outside the grid"):
            best_response_oracle(h, PowerGrid([0.5, 0.75, 1.0]), 1.0, cfg, Side.AP)


class TestEpsilonNash:
    # nanowatt-scale game: the AP budget per subcarrier sits inside the 1e-9 W
    # mean tolerance, so a point mass at zero power is a feasible strategy
    radio = RadioParams(1e-20, 1.0)
    cfg = GameConfig(4, 2e-9, 4e-20, radio)
    ap_grid = PowerGrid([0.0, 1e-9])
    j_grid = PowerGrid([0.0, 2e-20])

    def test_zero_power_point_mass_rejected(self):
        f = MixedStrategy.point_mass(self.ap_grid, 0)
        h = MixedStrategy(self.j_grid, [0.5, 0.5])
        gaps = nash_gaps(f, h, self.cfg)
        assert gaps.payoff_ap == 0.0
        # 1 nW is within the mean tolerance too, and it always wins
        assert gaps.best_ap == 1.0
        assert not epsilon_nash_check(f, h, self.cfg, 0.05)

    def test_dominance_pair_for_any_epsilon(self, rng):
        cfg = dominance_cfg()
        f = MixedStrategy.point_mass(cfg.ap_grid(5), 1)
        for _ in range(20):
            h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
            for eps in (0.0, 1e-6, 0.05):
                assert epsilon_nash_check(f, h, cfg, eps)

    def test_negative_epsilon(self, rng):
        cfg = dominance_cfg()
        f = MixedStrategy.point_mass(cfg.ap_grid(5), 1)
        h = random_mixed(cfg.jammer_grid(5), cfg.jammer_mean, rng)
        with pytest.raises(ConfigurationError):
            epsilon_nash_check(f, h, cfg, -0.1)
