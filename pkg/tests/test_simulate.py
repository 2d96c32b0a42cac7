"""
Unit Tests for Simulate Module

测试覆盖：
- 计数器型随机数发生器
- 轨迹采样（有限与高斯）
- 双滤波实验：与线程数无关、排除退化试验、告警状态、事件
- 经验收缩比与 CSV 输出

Author: FilterStab Development Team
Version: v1.0
Date: 2026-10-19
"""

import pytest

from src.config.settings import Settings
from src.core.errors import ContractViolationError
from src.core.modelio import load_experiment_config
from src.core.simulate import (
    dual_filter_experiment,
    empirical_contraction,
    sample_trajectory,
    trial_rng,
    write_stats_csv,
)
from src.models.distributions import FiniteDistribution, GridDensity
from src.models.operators import StochasticMatrix
from src.models.pomp_model import Backend, ExperimentConfig, PompModel
from src.models.results import StabilityStats, StatsStatus
from src.utils.event_bus import EventType


@pytest.fixture
def deterministic_model(example1_T):
    return PompModel.finite_model("deterministic", example1_T, StochasticMatrix.identity(3))


@pytest.fixture
def two_state_config(two_state_model):
    return ExperimentConfig(
        name="two_state",
        model=two_state_model,
        mu=FiniteDistribution([0.9, 0.1]),
        nu=FiniteDistribution([0.2, 0.8]),
        horizon=6,
        trials=300,
        seed=20261019,
    )


def grid_config(model, mu, nu, trials=60, horizon=4):
    return ExperimentConfig(
        name="embedded",
        model=model,
        mu=FiniteDistribution(mu).to_grid_density(),
        nu=FiniteDistribution(nu).to_grid_density(),
        horizon=horizon,
        trials=trials,
        seed=3,
        backend=Backend.GRID,
    )


class TestTrialRng:
    """测试 trial_rng"""

    def test_reproducible(self):
        assert trial_rng(7, 3).random() == trial_rng(7, 3).random()

    def test_trials_are_independent_streams(self):
        assert trial_rng(7, 3).random() != trial_rng(7, 4).random()
        assert trial_rng(7).random() != trial_rng(7, 0).random()


class TestSampleTrajectory:
    """测试 sample_trajectory"""

    def test_lengths_and_reproducibility(self, two_state_model):
        prior = FiniteDistribution([0.5, 0.5])
        first = sample_trajectory(two_state_model, prior, 10, seed=1)
        second = sample_trajectory(two_state_model, prior, 10, seed=1)
        assert first == second
        states, observations = first
        assert len(states) == len(observations) == 11

    def test_respects_kernel_support(self, deterministic_model):
        """观测等于状态；状态 0 之后不会是 0，状态 1 之后不会是 2"""
        for seed in range(20):
            states, observations = sample_trajectory(deterministic_model, FiniteDistribution.uniform(3), 8, seed)
            assert states == observations
            for a, b in zip(states, states[1:]):
                assert not (a == 0 and b == 0)
                assert not (a == 1 and b == 2)

    def test_point_mass_prior(self, deterministic_model):
        states, _ = sample_trajectory(deterministic_model, FiniteDistribution.point_mass(3, 2), 3, seed=9)
        assert states[0] == 2

    def test_policy(self, controlled_model):
        states, _ = sample_trajectory(controlled_model, FiniteDistribution.uniform(3), 3, 5, policy=["stay"] * 3)
        assert len(states) == 4

    def test_gaussian(self, gaussian_model):
        grid = gaussian_model.gaussian.default_grid(100)
        states, observations = sample_trajectory(gaussian_model, GridDensity.gaussian(grid, 0.0, 1.0), 5, seed=2)
        assert len(states) == 6
        assert all(isinstance(v, float) for v in observations)

    def test_gaussian_needs_grid_prior(self, gaussian_model):
        with pytest.raises(ContractViolationError):
            sample_trajectory(gaussian_model, FiniteDistribution.uniform(2), 3, seed=2)

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_invalid_steps(self, two_state_model, n):
        with pytest.raises(ContractViolationError):
            sample_trajectory(two_state_model, FiniteDistribution([0.5, 0.5]), n, seed=1)

    def test_policy_too_short(self, controlled_model):
        with pytest.raises(ContractViolationError):
            sample_trajectory(controlled_model, FiniteDistribution.uniform(3), 3, 5, policy=["stay"])


class TestDualFilterExperiment:
    """测试 dual_filter_experiment"""

    def test_independent_of_thread_count(self, two_state_config, event_bus):
        single = dual_filter_experiment(two_state_config, Settings(threads=1), event_bus)
        many = dual_filter_experiment(two_state_config, Settings(threads=4), event_bus)
        assert single.mean_tv == many.mean_tv
        assert single.std == many.std
        assert single.ratios == many.ratios

    def test_statistics_shape(self, two_state_config, settings, event_bus):
        stats = dual_filter_experiment(two_state_config, settings, event_bus)
        assert stats.horizon == 6
        assert len(stats.ratios) == 6
        assert stats.excluded == [0] * 7
        assert stats.used_trials == 300
        assert stats.status is StatsStatus.OK
        assert stats.alpha == pytest.approx(0.6)
        assert all(0.0 <= m <= 2.0 for m in stats.mean_tv)

    def test_forgets_initial_condition(self, two_state_config, settings, event_bus):
        stats = dual_filter_experiment(two_state_config, settings, event_bus)
        assert stats.final_mean < 0.1 * stats.mean_tv[0]
        assert stats.envelope_satisfied
        assert stats.envelope[0] == pytest.approx(1.5 * 1.4)

    def test_grid_embedding_matches_finite_backend(self, two_state_config, settings, event_bus):
        finite = dual_filter_experiment(two_state_config, settings, event_bus)
        embedded = dual_filter_experiment(
            grid_config(two_state_config.model, [0.9, 0.1], [0.2, 0.8], trials=300, horizon=6).with_seed(two_state_config.seed),
            settings,
            event_bus,
        )
        assert embedded.horizon == finite.horizon
        assert max(abs(a - b) for a, b in zip(finite.mean_tv, embedded.mean_tv)) <= 1e-3
        assert embedded.excluded_total == 0

    def test_identical_priors_never_separate(self, two_state_config, settings, event_bus):
        same = FiniteDistribution([0.3, 0.7])
        cfg = ExperimentConfig(
            name="identical",
            model=two_state_config.model,
            mu=same,
            nu=same,
            horizon=5,
            trials=100,
            seed=9,
        )
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.mean_tv == [0.0] * 6
        assert stats.envelope_satisfied

    def test_memoryless_model_forgets_after_one_step(self, settings, event_bus):
        """T 各行相同、Q 无信息：第 0 步保留先验距离，之后两个滤波器重合"""
        model = PompModel.finite_model(
            "memoryless",
            StochasticMatrix.constant_rows([0.5, 0.5], 2),
            StochasticMatrix.constant_rows([0.4, 0.6], 2),
        )
        cfg = ExperimentConfig(
            name="memoryless",
            model=model,
            mu=FiniteDistribution([0.9, 0.1]),
            nu=FiniteDistribution([0.2, 0.8]),
            horizon=4,
            trials=50,
            seed=2,
        )
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.mean_tv[0] == pytest.approx(1.4, abs=1e-12)
        assert stats.mean_tv[1:] == pytest.approx([0.0] * 4, abs=1e-12)
        assert stats.alpha == 0.0

    def test_seed_changes_sample(self, two_state_config, settings, event_bus):
        a = dual_filter_experiment(two_state_config, settings, event_bus)
        b = dual_filter_experiment(two_state_config.with_seed(1), settings, event_bus)
        assert a.mean_tv != b.mean_tv

    def test_degenerate_trials_excluded(self, deterministic_model, settings, event_bus):
        """ν 在状态 0 上没有质量：X_0 = 0 的试验在第 0 步退化"""
        excluded = []
        event_bus.subscribe(EventType.TRIAL_EXCLUDED, lambda e: excluded.append(e.data["trial"]))
        cfg = grid_config(deterministic_model, [1 / 3] * 3, [0.0, 0.5, 0.5])
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert 0 < stats.excluded_total < 60
        assert len(set(stats.excluded)) == 1
        assert len(excluded) == stats.excluded_total
        assert stats.status is StatsStatus.WARNING
        assert stats.mean_tv == pytest.approx([0.0] * 5, abs=1e-15)

    def test_all_degenerate(self, deterministic_model, settings, event_bus):
        cfg = grid_config(deterministic_model, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], trials=5)
        with pytest.raises(ContractViolationError):
            dual_filter_experiment(cfg, settings, event_bus)

    def test_progress_events(self, two_state_config, event_bus):
        progress = []
        completed = []
        event_bus.subscribe(EventType.EXPERIMENT_PROGRESS, lambda e: progress.append(e.data["completed"]))
        event_bus.subscribe(EventType.EXPERIMENT_COMPLETED, lambda e: completed.append(e.data["status"]))
        dual_filter_experiment(two_state_config, Settings(threads=3), event_bus)
        assert progress[-1] == 300
        assert progress == sorted(progress)
        assert completed == ["ok"]

    def test_controlled(self, controlled_model, settings, event_bus):
        cfg = ExperimentConfig(
            name="controlled",
            model=controlled_model,
            mu=FiniteDistribution.point_mass(3, 0),
            nu=FiniteDistribution.uniform(3),
            horizon=4,
            trials=200,
            seed=11,
            policy=("stay", "shift", "stay", "shift"),
        )
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.alpha == pytest.approx(0.84)
        assert stats.final_mean < stats.mean_tv[0]

    def test_gaussian_grid(self, gaussian_model, settings, event_bus):
        grid = gaussian_model.gaussian.default_grid(200)
        cfg = ExperimentConfig(
            name="gaussian",
            model=gaussian_model,
            mu=GridDensity.gaussian(grid, -2.0, 0.5),
            nu=GridDensity.gaussian(grid, 2.0, 1.0),
            horizon=3,
            trials=20,
            seed=5,
            backend=Backend.GRID,
            grid=grid,
        )
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.excluded_total == 0
        assert all(0.0 <= m <= 2.0 for m in stats.mean_tv)
        assert stats.alpha == pytest.approx(0.89, abs=1e-3)


class TestEmpiricalContraction:
    """测试 empirical_contraction 与 CSV"""

    @staticmethod
    def make_stats():
        return StabilityStats(
            mean_tv=[1.0, 0.5, 0.2],
            std=[0.1, 0.1, 0.1],
            ci95=[0.01, 0.06, 0.01],
            envelope=[2.0, 1.2, 0.72],
            ratios=[],
            excluded=[0, 0, 1],
            trials=100,
            alpha=0.6,
        )

    def test_noise_guard(self):
        stats = self.make_stats()
        assert empirical_contraction(stats) == [0.5, None]

    def test_zero_mean_has_no_ratio(self):
        stats = self.make_stats()
        stats.mean_tv = [0.0, 0.0, 0.0]
        assert empirical_contraction(stats) == [None, None]

    def test_csv(self, temp_dir):
        stats = self.make_stats()
        stats.ratios = empirical_contraction(stats)
        path = write_stats_csv(stats, temp_dir / "out" / "stats.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "step,mean_tv,std,ci95,envelope,ratio,excluded"
        assert lines[1] == "0,1.0,0.1,0.01,2.0,0.5,0"
        assert lines[2] == "1,0.5,0.1,0.06,1.2,,0"
        assert lines[3] == "2,0.2,0.1,0.01,0.72,,1"
        assert len(lines) == 4
        assert not list(path.parent.glob("*.tmp"))


@pytest.mark.slow
@pytest.mark.acceptance
class TestShippedExperiments:
    """随仓库提供的实验配置（完整规模）"""

    def test_two_state_envelope(self, experiments_dir, settings, event_bus):
        cfg = load_experiment_config(experiments_dir / "two_state_stable.json", settings)
        assert (cfg.trials, cfg.horizon) == (10_000, 20)
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.alpha == pytest.approx(0.6)
        assert stats.status is StatsStatus.OK
        assert stats.envelope_violations(4.0) == []
        for n, ratio in enumerate(stats.ratios):
            if ratio is not None:
                assert ratio <= stats.alpha + 3.0 * stats.ci95[n + 1] / stats.mean_tv[n]

    def test_gaussian_grid_envelope(self, experiments_dir, settings, event_bus):
        cfg = load_experiment_config(experiments_dir / "gaussian_1p2_1p5.json", settings)
        assert cfg.grid.cells == 400
        stats = dual_filter_experiment(cfg, settings, event_bus)
        assert stats.alpha < 1.0
        assert stats.excluded_total == 0
        assert stats.final_mean < stats.mean_tv[0]
        assert stats.final_mean <= stats.envelope[-1] + 4.0 * stats.ci95[-1]
