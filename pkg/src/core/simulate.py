"""
Simulate - 轨迹采样与双滤波 Monte Carlo 实验

每次试验在真实先验 μ 下采样一条观测路径，在同一路径上分别从 μ 和 ν
启动滤波，记录逐步的 TV 距离。试验的随机流只由 (base_seed, trial) 决定，
结果按试验下标存放后再按固定顺序聚合，因此与并行度无关。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import concurrent.futures
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from src.config.settings import Settings
from src.core.errors import ContractViolationError
from src.core.filter import run_filter
from src.core.measures import tv_distance
from src.core.stability import stability_report
from src.models.distributions import FiniteDistribution, GridDensity
from src.models.pomp_model import ExperimentConfig, PompModel
from src.models.results import STATS_CSV_COLUMNS, StabilityStats, StatsStatus
from src.utils.atomic_io import atomic_write_csv
from src.utils.event_bus import EventBus, EventType


logger = logging.getLogger(__name__)

Distribution = Union[FiniteDistribution, GridDensity]

# 排除比例超过此值时实验状态为 WARNING
EXCLUSION_WARNING_FRACTION = 0.01
# 均值必须超过 CI 半宽的倍数，收缩比才被报告
RATIO_NOISE_GUARD = 10.0


def trial_rng(base_seed: int, trial: Optional[int] = None) -> Generator:
    """
    计数器型随机数发生器

    Args:
        base_seed: 基础种子
        trial: 试验下标；None 时直接使用 base_seed
    """
    if trial is None:
        return Generator(Philox(SeedSequence(int(base_seed))))
    return Generator(Philox(SeedSequence(int(base_seed), spawn_key=(int(trial),))))


def _draw_index(rng: Generator, masses: np.ndarray) -> int:
    cdf = np.cumsum(masses)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side='right')), len(masses) - 1)


def _sample_path(
    model: PompModel,
    prior: Distribution,
    n: int,
    rng: Generator,
    policy: Optional[Sequence[str]] = None
) -> Tuple[tuple, tuple]:
    """X_0..X_n 与 Y_0..Y_n；抽样顺序固定为 X_0, Y_0, X_1, Y_1, ..."""
    states = []
    observations = []

    if model.is_finite:
        Q = model.finite.Q
        x = _draw_index(rng, prior.masses)
        for k in range(n + 1):
            states.append(x)
            observations.append(_draw_index(rng, Q.row(x)))
            if k < n:
                T = model.transition(None if policy is None else policy[k])
                x = _draw_index(rng, T.row(x))
        return tuple(states), tuple(observations)

    if not isinstance(prior, GridDensity):
        raise ContractViolationError("sample_trajectory", "gaussian1d models need a grid-density prior")
    f = model.gaussian.transition
    g = model.gaussian.measurement
    cell = _draw_index(rng, prior.masses)
    x = prior.lo + (cell + rng.random()) * prior.width
    for k in range(n + 1):
        states.append(float(x))
        observations.append(float(g.means(x) + g.sigma * rng.standard_normal()))
        if k < n:
            x = float(f.means(x) + f.sigma * rng.standard_normal())
    return tuple(states), tuple(observations)


def sample_trajectory(
    model: PompModel,
    prior: Distribution,
    n: int,
    seed: int,
    policy: Optional[Sequence[str]] = None
) -> Tuple[tuple, tuple]:
    """
    从联合链采样一条轨迹

    X_0 ~ prior，Y_k ~ Q(·|X_k)，X_{k+1} ~ T(·|X_k)。相同种子给出相同路径。

    Args:
        model: 模型
        prior: 初始分布
        n: 步数 ≥ 1
        seed: 随机种子
        policy: 受控模型的动作序列（长度 ≥ n）

    Returns:
        (states, observations): 各含 n + 1 个元素
    """
    if int(n) != n or n < 1:
        raise ContractViolationError("sample_trajectory", f"n must be an integer >= 1, got {n!r}")
    if policy is not None and len(policy) < n:
        raise ContractViolationError("sample_trajectory", f"policy has {len(policy)} actions for {n} steps")
    return _sample_path(model, prior, int(n), trial_rng(seed), policy)


def _run_trial(cfg: ExperimentConfig, trial: int, threshold: float) -> Tuple[np.ndarray, int]:
    """单次试验：返回逐步 TV 与退化步（-1 表示正常）"""
    rng = trial_rng(cfg.seed, trial)
    _, observations = _sample_path(cfg.model, cfg.mu, cfg.horizon, rng, cfg.policy)
    true_filter = run_filter(cfg.mu, observations, cfg.model, cfg.policy, threshold)
    false_filter = run_filter(cfg.nu, observations, cfg.model, cfg.policy, threshold)

    distances = np.full(cfg.horizon + 1, np.nan)
    broken = [t.degenerate_step for t in (true_filter, false_filter) if t.is_degenerate]
    if broken:
        return distances, min(broken)
    for n in range(cfg.horizon + 1):
        distances[n] = tv_distance(true_filter[n], false_filter[n])
    return distances, -1


def _run_batch(
    cfg: ExperimentConfig,
    trials: range,
    tv: np.ndarray,
    degenerate_at: np.ndarray,
    threshold: float
) -> int:
    for trial in trials:
        tv[trial], degenerate_at[trial] = _run_trial(cfg, trial, threshold)
    return len(trials)


def empirical_contraction(stats: StabilityStats) -> List[Optional[float]]:
    """
    经验收缩比 mean[n+1] / mean[n]

    仅当 mean[n] > 10·CI[n] 时报告，否则为 None。长度为 horizon。
    """
    means = stats.mean_tv
    ci = stats.ci95
    ratios: List[Optional[float]] = []
    for n in range(len(means) - 1):
        if means[n] > 0.0 and means[n] > RATIO_NOISE_GUARD * ci[n]:
            ratios.append(means[n + 1] / means[n])
        else:
            ratios.append(None)
    return ratios


def dual_filter_experiment(
    cfg: ExperimentConfig,
    settings: Optional[Settings] = None,
    event_bus: Optional[EventBus] = None
) -> StabilityStats:
    """
    双滤波实验

    Args:
        cfg: 实验配置
        settings: 运行时设置（线程数、CI 分位数、截断阈值），默认从配置文件加载
        event_bus: 事件总线，默认单例

    Returns:
        StabilityStats: 逐步统计

    Raises:
        ContractViolationError: 所有试验都退化
    """
    settings = settings or Settings.load()
    bus = event_bus or EventBus()
    report = stability_report(cfg.model)
    tv0 = cfg.tv0
    workers = settings.worker_count(cfg.trials)

    logger.info(
        f"Experiment {cfg.name!r}: {cfg.trials} trials, horizon {cfg.horizon}, "
        f"backend {cfg.backend}, seed {cfg.seed}, {workers} worker(s), alpha={report.alpha:.6g}"
    )
    bus.emit(EventType.EXPERIMENT_STARTED, name=cfg.name, trials=cfg.trials, horizon=cfg.horizon, workers=workers)

    tv = np.full((cfg.trials, cfg.horizon + 1), np.nan)
    degenerate_at = np.full(cfg.trials, -1, dtype=np.int64)

    if workers == 1:
        _run_batch(cfg, range(cfg.trials), tv, degenerate_at, settings.truncation_threshold)
        bus.emit(EventType.EXPERIMENT_PROGRESS, name=cfg.name, completed=cfg.trials, trials=cfg.trials)
    else:
        batch_size = max(1, math.ceil(cfg.trials / (workers * 4)))
        batches = [range(s, min(s + batch_size, cfg.trials)) for s in range(0, cfg.trials, batch_size)]
        completed = 0
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(_run_batch, cfg, batch, tv, degenerate_at, settings.truncation_threshold)
                for batch in batches
            ]
            for future in concurrent.futures.as_completed(futures):
                completed += future.result()
                bus.emit(EventType.EXPERIMENT_PROGRESS, name=cfg.name, completed=completed, trials=cfg.trials)

    # 聚合按试验下标顺序进行
    excluded_mask = degenerate_at >= 0
    for trial in np.flatnonzero(excluded_mask):
        logger.warning(f"Trial {trial} excluded: filter degenerate at step {degenerate_at[trial]}")
        bus.emit(EventType.TRIAL_EXCLUDED, name=cfg.name, trial=int(trial), step=int(degenerate_at[trial]))

    used = tv[~excluded_mask]
    count = used.shape[0]
    if count == 0:
        raise ContractViolationError("dual_filter_experiment", f"all {cfg.trials} trials degenerated")

    mean = used.mean(axis=0)
    std = used.std(axis=0, ddof=1) if count > 1 else np.zeros(cfg.horizon + 1)
    ci95 = settings.ci_z * std / math.sqrt(count)
    excluded = [int(np.count_nonzero(excluded_mask & (degenerate_at <= n))) for n in range(cfg.horizon + 1)]

    status = StatsStatus.OK
    if excluded[-1] > EXCLUSION_WARNING_FRACTION * cfg.trials:
        status = StatsStatus.WARNING
        logger.warning(f"Experiment {cfg.name!r}: {excluded[-1]} of {cfg.trials} trials excluded")
        bus.emit(EventType.EXPERIMENT_WARNING, name=cfg.name, excluded=excluded[-1], trials=cfg.trials)

    stats = StabilityStats(
        mean_tv=[float(v) for v in mean],
        std=[float(v) for v in std],
        ci95=[float(v) for v in ci95],
        envelope=[report.envelope(n, tv0) for n in range(cfg.horizon + 1)],
        ratios=[],
        excluded=excluded,
        trials=cfg.trials,
        alpha=report.alpha,
        status=status,
    )
    stats.ratios = empirical_contraction(stats)

    logger.info(f"Experiment {cfg.name!r} completed: final mean TV {stats.final_mean:.6g}, status {status}")
    bus.emit(EventType.EXPERIMENT_COMPLETED, name=cfg.name, final_mean=stats.final_mean, status=status.value)
    return stats


def write_stats_csv(stats: StabilityStats, path: Union[str, Path]) -> Path:
    """以 step, mean_tv, std, ci95, envelope, ratio, excluded 列原子写出统计"""
    return atomic_write_csv(path, STATS_CSV_COLUMNS, stats.to_csv_rows())
