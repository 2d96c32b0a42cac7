"""
Simulation Controller - Monte Carlo 实验控制器

本模块实现 simulate 命令：加载实验配置，运行双滤波实验，
原子写出逐步统计 CSV 并输出摘要。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
from pathlib import Path
from typing import Optional, Union

from src.config.settings import Settings
from src.core.modelio import load_experiment_config
from src.core.simulate import dual_filter_experiment, write_stats_csv
from src.models.results import CommandResult, StabilityStats
from src.utils.event_bus import Event, EventBus, EventType
from src.utils.formatting import render_key_values, sig4


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SimulationController:
    """
    实验控制器

    Attributes:
        settings: 运行时设置（线程数、结果目录）
        event_bus: 事件总线，进度事件在这里转为 DEBUG 日志
    """

    def __init__(self, settings: Optional[Settings] = None, event_bus: Optional[EventBus] = None):
        self.settings = settings or Settings.load()
        self.event_bus = event_bus or EventBus()
        logger.info("SimulationController initialized")

    def simulate(
        self,
        config_path: PathLike,
        seed: Optional[int] = None,
        csv_path: Optional[PathLike] = None,
        quiet: bool = False
    ) -> CommandResult:
        """
        运行实验配置

        CSV 路径优先级：csv_path 参数，其次配置中的 csv 字段，
        最后是 <results_dir>/<配置文件名>_stats.csv。

        Args:
            config_path: 实验配置文件
            seed: 覆盖配置中的基础种子
            csv_path: CSV 输出路径
            quiet: 不输出摘要

        Raises:
            AbsoluteContinuityError: μ 不绝对连续于 ν
            ModelValidationError: 配置或模型不合法
            OSError: 文件不可读或不可写
        """
        config_path = Path(config_path)
        cfg = load_experiment_config(config_path, settings=self.settings)
        if seed is not None:
            cfg = cfg.with_seed(seed)
            logger.info(f"Seed overridden from the command line: {seed}")

        self.event_bus.subscribe(EventType.EXPERIMENT_PROGRESS, self._on_progress)
        try:
            stats = dual_filter_experiment(cfg, settings=self.settings, event_bus=self.event_bus)
        finally:
            self.event_bus.unsubscribe(EventType.EXPERIMENT_PROGRESS, self._on_progress)

        if csv_path is not None:
            target = Path(csv_path)
        elif cfg.csv is not None:
            target = cfg.csv
        else:
            target = self.settings.results_path / f"{config_path.stem}_stats.csv"
        written = write_stats_csv(stats, target)
        logger.info(f"Statistics for {cfg.name!r} written to {written}")

        result = CommandResult(artifacts=[written])
        if not quiet:
            result.stdout = self._summary(cfg.name, stats, written)
        return result

    @staticmethod
    def _on_progress(event: Event) -> None:
        logger.debug(f"Experiment {event.data.get('name')!r}: {event.data.get('completed')}/{event.data.get('trials')} trials")

    @staticmethod
    def _summary(name: str, stats: StabilityStats, csv: Path) -> str:
        pairs = [
            ("experiment", name),
            ("trials used", f"{stats.used_trials} of {stats.trials}"),
            ("alpha", sig4(stats.alpha)),
            ("final mean TV", sig4(stats.final_mean)),
            ("max ratio", sig4(stats.max_ratio)),
            ("envelope satisfied", sig4(stats.envelope_satisfied)),
            ("status", str(stats.status)),
            ("csv", str(csv)),
        ]
        return render_key_values(pairs)
