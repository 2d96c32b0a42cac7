"""
Result Models - 计算结果数据模型

本模块定义滤波轨迹、稳定性报告、阈值求解结果、模型分析结果、
Monte Carlo 统计以及 CLI 命令结果。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from src.models.distributions import FiniteDistribution, GridDensity


logger = logging.getLogger(__name__)

Distribution = Union[FiniteDistribution, GridDensity]

STATS_CSV_COLUMNS = ("step", "mean_tv", "std", "ci95", "envelope", "ratio", "excluded")


@dataclass
class FilterTrajectory:
    """
    滤波轨迹 π_0, π_1, ...

    Attributes:
        steps: 每个时刻的滤波分布
        observations: 产生该轨迹的观测序列
        degenerate_step: 归一化常数为零的时刻（轨迹在此截断），正常时为 None
        mass_defects: 网格后端每步预测丢失的质量（有限后端全为 0）
    """
    steps: List[Distribution]
    observations: Tuple[Any, ...]
    degenerate_step: Optional[int] = None
    mass_defects: List[float] = field(default_factory=list)

    @property
    def is_degenerate(self) -> bool:
        return self.degenerate_step is not None

    @property
    def final(self) -> Distribution:
        return self.steps[-1]

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, index: int) -> Distribution:
        return self.steps[index]


@dataclass(frozen=True)
class StabilityReport:
    """
    稳定性报告

    Attributes:
        delta_T: δ(T)（受控时为 δ̃(T)）
        delta_Q: δ(Q)
        alpha: (1 − δ_T)(2 − δ_Q)
        stable: alpha < 1
        stable_for_any_Q: δ_T > 1/2，与观测核无关地稳定
    """
    delta_T: float
    delta_Q: float
    alpha: float
    stable: bool
    stable_for_any_Q: bool

    def envelope(self, n: int, tv0: float) -> float:
        """(2 − δ_Q)·α^n·tv0"""
        return (2.0 - self.delta_Q) * self.alpha ** n * tv0

    @property
    def verdict(self) -> str:
        return "stable" if self.stable else "not certified stable"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta_T": self.delta_T,
            "delta_Q": self.delta_Q,
            "alpha": self.alpha,
            "stable": self.stable,
            "stable_for_any_Q": self.stable_for_any_Q,
        }


@dataclass(frozen=True)
class MeasurementThreshold:
    """
    给定 σ_t/t 时所需的最小 σ_q/q

    Attributes:
        rt: σ_t / t
        delta_T: 2Φ(−1/rt)
        required: False 表示 δ_T ≥ 1/2，任意观测核都收缩（表中记作 N/A）
        ratio: 阈值 σ_q/q；不可达时为 +inf；required 为 False 时为 None
        delta_Q: 阈值处的 δ(Q)
    """
    rt: float
    delta_T: float
    required: bool
    ratio: Optional[float] = None
    delta_Q: Optional[float] = None

    @property
    def attainable(self) -> bool:
        return self.required and self.ratio is not None and math.isfinite(self.ratio)

    @property
    def alpha(self) -> Optional[float]:
        """阈值处的 α（恒为 1，可作校验）；不可达或无需条件时为 None"""
        if not self.attainable:
            return None
        return (1.0 - self.delta_T) * (2.0 - self.delta_Q)


@dataclass
class ModelAnalysis:
    """
    analyze 命令的完整结果

    Attributes:
        model_name: 模型名称
        kind: 模型类型字符串
        report: 稳定性报告
        action_deltas: 受控模型每个动作的 δ(T_u)
        mixing_T: T 的混合系数 ε（不混合时为 None）
        mixing_update: 未归一化更新 φ̄ 的混合系数 ε
        hilbert_factor: Hilbert 度量基线因子（m = 1）
        hilbert_source: 基线使用的 ε 来源（"update" 或 "transition"）
        overlap_T: 高斯模型 δ(T) 的数值重叠交叉校验
        overlap_Q: 高斯模型 δ(Q) 的数值重叠交叉校验
        ratio_T: 高斯模型 σ_t / t
        ratio_Q: 高斯模型 σ_q / q
    """
    model_name: str
    kind: str
    report: StabilityReport
    action_deltas: Dict[str, float] = field(default_factory=dict)
    mixing_T: Optional[float] = None
    mixing_update: Optional[float] = None
    hilbert_factor: Optional[float] = None
    hilbert_source: Optional[str] = None
    overlap_T: Optional[float] = None
    overlap_Q: Optional[float] = None
    ratio_T: Optional[float] = None
    ratio_Q: Optional[float] = None

    @property
    def is_mixing(self) -> bool:
        return self.mixing_T is not None


class StatsStatus(Enum):
    """实验状态：排除的试验超过 1% 时为 WARNING"""
    OK = "ok"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


@dataclass
class StabilityStats:
    """
    双滤波实验的逐步统计

    Attributes:
        mean_tv: 每步平均 TV，长度 horizon + 1
        std: 每步样本标准差（ddof = 1）
        ci95: 每步 95% 置信区间半宽
        envelope: 每步包络值 (2 − δ_Q)·α^n·∥μ − ν∥
        ratios: 第 n 步到第 n+1 步的经验收缩比，长度 horizon，未定义处为 None
        excluded: 到第 n 步为止退化而被排除的试验数（累计）
        trials: 请求的试验次数
        alpha: 模型的 α
        status: 实验状态
    """
    mean_tv: List[float]
    std: List[float]
    ci95: List[float]
    envelope: List[float]
    ratios: List[Optional[float]]
    excluded: List[int]
    trials: int
    alpha: float
    status: StatsStatus = StatsStatus.OK

    @property
    def horizon(self) -> int:
        return len(self.mean_tv) - 1

    @property
    def excluded_total(self) -> int:
        return self.excluded[-1] if self.excluded else 0

    @property
    def used_trials(self) -> int:
        return self.trials - self.excluded_total

    @property
    def final_mean(self) -> float:
        return self.mean_tv[-1]

    @property
    def max_ratio(self) -> Optional[float]:
        defined = [r for r in self.ratios if r is not None]
        return max(defined) if defined else None

    def envelope_violations(self, ci_multiple: float = 4.0) -> List[int]:
        """平均 TV 超出 envelope + ci_multiple·CI 的步"""
        return [
            n for n, (m, e, c) in enumerate(zip(self.mean_tv, self.envelope, self.ci95))
            if m > e + ci_multiple * c
        ]

    @property
    def envelope_satisfied(self) -> bool:
        return not self.envelope_violations()

    def to_csv_rows(self) -> List[Dict[str, Any]]:
        """按 STATS_CSV_COLUMNS 的行；ratio 列放在转移的起点步，最后一步为空"""
        rows = []
        for n in range(len(self.mean_tv)):
            ratio = self.ratios[n] if n < len(self.ratios) else None
            rows.append({
                "step": n,
                "mean_tv": repr(float(self.mean_tv[n])),
                "std": repr(float(self.std[n])),
                "ci95": repr(float(self.ci95[n])),
                "envelope": repr(float(self.envelope[n])),
                "ratio": "" if ratio is None else repr(float(ratio)),
                "excluded": self.excluded[n],
            })
        return rows


@dataclass
class CommandResult:
    """
    CLI 命令结果

    Attributes:
        exit_code: 0 成功，1 契约/校验失败，2 I/O 失败
        stdout: 标准输出内容
        artifacts: 写出的 CSV 文件路径
    """
    exit_code: int = 0
    stdout: str = ""
    artifacts: List[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0

