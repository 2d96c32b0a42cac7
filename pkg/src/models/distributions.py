"""
Distribution Models - 概率测度数据模型

本模块定义有限字母表上的概率向量、一维均匀网格上的分片常数密度，
以及未归一化滤波更新使用的子概率测度。所有类型都是不可变值。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import numpy as np
from scipy.special import ndtr

from src.core.errors import ContractViolationError


logger = logging.getLogger(__name__)

# 归一化容差：有限向量 / 网格密度（求积误差会累积）
FINITE_TOLERANCE = 1e-12
GRID_TOLERANCE = 1e-9


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    """复制为只读 float64 一维数组"""
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridSpec:
    """
    均匀网格描述

    Attributes:
        lo: 左端点
        hi: 右端点
        cells: 单元数量 m ≥ 2
    """
    lo: float
    hi: float
    cells: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo >= self.hi:
            raise ContractViolationError("GridSpec", f"need lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.cells) != self.cells or self.cells < 2:
            raise ContractViolationError("GridSpec", f"need cells >= 2, got {self.cells}")

    @property
    def width(self) -> float:
        """单元宽度 h = (hi - lo) / m"""
        return (self.hi - self.lo) / self.cells

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.cells) + 0.5) * self.width

    def covers(self, lo: float, hi: float) -> bool:
        """网格是否覆盖区间 [lo, hi]"""
        return self.lo <= lo and hi <= self.hi

    def to_dict(self) -> Dict[str, Any]:
        return {"lo": self.lo, "hi": self.hi, "cells": self.cells}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GridSpec':
        return cls(lo=float(data["lo"]), hi=float(data["hi"]), cells=int(data["cells"]))


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """
    有限概率向量

    承载先验 μ、ν 以及滤波 π_n。构造时校验非负性与归一化：
    归一化误差小于 1e-12 时自动重新归一化，否则拒绝。

    Attributes:
        probs: 概率向量（只读 numpy 数组），长度 n ≥ 1

    Example:
        >>> mu = FiniteDistribution([0.05, 0.65, 0.3])
        >>> len(mu)
        3
    """
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if probs.size < 1:
            raise ContractViolationError("FiniteDistribution", "need at least one entry")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
            raise ContractViolationError("FiniteDistribution", f"entries must be finite and >= 0: {probs}")
        total = float(probs.sum())
        if abs(total - 1.0) > FINITE_TOLERANCE:
            raise ContractViolationError(
                "FiniteDistribution", f"entries sum to {total!r}, defect exceeds {FINITE_TOLERANCE}"
            )
        if total != 1.0:
            probs = probs / total
        object.__setattr__(self, "probs", _frozen_array(probs))

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])

    @property
    def masses(self) -> np.ndarray:
        """每个状态的概率质量（对有限分布即 probs）"""
        return self.probs

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0.0)

    def with_masses(self, masses: np.ndarray) -> 'FiniteDistribution':
        """用同样的形状构造新的分布"""
        return FiniteDistribution(masses)

    def to_grid_density(self) -> 'GridDensity':
        """
        嵌入为单位宽度网格上的密度，每个状态占一个单元

        Returns:
            GridDensity: 定义在 [0, n] 上、n 个单元的密度
        """
        n = len(self)
        if n < 2:
            raise ContractViolationError("to_grid_density", "need at least two states to form a grid")
        return GridDensity.from_masses(GridSpec(0.0, float(n), n), self.probs)

    def to_list(self) -> list:
        return [float(p) for p in self.probs]

    @classmethod
    def point_mass(cls, n: int, index: int) -> 'FiniteDistribution':
        """点质量 e_index"""
        if not 0 <= index < n:
            raise ContractViolationError("point_mass", f"index {index} outside 0..{n - 1}")
        probs = np.zeros(n)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, n: int) -> 'FiniteDistribution':
        return cls(np.full(n, 1.0 / n))

    def __repr__(self) -> str:
        return f"FiniteDistribution({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class GridDensity:
    """
    一维均匀网格上的分片常数密度

    连续先验与连续滤波的离散载体。Σ values·h = 1（容差 1e-9）。

    Attributes:
        lo: 网格左端点
        hi: 网格右端点
        values: 每个单元的密度高度（只读数组），长度 m ≥ 2
        mass_defect: 生成该密度时（归一化之前）缺失的质量，仅作诊断
    """
    lo: float
    hi: float
    values: np.ndarray
    mass_defect: float = field(default=0.0)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        grid = GridSpec(float(self.lo), float(self.hi), int(values.size))
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ContractViolationError("GridDensity", "density values must be finite and >= 0")
        total = float(values.sum() * grid.width)
        if abs(total - 1.0) > GRID_TOLERANCE:
            raise ContractViolationError(
                "GridDensity", f"density integrates to {total!r}, defect exceeds {GRID_TOLERANCE}"
            )
        if total != 1.0:
            values = values / total
        object.__setattr__(self, "lo", grid.lo)
        object.__setattr__(self, "hi", grid.hi)
        object.__setattr__(self, "values", _frozen_array(values))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.lo, self.hi, int(self.values.size))

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.values.size

    @property
    def masses(self) -> np.ndarray:
        """每个单元的概率质量 values·h"""
        return self.values * self.width

    def __len__(self) -> int:
        return int(self.values.size)

    def with_masses(self, masses: np.ndarray, mass_defect: float = 0.0) -> 'GridDensity':
        return GridDensity.from_masses(self.grid, masses, mass_defect=mass_defect)

    @classmethod
    def from_masses(cls, grid: GridSpec, masses: Iterable[float], mass_defect: float = 0.0) -> 'GridDensity':
        """由单元质量构造密度"""
        masses = np.asarray(masses, dtype=np.float64)
        if masses.size != grid.cells:
            raise ContractViolationError(
                "GridDensity.from_masses", f"{masses.size} masses for a {grid.cells}-cell grid"
            )
        return cls(grid.lo, grid.hi, masses / grid.width, mass_defect=mass_defect)

    @classmethod
    def uniform(cls, grid: GridSpec, lo: Optional[float] = None, hi: Optional[float] = None) -> 'GridDensity':
        """
        区间 [lo, hi] 上的均匀密度（按单元重叠长度离散化）

        Args:
            grid: 网格
            lo: 均匀分布左端点，默认网格左端点
            hi: 均匀分布右端点，默认网格右端点
        """
        lo = grid.lo if lo is None else float(lo)
        hi = grid.hi if hi is None else float(hi)
        if lo >= hi:
            raise ContractViolationError("GridDensity.uniform", f"need lo < hi, got [{lo}, {hi}]")
        edges = grid.edges
        overlap = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None)
        if overlap.sum() <= 0.0:
            raise ContractViolationError("GridDensity.uniform", f"[{lo}, {hi}] does not meet the grid")
        return cls.from_masses(grid, overlap / overlap.sum())

    @classmethod
    def gaussian(cls, grid: GridSpec, mean: float, std: float) -> 'GridDensity':
        """N(mean, std²) 的单元积分离散化，截断部分重新归一化"""
        if std <= 0.0:
            raise ContractViolationError("GridDensity.gaussian", f"std must be > 0, got {std}")
        cdf = ndtr((grid.edges - mean) / std)
        masses = np.diff(cdf)
        total = float(masses.sum())
        if total <= 0.0:
            raise ContractViolationError("GridDensity.gaussian", "Gaussian has no mass on the grid")
        return cls.from_masses(grid, masses / total, mass_defect=1.0 - total)

    def __repr__(self) -> str:
        return f"GridDensity(lo={self.lo}, hi={self.hi}, cells={self.values.size})"


@dataclass(frozen=True, eq=False)
class SubProbability:
    """
    子概率测度

    未归一化滤波更新 φ̄(μ, y) 的载体，总质量 mass ∈ [0, 1]。

    Attributes:
        values: 每个状态（或单元）的质量
        mass: 总质量
        grid: 网格情形下的网格，有限情形为 None
    """
    values: np.ndarray
    mass: float
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if np.any(values < 0.0):
            raise ContractViolationError("SubProbability", "entries must be >= 0")
        integral = float(values.sum() * (self.grid.width if self.grid else 1.0))
        if abs(integral - self.mass) > FINITE_TOLERANCE:
            raise ContractViolationError(
                "SubProbability", f"mass {self.mass!r} differs from entry total {integral!r}"
            )
        if not -FINITE_TOLERANCE <= self.mass <= 1.0 + FINITE_TOLERANCE:
            raise ContractViolationError("SubProbability", f"mass {self.mass!r} outside [0, 1]")
        object.__setattr__(self, "values", _frozen_array(values))

    def normalized(self):
        """归一化为概率分布（质量为零时违反契约）"""
        if self.mass <= 0.0:
            raise ContractViolationError("SubProbability.normalized", "zero mass cannot be normalized")
        if self.grid is not None:
            return GridDensity.from_masses(self.grid, self.values * self.grid.width / self.mass)
        return FiniteDistribution(self.values / self.values.sum())
