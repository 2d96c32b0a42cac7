"""
Operator Models - 核算子数据模型

本模块定义核 T、Q 的两种具体形式：
- StochasticMatrix: 有限空间上的行随机矩阵
- Gaussian1DKernel: x ↦ N(m(x), σ²)，均值函数来自封闭的参数族 MeanFunction

每个 MeanFunction 变体都给出精确的解析上确界范数，供 Dobrushin 系数计算使用。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Tuple

import numpy as np

from src.core.errors import ContractViolationError
from src.models.distributions import FINITE_TOLERANCE


logger = logging.getLogger(__name__)

# 构造时抽查 |m(x)| ≤ bound 使用的稠密网格
_SPOT_CHECK_GRID = np.linspace(-50.0, 50.0, 4001)


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """
    行随机矩阵

    有限核 T、Q 的具体形式：entries[i, j] = K(j | i)。
    每行和为 1（容差 1e-12）。条目按原样保存，不重新归一化，
    以保证序列化往返逐位相等。

    Attributes:
        entries: n×m 只读数组

    Example:
        >>> K = StochasticMatrix([[0.5, 0.5], [0.1, 0.9]])
        >>> K.rows, K.cols
        (2, 2)
    """
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ContractViolationError("StochasticMatrix", f"need a non-empty 2-D matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0.0):
            raise ContractViolationError("StochasticMatrix", "entries must be finite and >= 0")
        sums = entries.sum(axis=1)
        defects = np.abs(sums - 1.0)
        worst = int(np.argmax(defects))
        if defects[worst] > FINITE_TOLERANCE:
            raise ContractViolationError(
                "StochasticMatrix", f"row {worst} sums to {sums[worst]!r} (defect {defects[worst]:.3e})"
            )
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    def row(self, index: int) -> np.ndarray:
        return self.entries[index]

    def to_list(self) -> List[List[float]]:
        return [[float(v) for v in row] for row in self.entries]

    @classmethod
    def identity(cls, n: int) -> 'StochasticMatrix':
        return cls(np.eye(n))

    @classmethod
    def constant_rows(cls, row: Iterable[float], n: int) -> 'StochasticMatrix':
        """所有行都等于 row 的矩阵（δ = 1）"""
        return cls(np.tile(np.asarray(row, dtype=np.float64), (n, 1)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.entries.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"StochasticMatrix({self.to_list()})"


class MeanFamily(Enum):
    """
    均值函数族

    Attributes:
        AFFINE: a·x + b 截断到 [-c, c]
        SINE: amplitude·sin(frequency·x + phase)
        TANH: scale·tanh(gain·x)
        TABLE: 分段线性插值，区间外取常数
    """
    AFFINE = "affine"
    SINE = "sine"
    TANH = "tanh"
    TABLE = "table"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, value: str) -> 'MeanFamily':
        """
        从字符串创建 MeanFamily

        Raises:
            ValueError: 未知的函数族
        """
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown mean function family: {value!r}. Must be one of {[e.value for e in cls]}")


class MeanFunction(ABC):
    """有界均值函数的抽象基类"""

    family: MeanFamily

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        """在实数上求值（全函数）"""

    @property
    @abstractmethod
    def sup_norm(self) -> float:
        """精确的解析上确界 sup |m(x)|"""

    @abstractmethod
    def parameters(self) -> Dict[str, Any]:
        """除 family 以外的参数"""

    def to_dict(self) -> Dict[str, Any]:
        data = {"family": self.family.value}
        data.update(self.parameters())
        return data


@dataclass(frozen=True)
class AffineMean(MeanFunction):
    """clip(a·x + b, -c, c)；a = 0 时退化为常数 clip(b)"""
    a: float
    b: float
    c: float
    family = MeanFamily.AFFINE

    def __post_init__(self):
        if not self.c >= 0.0:
            raise ContractViolationError("AffineMean", f"clip level c must be >= 0, got {self.c}")

    def __call__(self, x):
        return np.clip(self.a * np.asarray(x, dtype=np.float64) + self.b, -self.c, self.c)

    @property
    def sup_norm(self) -> float:
        if self.a == 0.0:
            return min(abs(self.b), self.c)
        return self.c

    def parameters(self) -> Dict[str, Any]:
        return {"a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class SineMean(MeanFunction):
    amplitude: float
    frequency: float
    phase: float = 0.0
    family = MeanFamily.SINE

    def __call__(self, x):
        return self.amplitude * np.sin(self.frequency * np.asarray(x, dtype=np.float64) + self.phase)

    @property
    def sup_norm(self) -> float:
        if self.frequency == 0.0:
            return abs(self.amplitude * np.sin(self.phase))
        return abs(self.amplitude)

    def parameters(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude, "frequency": self.frequency, "phase": self.phase}


@dataclass(frozen=True)
class TanhMean(MeanFunction):
    scale: float
    gain: float
    family = MeanFamily.TANH

    def __call__(self, x):
        return self.scale * np.tanh(self.gain * np.asarray(x, dtype=np.float64))

    @property
    def sup_norm(self) -> float:
        # tanh 的上确界不可达，但 bound 只需是上界
        return abs(self.scale) if self.gain != 0.0 else 0.0

    def parameters(self) -> Dict[str, Any]:
        return {"scale": self.scale, "gain": self.gain}


@dataclass(frozen=True)
class TableMean(MeanFunction):
    """
    分段线性表函数

    Attributes:
        points: 严格递增的节点
        values: 节点处的函数值
    """
    points: Tuple[float, ...]
    values: Tuple[float, ...]
    family = MeanFamily.TABLE

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.points) < 1 or len(self.points) != len(self.values):
            raise ContractViolationError("TableMean", "need equally many (>= 1) points and values")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ContractViolationError("TableMean", "points must be strictly increasing")

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=np.float64), self.points, self.values)

    @property
    def sup_norm(self) -> float:
        return max(abs(v) for v in self.values)

    def parameters(self) -> Dict[str, Any]:
        return {"points": list(self.points), "values": list(self.values)}


def mean_function_from_dict(data: Dict[str, Any]) -> MeanFunction:
    """
    从字典创建均值函数

    Args:
        data: 含 "family" 键和对应参数的字典

    Returns:
        MeanFunction: 对应的均值函数实例

    Raises:
        ValueError: 未知函数族
        KeyError: 缺少参数
        ContractViolationError: 参数不合法
    """
    family = MeanFamily.from_string(data.get("family", ""))
    if family is MeanFamily.AFFINE:
        return AffineMean(a=float(data["a"]), b=float(data["b"]), c=float(data["c"]))
    if family is MeanFamily.SINE:
        return SineMean(
            amplitude=float(data["amplitude"]),
            frequency=float(data["frequency"]),
            phase=float(data.get("phase", 0.0))
        )
    if family is MeanFamily.TANH:
        return TanhMean(scale=float(data["scale"]), gain=float(data["gain"]))
    return TableMean(points=tuple(data["points"]), values=tuple(data["values"]))


@dataclass(frozen=True)
class Gaussian1DKernel:
    """
    一维加性高斯核 x ↦ N(mean_fn(x), sigma²)

    Attributes:
        mean_fn: 有界均值函数
        sigma: 标准差 > 0
        bound: 已认证的上确界 ≥ sup |mean_fn|

    Example:
        >>> k = Gaussian1DKernel.from_mean(TanhMean(scale=1.0, gain=2.0), sigma=1.2)
        >>> k.ratio
        1.2
    """
    mean_fn: MeanFunction
    sigma: float
    bound: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ContractViolationError("Gaussian1DKernel", f"sigma must be > 0, got {self.sigma}")
        if not self.bound >= 0.0:
            raise ContractViolationError("Gaussian1DKernel", f"bound must be >= 0, got {self.bound}")
        if self.mean_fn.sup_norm > self.bound * (1.0 + 1e-12) + 1e-15:
            raise ContractViolationError(
                "Gaussian1DKernel",
                f"bound {self.bound} is below the mean function's sup norm {self.mean_fn.sup_norm}"
            )
        sampled = float(np.max(np.abs(self.mean_fn(_SPOT_CHECK_GRID))))
        if sampled > self.bound * (1.0 + 1e-12) + 1e-15:
            raise ContractViolationError(
                "Gaussian1DKernel", f"|mean_fn| reaches {sampled} on the check grid, above bound {self.bound}"
            )

    @classmethod
    def from_mean(cls, mean_fn: MeanFunction, sigma: float) -> 'Gaussian1DKernel':
        """以均值函数的解析上确界作为 bound"""
        return cls(mean_fn=mean_fn, sigma=float(sigma), bound=float(mean_fn.sup_norm))

    @property
    def ratio(self) -> float:
        """σ / bound（bound = 0 时为 +inf）"""
        return self.sigma / self.bound if self.bound > 0.0 else float("inf")

    def means(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.mean_fn(x), dtype=np.float64)
