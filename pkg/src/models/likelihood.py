"""
Likelihood Models - 似然表

本模块定义 g(x, y) = dQ(·|x)/dλ 的两种载体：
- FiniteLikelihood: 有限观测字母表，g[x][y] = Q_xy / λ_y
- GaussianLikelihood: 一维高斯观测，g(x, y) = N(y; m(x), σ²) 的密度值

两者都对分布的 masses 视图逐项求值，因此滤波算法只写一次。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.stats import norm

from src.core.errors import ContractViolationError
from src.models.distributions import FINITE_TOLERANCE, FiniteDistribution, GridDensity
from src.models.operators import Gaussian1DKernel, StochasticMatrix


logger = logging.getLogger(__name__)

Distribution = Union[FiniteDistribution, GridDensity]
Observation = Union[int, float]


class LikelihoodTable(ABC):
    """似然表抽象基类"""

    @abstractmethod
    def evaluate(self, y: Observation, pi: Distribution) -> np.ndarray:
        """
        计算 g(·, y) 在 pi 的每个状态（或单元）上的值

        Args:
            y: 观测（有限情形为 0 起始的符号下标，高斯情形为实数）
            pi: 决定求值位置的分布

        Returns:
            np.ndarray: 与 pi.masses 等长的非负数组
        """


@dataclass(frozen=True, eq=False)
class FiniteLikelihood(LikelihoodTable):
    """
    有限观测字母表上的似然矩阵

    Attributes:
        g: n×k 矩阵，g[x, y] = Q_xy / λ_y
        lam: 长度 k 的支配测度权重 λ（计数测度时全为 1）
    """
    g: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=np.float64)
        lam = np.array(self.lam, dtype=np.float64).reshape(-1)
        if g.ndim != 2 or g.shape[1] != lam.size:
            raise ContractViolationError("FiniteLikelihood", f"g shape {g.shape} does not fit {lam.size} weights")
        if np.any(g < 0.0) or np.any(lam <= 0.0):
            raise ContractViolationError("FiniteLikelihood", "need g >= 0 and lambda > 0")
        defects = np.abs(g @ lam - 1.0)
        if np.any(defects > FINITE_TOLERANCE):
            worst = int(np.argmax(defects))
            raise ContractViolationError(
                "FiniteLikelihood", f"row {worst} integrates to {float(g[worst] @ lam)!r} against lambda"
            )
        g.flags.writeable = False
        lam.flags.writeable = False
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_matrix(cls, Q: StochasticMatrix, lam: Optional[np.ndarray] = None) -> 'FiniteLikelihood':
        """
        由观测核构造似然表

        Args:
            Q: 观测核（行随机矩阵）
            lam: 支配测度，默认计数测度
        """
        lam = np.ones(Q.cols) if lam is None else np.asarray(lam, dtype=np.float64)
        return cls(g=Q.entries / lam[None, :], lam=lam)

    @property
    def states(self) -> int:
        return int(self.g.shape[0])

    @property
    def symbols(self) -> int:
        return int(self.g.shape[1])

    def column(self, y: int) -> np.ndarray:
        """g(·, y)"""
        if isinstance(y, (bool, np.bool_)) or int(y) != y or not 0 <= int(y) < self.symbols:
            raise ContractViolationError("likelihood", f"observation {y!r} is not a symbol in 0..{self.symbols - 1}")
        return self.g[:, int(y)]

    def evaluate(self, y: Observation, pi: Distribution) -> np.ndarray:
        if len(pi) != self.states:
            raise ContractViolationError(
                "likelihood", f"distribution has {len(pi)} states, likelihood has {self.states}"
            )
        return self.column(y)


@dataclass(frozen=True)
class GaussianLikelihood(LikelihoodTable):
    """
    高斯观测似然 g(x, y) = N(y; mean_fn(x), σ²)，λ 为 Lebesgue 测度

    Attributes:
        kernel: 观测核 Q
    """
    kernel: Gaussian1DKernel

    def density(self, x: np.ndarray, y: float) -> np.ndarray:
        return norm.pdf(float(y), loc=self.kernel.means(x), scale=self.kernel.sigma)

    def evaluate(self, y: Observation, pi: Distribution) -> np.ndarray:
        if not isinstance(pi, GridDensity):
            raise ContractViolationError("likelihood", "Gaussian observations need a grid density")
        return self.density(pi.grid.centers, y)
