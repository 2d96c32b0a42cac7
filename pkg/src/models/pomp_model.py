"""
POMP Model - 部分观测马尔可夫过程模型

本模块定义完整的模型（状态/观测空间、T、Q、可选的按动作索引的 T_u）
以及 Monte Carlo 实验配置。模型文件的解析与校验位于 src.core.modelio。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.core.errors import AbsoluteContinuityError, ContractViolationError
from src.models.distributions import FiniteDistribution, GridDensity, GridSpec
from src.models.likelihood import FiniteLikelihood, GaussianLikelihood, LikelihoodTable
from src.models.operators import Gaussian1DKernel, StochasticMatrix


logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

Kernel = Union[StochasticMatrix, Gaussian1DKernel]
Distribution = Union[FiniteDistribution, GridDensity]


class ModelKind(Enum):
    """模型类型"""
    FINITE = "finite"
    GAUSSIAN1D = "gaussian1d"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, value: str) -> 'ModelKind':
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown model kind: {value!r}. Must be one of {[e.value for e in cls]}")


class Backend(Enum):
    """
    滤波后端

    Attributes:
        FINITE: 有限状态向量
        GRID: 一维网格密度（有限模型按单位单元嵌入）
    """
    FINITE = "finite"
    GRID = "grid"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, value: str) -> 'Backend':
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown backend: {value!r}. Must be one of {[e.value for e in cls]}")


@dataclass(frozen=True)
class FiniteModelSpec:
    """
    有限模型参数

    Attributes:
        T: n×n 转移矩阵（无控制时使用）
        Q: n×k 观测矩阵
        actions: (动作名, T_u) 对，按动作名字典序排列
    """
    T: StochasticMatrix
    Q: StochasticMatrix
    actions: Tuple[Tuple[str, StochasticMatrix], ...] = ()

    def __post_init__(self):
        n = self.T.rows
        if self.T.cols != n:
            raise ContractViolationError("FiniteModelSpec", f"T must be square, got {n}x{self.T.cols}")
        if self.Q.rows != n:
            raise ContractViolationError("FiniteModelSpec", f"Q has {self.Q.rows} rows for {n} states")
        actions = tuple(sorted(dict(self.actions).items()))
        if len(actions) != len(self.actions):
            raise ContractViolationError("FiniteModelSpec", "duplicate action names")
        for name, kernel in actions:
            if not isinstance(name, str) or not name:
                raise ContractViolationError("FiniteModelSpec", "action names must be non-empty strings")
            if kernel.rows != n or kernel.cols != n:
                raise ContractViolationError(
                    "FiniteModelSpec", f"action {name!r} kernel is {kernel.rows}x{kernel.cols}, need {n}x{n}"
                )
        object.__setattr__(self, "actions", actions)

    @property
    def states(self) -> int:
        return self.T.rows

    @property
    def symbols(self) -> int:
        return self.Q.cols

    @property
    def action_map(self) -> Dict[str, StochasticMatrix]:
        return dict(self.actions)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"T": self.T.to_list(), "Q": self.Q.to_list()}
        if self.actions:
            data["actions"] = {name: kernel.to_list() for name, kernel in self.actions}
        return data


@dataclass(frozen=True)
class GaussianModelSpec:
    """
    一维加性高斯模型 x' = f(x) + N(0, σ_t²), y = g(x) + N(0, σ_q²)

    Attributes:
        transition: T，bound 即 t
        measurement: Q，bound 即 q
    """
    transition: Gaussian1DKernel
    measurement: Gaussian1DKernel

    def default_grid(self, cells: int) -> GridSpec:
        """覆盖 [-t-6σ_t, t+6σ_t] 的对称网格"""
        half = self.transition.bound + 6.0 * self.transition.sigma
        return GridSpec(-half, half, int(cells))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f": self.transition.mean_fn.to_dict(),
            "t": self.transition.bound,
            "sigma_t": self.transition.sigma,
            "g": self.measurement.mean_fn.to_dict(),
            "q": self.measurement.bound,
            "sigma_q": self.measurement.sigma,
        }


@dataclass(frozen=True)
class PompModel:
    """
    POMP 模型

    Attributes:
        name: 模型名称
        kind: 模型类型，决定 finite / gaussian 中哪一个非空
        finite: 有限模型参数
        gaussian: 高斯模型参数
        version: 模型文件格式版本

    Example:
        >>> model = PompModel.finite_model("demo", [[0.9, 0.1], [0.2, 0.8]], [[0.8, 0.2], [0.3, 0.7]])
        >>> model.kind
        <ModelKind.FINITE: 'finite'>
    """
    name: str
    kind: ModelKind
    finite: Optional[FiniteModelSpec] = None
    gaussian: Optional[GaussianModelSpec] = None
    version: int = MODEL_FORMAT_VERSION

    def __post_init__(self):
        if self.kind is ModelKind.FINITE and (self.finite is None or self.gaussian is not None):
            raise ContractViolationError("PompModel", "a finite model carries exactly the finite parameters")
        if self.kind is ModelKind.GAUSSIAN1D and (self.gaussian is None or self.finite is not None):
            raise ContractViolationError("PompModel", "a gaussian1d model carries exactly the gaussian parameters")

    @classmethod
    def finite_model(
        cls,
        name: str,
        T,
        Q,
        actions: Optional[Mapping[str, Any]] = None
    ) -> 'PompModel':
        """由嵌套列表（或矩阵对象）便捷构造有限模型"""
        as_matrix = lambda m: m if isinstance(m, StochasticMatrix) else StochasticMatrix(m)
        pairs = tuple((k, as_matrix(v)) for k, v in (actions or {}).items())
        return cls(name=name, kind=ModelKind.FINITE, finite=FiniteModelSpec(as_matrix(T), as_matrix(Q), pairs))

    @classmethod
    def gaussian_model(cls, name: str, transition: Gaussian1DKernel, measurement: Gaussian1DKernel) -> 'PompModel':
        return cls(name=name, kind=ModelKind.GAUSSIAN1D, gaussian=GaussianModelSpec(transition, measurement))

    @property
    def is_finite(self) -> bool:
        return self.kind is ModelKind.FINITE

    @property
    def is_controlled(self) -> bool:
        return self.is_finite and bool(self.finite.actions)

    @property
    def action_names(self) -> List[str]:
        return [name for name, _ in self.finite.actions] if self.is_controlled else []

    def transition(self, action: Optional[str] = None) -> Kernel:
        """
        转移核 T（或动作 action 下的 T_u）

        Raises:
            ContractViolationError: 未知动作
        """
        if action is None:
            return self.finite.T if self.is_finite else self.gaussian.transition
        if not self.is_controlled:
            raise ContractViolationError("transition", f"model {self.name!r} has no actions, got {action!r}")
        kernels = self.finite.action_map
        if action not in kernels:
            raise ContractViolationError("transition", f"unknown action {action!r}; known: {sorted(kernels)}")
        return kernels[action]

    @property
    def measurement(self) -> Kernel:
        return self.finite.Q if self.is_finite else self.gaussian.measurement

    @cached_property
    def likelihood(self) -> LikelihoodTable:
        if self.is_finite:
            return FiniteLikelihood.from_matrix(self.finite.Q)
        return GaussianLikelihood(self.gaussian.measurement)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"version": self.version, "name": self.name, "kind": self.kind.value}
        if self.is_finite:
            data["finite"] = self.finite.to_dict()
        else:
            data["gaussian1d"] = self.gaussian.to_dict()
        return data


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    双滤波 Monte Carlo 实验配置

    Attributes:
        name: 实验名称（默认 CSV 文件名取自它）
        model: 模型
        mu: 真实先验（观测在它之下生成）
        nu: 错误先验
        horizon: 步数 H ≥ 1，滤波步 0..H
        trials: 试验次数 ≥ 1
        seed: 基础随机种子
        backend: 滤波后端
        grid: 网格后端使用的网格
        policy: 受控模型的动作序列，长度 = horizon
        model_path: 模型文件路径（来自配置文件时）
        csv: 配置中指定的 CSV 输出路径
    """
    name: str
    model: PompModel
    mu: Distribution
    nu: Distribution
    horizon: int
    trials: int
    seed: int
    backend: Backend = Backend.FINITE
    grid: Optional[GridSpec] = None
    policy: Optional[Tuple[str, ...]] = None
    model_path: Optional[Path] = None
    csv: Optional[Path] = field(default=None)

    def __post_init__(self):
        from src.core.measures import first_continuity_violation

        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ContractViolationError("ExperimentConfig", f"horizon must be >= 1, got {self.horizon}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ContractViolationError("ExperimentConfig", f"trials must be >= 1, got {self.trials}")
        if not self.model.is_finite and self.backend is not Backend.GRID:
            raise ContractViolationError("ExperimentConfig", "gaussian1d models need the grid backend")

        expected = FiniteDistribution if self.backend is Backend.FINITE else GridDensity
        for label, prior in (("mu", self.mu), ("nu", self.nu)):
            if not isinstance(prior, expected):
                raise ContractViolationError(
                    "ExperimentConfig", f"{label} must be a {expected.__name__} for the {self.backend} backend"
                )
        if len(self.mu) != len(self.nu):
            raise ContractViolationError("ExperimentConfig", f"mu has {len(self.mu)} entries, nu has {len(self.nu)}")
        if self.backend is Backend.GRID and self.mu.grid != self.nu.grid:
            raise ContractViolationError("ExperimentConfig", "mu and nu live on different grids")
        if self.model.is_finite and len(self.mu) != self.model.finite.states:
            raise ContractViolationError(
                "ExperimentConfig", f"priors have {len(self.mu)} entries, model has {self.model.finite.states} states"
            )
        if self.backend is Backend.FINITE:
            index = first_continuity_violation(self.mu, self.nu)
            if index is not None:
                raise AbsoluteContinuityError("ExperimentConfig", index)

        if self.policy is not None:
            policy = tuple(self.policy)
            if len(policy) != self.horizon:
                raise ContractViolationError(
                    "ExperimentConfig", f"policy has {len(policy)} actions, horizon is {self.horizon}"
                )
            for action in policy:
                self.model.transition(action)
            object.__setattr__(self, "policy", policy)

    @property
    def tv0(self) -> float:
        """先验间的 TV 距离 ∥μ − ν∥"""
        from src.core.measures import tv_distance
        return tv_distance(self.mu, self.nu)

    def with_seed(self, seed: int) -> 'ExperimentConfig':
        return replace(self, seed=int(seed))

    def with_trials(self, trials: int) -> 'ExperimentConfig':
        return replace(self, trials=int(trials))
