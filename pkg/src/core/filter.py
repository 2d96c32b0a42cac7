"""
Filter - 非线性滤波

本模块实现贝叶斯更新算子 ψ、预测步 T(π)、组合更新 φ = ψ ∘ T
（含受控版本），以及完整的滤波轨迹。

归一化常数为零时 ψ 返回 DegenerateZero.ZERO，这是建模内的结果而不是异常。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

from src.core.errors import ContractViolationError
from src.core.kernels import TRUNCATION_THRESHOLD, apply_gaussian_kernel, apply_kernel, apply_matrix_to_grid
from src.models.distributions import FiniteDistribution, GridDensity, SubProbability
from src.models.likelihood import FiniteLikelihood, LikelihoodTable, Observation
from src.models.operators import Gaussian1DKernel, StochasticMatrix
from src.models.pomp_model import PompModel
from src.models.results import FilterTrajectory


logger = logging.getLogger(__name__)

# 低于此值的归一化常数视为零（下溢）
DEGENERATE_FLOOR = 1e-300

Distribution = Union[FiniteDistribution, GridDensity]
Kernel = Union[StochasticMatrix, Gaussian1DKernel]


class DegenerateZero(Enum):
    """ψ 在归一化常数为零时的输出"""
    ZERO = "degenerate_zero"

    def __str__(self) -> str:
        return self.value


def predict(pi: Distribution, kernel: Kernel, threshold: float = TRUNCATION_THRESHOLD) -> Distribution:
    """
    预测步 T(π)

    支持的组合：有限分布 + 矩阵、网格密度 + 矩阵（单元即状态）、网格密度 + 高斯核。
    threshold 只作用于高斯核（允许的最大截断质量）。

    Raises:
        ContractViolationError: 不支持的组合或维度不匹配
    """
    if isinstance(kernel, StochasticMatrix):
        if isinstance(pi, FiniteDistribution):
            return apply_kernel(kernel, pi)
        return apply_matrix_to_grid(kernel, pi)
    if isinstance(kernel, Gaussian1DKernel) and isinstance(pi, GridDensity):
        return apply_gaussian_kernel(kernel, pi, threshold=threshold)
    raise ContractViolationError("predict", f"cannot push a {type(pi).__name__} through {type(kernel).__name__}")


def normalizer(pi: Distribution, y: Observation, L: LikelihoodTable) -> float:
    """N^π(y) = Σ_x g(x, y)·π(x)"""
    return float(L.evaluate(y, pi) @ pi.masses)


def bayes_update(
    pi: Distribution,
    y: Observation,
    L: LikelihoodTable
) -> Union[Distribution, DegenerateZero]:
    """
    贝叶斯更新 ψ(π, y)

    Returns:
        后验分布（与 π 同类型），或归一化常数为零时的 DegenerateZero.ZERO
    """
    weights = L.evaluate(y, pi) * pi.masses
    total = float(weights.sum())
    if total < DEGENERATE_FLOOR:
        return DegenerateZero.ZERO
    return pi.with_masses(weights / total)


def filter_update(
    pi: Distribution,
    y: Observation,
    T: Kernel,
    L: LikelihoodTable
) -> Union[Distribution, DegenerateZero]:
    """φ(π, y) = ψ(T(π), y)"""
    return bayes_update(predict(pi, T), y, L)


def filter_update_controlled(
    pi: Distribution,
    u: str,
    y: Observation,
    T_u: Mapping[str, Kernel],
    L: LikelihoodTable
) -> Union[Distribution, DegenerateZero]:
    """
    受控更新 φ(π, u, y) = ψ(T_u(π), y)

    Raises:
        ContractViolationError: 未知动作
    """
    if u not in T_u:
        raise ContractViolationError("filter_update_controlled", f"unknown action {u!r}; known: {sorted(T_u)}")
    return filter_update(pi, y, T_u[u], L)


def unnormalized_update(
    pi: FiniteDistribution,
    y: int,
    T: StochasticMatrix,
    L: FiniteLikelihood
) -> SubProbability:
    """
    未归一化更新 φ̄(π, y) = g(·, y)·T(π)

    计数测度下 g ≤ 1，因此总质量 N(y) ∈ [0, 1]。
    """
    values = L.column(y) * apply_kernel(T, pi).probs
    return SubProbability(values=values, mass=float(values.sum()))


def run_filter(
    prior: Distribution,
    observations: Sequence[Observation],
    model: PompModel,
    policy: Optional[Sequence[str]] = None,
    truncation_threshold: float = TRUNCATION_THRESHOLD
) -> FilterTrajectory:
    """
    计算滤波轨迹

    π_0 = ψ(prior, y_0)，π_{k+1} = φ(π_k, [u_k,] y_{k+1})。
    任一步退化时轨迹在该步之前截断，degenerate_step 记录该步。

    Args:
        prior: 先验
        observations: 非空观测序列
        model: 模型
        policy: 受控模型的动作序列，长度 = len(observations) − 1
        truncation_threshold: 网格预测允许的最大截断质量

    Returns:
        FilterTrajectory: 滤波轨迹
    """
    observations = tuple(observations)
    if not observations:
        raise ContractViolationError("run_filter", "need at least one observation")
    if policy is not None and len(policy) != len(observations) - 1:
        raise ContractViolationError(
            "run_filter", f"policy has {len(policy)} actions for {len(observations)} observations"
        )

    L = model.likelihood
    trajectory = FilterTrajectory(steps=[], observations=observations)

    current = bayes_update(prior, observations[0], L)
    if current is DegenerateZero.ZERO:
        trajectory.degenerate_step = 0
        logger.debug("Filter degenerate at step 0")
        return trajectory
    trajectory.steps.append(current)
    trajectory.mass_defects.append(0.0)

    for k, y in enumerate(observations[1:]):
        kernel = model.transition(None if policy is None else policy[k])
        predicted = predict(current, kernel, truncation_threshold)
        current = bayes_update(predicted, y, L)
        if current is DegenerateZero.ZERO:
            trajectory.degenerate_step = k + 1
            logger.debug(f"Filter degenerate at step {k + 1} (observation {y!r})")
            return trajectory
        trajectory.steps.append(current)
        trajectory.mass_defects.append(float(getattr(predicted, "mass_defect", 0.0)))

    return trajectory
