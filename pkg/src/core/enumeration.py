"""
Enumeration - 小规模有限模型的精确穷举

本模块通过对所有状态路径 / 观测序列求和来计算：
- P^μ(X_n ∈ · | Y_[0,n])：滤波递推的独立参照
- E^μ[∥π_n^μ − π_n^ν∥_TV]：对所有观测序列按 P^μ 加权的精确期望

代价随状态数与步数指数增长，只用于 ≤ 4 个状态、≤ 4 步的模型。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import AbsoluteContinuityError, ContractViolationError
from src.core.measures import first_continuity_violation
from src.models.distributions import FiniteDistribution, SubProbability
from src.models.pomp_model import PompModel


logger = logging.getLogger(__name__)


def _check_finite(operation: str, model: PompModel, prior: FiniteDistribution) -> None:
    if not model.is_finite:
        raise ContractViolationError(operation, "exact enumeration needs a finite model")
    if len(prior) != model.finite.states:
        raise ContractViolationError(operation, f"prior has {len(prior)} entries, model has {model.finite.states} states")


def _kernel_entries(model: PompModel, policy: Optional[Sequence[str]], k: int) -> np.ndarray:
    return model.transition(None if policy is None else policy[k]).entries


def joint_conditioning(
    model: PompModel,
    prior: FiniteDistribution,
    observations: Sequence[int],
    policy: Optional[Sequence[str]] = None
) -> Optional[FiniteDistribution]:
    """
    穷举所有状态路径计算 P^prior(X_n ∈ · | Y_0 = y_0, ..., Y_n = y_n)

    Returns:
        条件分布；观测序列概率为零时返回 None
    """
    _check_finite("joint_conditioning", model, prior)
    n_states = model.finite.states
    Q = model.finite.Q.entries
    horizon = len(observations) - 1
    if horizon < 0:
        raise ContractViolationError("joint_conditioning", "need at least one observation")

    posterior = np.zeros(n_states)
    for path in itertools.product(range(n_states), repeat=horizon + 1):
        weight = prior.probs[path[0]] * Q[path[0], observations[0]]
        for k in range(horizon):
            if weight == 0.0:
                break
            T = _kernel_entries(model, policy, k)
            weight *= T[path[k], path[k + 1]] * Q[path[k + 1], observations[k + 1]]
        posterior[path[-1]] += weight

    joint = SubProbability(values=posterior, mass=float(posterior.sum()))
    if joint.mass <= 0.0:
        return None
    return joint.normalized()


def expected_filter_distance(
    model: PompModel,
    mu: FiniteDistribution,
    nu: FiniteDistribution,
    horizon: int,
    policy: Optional[Sequence[str]] = None
) -> List[float]:
    """
    精确计算 E^μ[∥π_n^μ − π_n^ν∥_TV]，n = 0..horizon

    对每个观测前缀同时推进 μ、ν 的未归一化前向向量；前缀概率
    P^μ(y_0..y_n) 是 μ 前向向量之和，为零的前缀被剪掉。

    Raises:
        AbsoluteContinuityError: μ 不绝对连续于 ν
    """
    _check_finite("expected_filter_distance", model, mu)
    index = first_continuity_violation(mu, nu)
    if index is not None:
        raise AbsoluteContinuityError("expected_filter_distance", index)
    if policy is not None and len(policy) < horizon:
        raise ContractViolationError("expected_filter_distance", f"policy shorter than horizon {horizon}")

    Q = model.finite.Q.entries
    symbols = model.finite.symbols
    expected = [0.0] * (horizon + 1)

    def descend(step: int, a_mu: np.ndarray, a_nu: np.ndarray) -> None:
        weight = a_mu.sum()
        if weight <= 0.0:
            return
        expected[step] += weight * float(np.abs(a_mu / weight - a_nu / a_nu.sum()).sum())
        if step == horizon:
            return
        T = _kernel_entries(model, policy, step)
        pushed_mu = a_mu @ T
        pushed_nu = a_nu @ T
        for y in range(symbols):
            descend(step + 1, pushed_mu * Q[:, y], pushed_nu * Q[:, y])

    for y0 in range(symbols):
        descend(0, mu.probs * Q[:, y0], nu.probs * Q[:, y0])

    logger.debug(f"Enumerated expected filter distance over {symbols}^{horizon + 1} observation sequences")
    return expected
