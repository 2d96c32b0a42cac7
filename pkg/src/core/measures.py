"""
Measures - 概率测度的度量与比较

本模块提供其它模块共用的测度运算：
- 总变差距离（ℓ1 约定，取值 [0, 2]）
- Hilbert 射影度量（有限分布）
- 绝对连续性判定与 Radon–Nikodym 导数

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
import math
from typing import Optional, Union

import numpy as np

from src.core.errors import AbsoluteContinuityError, ContractViolationError
from src.models.distributions import FiniteDistribution, GridDensity


logger = logging.getLogger(__name__)

Distribution = Union[FiniteDistribution, GridDensity]


def _check_same_space(operation: str, p: Distribution, q: Distribution) -> None:
    if type(p) is not type(q):
        raise ContractViolationError(operation, f"cannot compare {type(p).__name__} with {type(q).__name__}")
    if len(p) != len(q):
        raise ContractViolationError(operation, f"length mismatch: {len(p)} vs {len(q)}")
    if isinstance(p, GridDensity) and p.grid != q.grid:
        raise ContractViolationError(operation, f"grid mismatch: {p.grid} vs {q.grid}")


def tv_distance(p: Distribution, q: Distribution) -> float:
    """
    总变差距离

    有限情形为 Σ|p_i − q_i|，网格情形为 Σ|v_i − w_i|·h。

    Args:
        p: 分布
        q: 同类型、同长度（同网格）的分布

    Returns:
        float: [0, 2] 内的距离

    Raises:
        ContractViolationError: 类型、长度或网格不一致
    """
    _check_same_space("tv_distance", p, q)
    value = float(np.abs(p.masses - q.masses).sum())
    return min(value, 2.0)


def hilbert_metric(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """
    Hilbert 射影度量

    有限向量可比当且仅当支撑相同；此时为
    log(max p_i/q_i · max q_i/p_i)，否则为 +inf。
    """
    _check_same_space("hilbert_metric", p, q)
    if np.array_equal(p.probs, q.probs):
        return 0.0
    p_support = p.probs > 0.0
    if not np.array_equal(p_support, q.probs > 0.0):
        return math.inf
    ratio = p.probs[p_support] / q.probs[p_support]
    return float(math.log(ratio.max()) - math.log(ratio.min()))


def first_continuity_violation(p: Distribution, q: Distribution) -> Optional[int]:
    """第一个 q_i = 0 而 p_i > 0 的下标，不存在时返回 None"""
    _check_same_space("is_absolutely_continuous", p, q)
    bad = np.flatnonzero((q.masses == 0.0) & (p.masses > 0.0))
    return int(bad[0]) if bad.size else None


def is_absolutely_continuous(p: Distribution, q: Distribution) -> bool:
    """p ≪ q：q_i = 0 蕴含 p_i = 0"""
    return first_continuity_violation(p, q) is None


def radon_nikodym(p: FiniteDistribution, q: FiniteDistribution) -> np.ndarray:
    """
    Radon–Nikodym 导数 dp/dq

    Returns:
        np.ndarray: r_i = p_i/q_i（q_i > 0），否则 0

    Raises:
        AbsoluteContinuityError: p 不绝对连续于 q
    """
    index = first_continuity_violation(p, q)
    if index is not None:
        raise AbsoluteContinuityError("radon_nikodym", index)
    r = np.zeros(len(p))
    support = q.probs > 0.0
    r[support] = p.probs[support] / q.probs[support]
    return r
