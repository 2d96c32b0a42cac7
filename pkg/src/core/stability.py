"""
Stability - 闭式稳定性量

本模块计算：
- 收缩系数 α = (1 − δ(T))(2 − δ(Q)) 与包络 (2 − δ(Q))·α^n·∥μ − ν∥
- 贝叶斯更新的期望扩张（有限情形精确求和）
- 受控系数 δ̃(T) = min_u δ(T_u)
- Hilbert 度量基线因子
- 给定 σ_t/t 时所需的最小 σ_q/q（二分求根）
- 模型整体分析

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from scipy.optimize import bisect

from src.core.errors import AbsoluteContinuityError, ContractViolationError
from src.core.filter import DEGENERATE_FLOOR, DegenerateZero, bayes_update, normalizer
from src.core.kernels import (
    dobrushin_finite,
    dobrushin_gaussian_analytic,
    dobrushin_overlap_numeric,
    mixing_coefficient,
    standard_normal_cdf,
    unnormalized_mixing_coefficient,
)
from src.core.measures import first_continuity_violation, tv_distance
from src.models.distributions import FiniteDistribution
from src.models.likelihood import FiniteLikelihood
from src.models.operators import StochasticMatrix
from src.models.pomp_model import PompModel
from src.models.results import MeasurementThreshold, ModelAnalysis, StabilityReport


logger = logging.getLogger(__name__)

# 表格默认的 σ_t/t 取值
TABLE1_RATIOS = (1.5, 1.4, 1.3, 1.2, 1.1, 1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3)

RATIO_SEARCH_LO = 1e-6
RATIO_SEARCH_HI = 1e7


def _check_unit_interval(operation: str, name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ContractViolationError(operation, f"{name} must lie in [0, 1], got {value!r}")


def contraction_coefficient(delta_T: float, delta_Q: float) -> float:
    """α = (1 − δ_T)(2 − δ_Q) ∈ [0, 2]"""
    _check_unit_interval("contraction_coefficient", "delta_T", delta_T)
    _check_unit_interval("contraction_coefficient", "delta_Q", delta_Q)
    return (1.0 - delta_T) * (2.0 - delta_Q)


def stability_envelope(n: int, delta_T: float, delta_Q: float, tv0: float) -> float:
    """
    包络 (2 − δ_Q)·α^n·tv0

    Args:
        n: 步数 ≥ 0
        delta_T: δ(T)
        delta_Q: δ(Q)
        tv0: 先验距离 ∥μ − ν∥ ∈ [0, 2]
    """
    if int(n) != n or n < 0:
        raise ContractViolationError("stability_envelope", f"n must be a non-negative integer, got {n!r}")
    if not 0.0 <= tv0 <= 2.0:
        raise ContractViolationError("stability_envelope", f"tv0 must lie in [0, 2], got {tv0!r}")
    alpha = contraction_coefficient(delta_T, delta_Q)
    return (2.0 - delta_Q) * alpha ** int(n) * tv0


def assess_stability(delta_T: float, delta_Q: float) -> StabilityReport:
    """由两个 Dobrushin 系数构造稳定性报告"""
    alpha = contraction_coefficient(delta_T, delta_Q)
    return StabilityReport(
        delta_T=float(delta_T),
        delta_Q=float(delta_Q),
        alpha=alpha,
        stable=alpha < 1.0,
        stable_for_any_Q=delta_T > 0.5,
    )


def expected_bayes_expansion(mu: FiniteDistribution, nu: FiniteDistribution, Q: StochasticMatrix) -> float:
    """
    期望后验距离 Σ_y N^μ(y)·∥ψ(μ, y) − ψ(ν, y)∥

    N^μ 为零的符号不贡献。

    Raises:
        AbsoluteContinuityError: μ 不绝对连续于 ν
        ContractViolationError: 维度不匹配
    """
    index = first_continuity_violation(mu, nu)
    if index is not None:
        raise AbsoluteContinuityError("expected_bayes_expansion", index)
    L = FiniteLikelihood.from_matrix(Q)
    if len(mu) != L.states:
        raise ContractViolationError("expected_bayes_expansion", f"Q has {L.states} rows, priors have {len(mu)} entries")

    total = 0.0
    for y in range(L.symbols):
        weight = normalizer(mu, y, L)
        if weight < DEGENERATE_FLOOR:
            continue
        post_mu = bayes_update(mu, y, L)
        post_nu = bayes_update(nu, y, L)
        if post_nu is DegenerateZero.ZERO:
            continue
        total += weight * tv_distance(post_mu, post_nu)
    return total


def controlled_delta_tilde(T_u: Union[Mapping[str, StochasticMatrix], Iterable[StochasticMatrix]]) -> float:
    """
    δ̃(T) = min_u δ(T_u)

    Raises:
        ContractViolationError: 动作集合为空
    """
    kernels = list(T_u.values()) if isinstance(T_u, Mapping) else list(T_u)
    if not kernels:
        raise ContractViolationError("controlled_delta_tilde", "need at least one action kernel")
    return min(dobrushin_finite(K) for K in kernels)


def hilbert_baseline_bound(epsilon: float, m: int) -> float:
    """
    Hilbert 度量基线因子 (2/(log 3·ε²))·((1 − ε²)/(1 + ε²))^(m−1)

    Args:
        epsilon: 混合系数 ∈ (0, 1]
        m: 步数 ≥ 1
    """
    if not 0.0 < epsilon <= 1.0:
        raise ContractViolationError("hilbert_baseline_bound", f"epsilon must lie in (0, 1], got {epsilon!r}")
    if int(m) != m or m < 1:
        raise ContractViolationError("hilbert_baseline_bound", f"m must be an integer >= 1, got {m!r}")
    eps2 = epsilon * epsilon
    return (2.0 / (math.log(3.0) * eps2)) * ((1.0 - eps2) / (1.0 + eps2)) ** (int(m) - 1)


def min_measurement_ratio(rt: float) -> MeasurementThreshold:
    """
    使 α < 1 所需的最小 σ_q/q

    δ_T = 2Φ(−1/rt)。δ_T ≥ 1/2 时无需条件；否则求 2Φ(−1/rq) = 2 − 1/(1 − δ_T)
    的根。所需 δ_Q 为 1（δ_T 下溢为 0）或根超出搜索区间时返回 +inf。

    Args:
        rt: σ_t / t > 0

    Returns:
        MeasurementThreshold: 阈值结果
    """
    if not rt > 0.0:
        raise ContractViolationError("min_measurement_ratio", f"rt must be > 0, got {rt!r}")
    delta_T = float(2.0 * standard_normal_cdf(-1.0 / rt))
    if delta_T >= 0.5:
        return MeasurementThreshold(rt=rt, delta_T=delta_T, required=False)

    target = 2.0 - 1.0 / (1.0 - delta_T)
    gap = lambda rq: 2.0 * standard_normal_cdf(-1.0 / rq) - target
    if target >= 1.0 or gap(RATIO_SEARCH_HI) < 0.0:
        logger.debug(f"rt={rt}: required delta_Q {target!r} is unattainable")
        return MeasurementThreshold(rt=rt, delta_T=delta_T, required=True, ratio=math.inf, delta_Q=1.0)

    root = bisect(gap, RATIO_SEARCH_LO, RATIO_SEARCH_HI, xtol=1e-12, rtol=1e-9, maxiter=500)
    logger.debug(f"rt={rt}: delta_T={delta_T:.6f}, threshold sigma_q/q={root:.9g}")
    return MeasurementThreshold(
        rt=rt,
        delta_T=delta_T,
        required=True,
        ratio=float(root),
        delta_Q=float(2.0 * standard_normal_cdf(-1.0 / root)),
    )


def table1(ratios: Optional[Sequence[float]] = None) -> List[MeasurementThreshold]:
    """对每个 σ_t/t 求阈值（默认使用 TABLE1_RATIOS）"""
    ratios = TABLE1_RATIOS if ratios is None else tuple(ratios)
    return [min_measurement_ratio(float(rt)) for rt in ratios]


def stability_report(model: PompModel) -> StabilityReport:
    """模型的 δ(T)（受控时 δ̃(T)）、δ(Q) 与 α"""
    if not model.is_finite:
        return assess_stability(
            dobrushin_gaussian_analytic(model.gaussian.transition),
            dobrushin_gaussian_analytic(model.gaussian.measurement),
        )
    if model.is_controlled:
        delta_T = controlled_delta_tilde(model.finite.action_map)
    else:
        delta_T = dobrushin_finite(model.finite.T)
    return assess_stability(delta_T, dobrushin_finite(model.finite.Q))


def analyze_model(model: PompModel) -> ModelAnalysis:
    """
    模型分析

    有限模型：δ(T) 或 δ̃(T)（含每个动作的 δ）、δ(Q)、α、T 与 φ̄ 的混合系数，
    以及混合时的 Hilbert 基线因子（m = 1，优先使用 φ̄ 的 ε）。
    高斯模型：解析系数加数值重叠交叉校验。
    """
    report = stability_report(model)
    if not model.is_finite:
        gauss = model.gaussian
        analysis = ModelAnalysis(
            model_name=model.name,
            kind=model.kind.value,
            report=report,
            overlap_T=dobrushin_overlap_numeric(gauss.transition),
            overlap_Q=dobrushin_overlap_numeric(gauss.measurement),
            ratio_T=gauss.transition.ratio,
            ratio_Q=gauss.measurement.ratio,
        )
        logger.info(f"Analyzed gaussian1d model {model.name!r}: alpha={report.alpha:.6g}")
        return analysis

    finite = model.finite
    action_deltas: Dict[str, float] = {name: dobrushin_finite(K) for name, K in finite.actions}

    kernels = [K for _, K in finite.actions] if model.is_controlled else [finite.T]
    mixing_T = _min_optional(mixing_coefficient(K) for K in kernels)
    mixing_update = _min_optional(unnormalized_mixing_coefficient(K, finite.Q) for K in kernels)

    hilbert_factor = None
    hilbert_source = None
    if mixing_update is not None:
        hilbert_factor, hilbert_source = hilbert_baseline_bound(mixing_update, 1), "update"
    elif mixing_T is not None:
        hilbert_factor, hilbert_source = hilbert_baseline_bound(mixing_T, 1), "transition"

    logger.info(f"Analyzed finite model {model.name!r}: alpha={report.alpha:.6g}, stable={report.stable}")
    return ModelAnalysis(
        model_name=model.name,
        kind=model.kind.value,
        report=report,
        action_deltas=action_deltas,
        mixing_T=mixing_T,
        mixing_update=mixing_update,
        hilbert_factor=hilbert_factor,
        hilbert_source=hilbert_source,
    )


def _min_optional(values: Iterable[Optional[float]]) -> Optional[float]:
    """全部有定义时取最小值，否则 None"""
    values = list(values)
    if not values or any(v is None for v in values):
        return None
    return min(values)
