"""
Reproduction Controller - 参考数值复现

本模块实现 table1 与 example3 命令：
- table1：每个 σ_t/t 下使 α < 1 的最小 σ_q/q，及对应的 δ(T)、δ(Q)
- example3：3 状态例子中单步贝叶斯更新的期望后验距离与扩张上界

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from src.core.errors import ContractViolationError
from src.core.kernels import dobrushin_finite
from src.core.measures import tv_distance
from src.core.stability import expected_bayes_expansion, table1
from src.models.distributions import FiniteDistribution
from src.models.operators import StochasticMatrix
from src.models.results import CommandResult, MeasurementThreshold
from src.utils.atomic_io import atomic_write_csv
from src.utils.formatting import render_key_values, render_table, sig4


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TABLE1_CSV_COLUMNS = ("sigma_t_over_t", "delta_T", "required", "sigma_q_over_q", "delta_Q", "alpha")

# 3 状态例子：先验与观测核
EXAMPLE3_MU = (0.05, 0.65, 0.3)
EXAMPLE3_NU = (0.2, 0.65, 0.15)
EXAMPLE3_Q = (
    (0.1, 0.3, 0.6),
    (0.5, 0.3, 0.2),
    (0.9, 0.1, 0.0),
)
# 期望后验距离与先验距离之比的参考值（与上界 2 − δ(Q) 对照）
EXAMPLE3_OBSERVED_RATIO = 1.24


@dataclass(frozen=True)
class Example3Result:
    """
    Attributes:
        prior_tv: ∥μ − ν∥
        expected_posterior_tv: Σ_y N^μ(y)·∥ψ(μ, y) − ψ(ν, y)∥
        delta_Q: δ(Q)
        expansion_bound: (2 − δ(Q))·∥μ − ν∥
    """
    prior_tv: float
    expected_posterior_tv: float
    delta_Q: float
    expansion_bound: float

    @property
    def expansion_ratio(self) -> float:
        return self.expected_posterior_tv / self.prior_tv

    @property
    def bound_holds(self) -> bool:
        return self.expected_posterior_tv <= self.expansion_bound


def compute_example3() -> Example3Result:
    mu = FiniteDistribution(EXAMPLE3_MU)
    nu = FiniteDistribution(EXAMPLE3_NU)
    Q = StochasticMatrix(EXAMPLE3_Q)
    prior_tv = tv_distance(mu, nu)
    delta_Q = dobrushin_finite(Q)
    return Example3Result(
        prior_tv=prior_tv,
        expected_posterior_tv=expected_bayes_expansion(mu, nu, Q),
        delta_Q=delta_Q,
        expansion_bound=(2.0 - delta_Q) * prior_tv,
    )


def _threshold_cell(row: MeasurementThreshold) -> str:
    if not row.required:
        return "N/A"
    return sig4(row.ratio)


def _threshold_csv_row(row: MeasurementThreshold) -> Dict[str, str]:
    ratio = "" if row.ratio is None else ("inf" if math.isinf(row.ratio) else repr(row.ratio))
    return {
        "sigma_t_over_t": repr(row.rt),
        "delta_T": repr(row.delta_T),
        "required": "yes" if row.required else "no",
        "sigma_q_over_q": ratio,
        "delta_Q": "" if row.delta_Q is None else repr(row.delta_Q),
        "alpha": "" if row.alpha is None else repr(row.alpha),
    }


class ReproductionController:
    """
    复现控制器

    Example:
        >>> result = ReproductionController().example3()
        >>> "0.3728" in result.stdout
        True
    """

    def __init__(self):
        logger.info("ReproductionController initialized")

    def table1(
        self,
        ratios: Optional[Sequence[float]] = None,
        csv_path: Optional[PathLike] = None,
        quiet: bool = False
    ) -> CommandResult:
        """
        阈值表

        Args:
            ratios: σ_t/t 取值，默认 13 个标准取值
            csv_path: CSV 输出路径（每个 σ_t/t 一行，完整精度）
            quiet: 不输出表格

        Raises:
            ContractViolationError: 某个 ratio 不是正数
        """
        if ratios is not None and not ratios:
            raise ContractViolationError("table1", "need at least one sigma_t/t value")
        rows = table1(ratios)
        logger.info(f"Computed {len(rows)} threshold columns")

        result = CommandResult()
        if csv_path is not None:
            result.artifacts.append(
                atomic_write_csv(csv_path, TABLE1_CSV_COLUMNS, [_threshold_csv_row(r) for r in rows])
            )
        if not quiet:
            headers = ["sigma_t/t"] + [f"{r.rt:g}" for r in rows]
            body: List[List[str]] = [
                ["sigma_q/q"] + [_threshold_cell(r) for r in rows],
                ["delta(T)"] + [sig4(r.delta_T) for r in rows],
                ["delta(Q)"] + ["N/A" if r.delta_Q is None else sig4(r.delta_Q) for r in rows],
            ]
            result.stdout = render_table(headers, body)
        return result

    def example3(self, csv_path: Optional[PathLike] = None, quiet: bool = False) -> CommandResult:
        """单步贝叶斯更新可以扩张 TV 距离的例子"""
        ex = compute_example3()
        logger.info(f"Example: prior TV {ex.prior_tv!r}, expected posterior TV {ex.expected_posterior_tv!r}")

        result = CommandResult()
        if csv_path is not None:
            rows = [
                {"quantity": "prior_tv", "value": repr(ex.prior_tv)},
                {"quantity": "expected_posterior_tv", "value": repr(ex.expected_posterior_tv)},
                {"quantity": "delta_Q", "value": repr(ex.delta_Q)},
                {"quantity": "expansion_bound", "value": repr(ex.expansion_bound)},
            ]
            result.artifacts.append(atomic_write_csv(csv_path, ("quantity", "value"), rows))
        if not quiet:
            pairs = [
                ("prior TV", sig4(ex.prior_tv)),
                ("expected posterior TV", sig4(ex.expected_posterior_tv)),
                ("delta(Q)", sig4(ex.delta_Q)),
                ("bound (2 - delta(Q)) * TV", sig4(ex.expansion_bound)),
                ("bound holds", sig4(ex.bound_holds)),
            ]
            result.stdout = render_key_values(pairs) + (
                f"\n\nExpansion ratio {sig4(ex.expansion_ratio)} (reference value {EXAMPLE3_OBSERVED_RATIO}) "
                f"stays below 2 - delta(Q) = {sig4(2.0 - ex.delta_Q)}: one Bayes step can expand the TV distance."
            )
        return result
