"""
Errors - 异常层次

本模块定义 FilterStab 所有可预期的错误类型。DegenerateZero 不是异常，
它是 ψ 的一个合法输出，见 src.core.filter。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from typing import Any, List, Optional


class FilterStabError(Exception):
    """FilterStab 所有错误的基类（CLI 映射为退出码 1）"""


class ContractViolationError(FilterStabError, ValueError):
    """
    契约违反异常

    当操作的前置条件不满足（维度不匹配、参数越界等）时抛出。

    Attributes:
        operation: 出错的操作名称
        detail: 错误详情
    """

    def __init__(self, operation: str, detail: str):
        self.operation = operation
        self.detail = detail
        super().__init__(f"{operation}: {detail}")


class AbsoluteContinuityError(ContractViolationError):
    """
    绝对连续性异常

    当 p ≪ q 不成立时抛出，index 为第一个违反的支撑下标。

    Attributes:
        index: q_i = 0 而 p_i > 0 的第一个下标
    """

    def __init__(self, operation: str, index: int):
        self.index = index
        super().__init__(
            operation,
            f"absolute continuity violated at support index {index} "
            f"(q[{index}] = 0 but p[{index}] > 0)"
        )


class TruncationError(FilterStabError):
    """
    网格截断异常

    输出网格太窄，高斯核推前后丢失的质量超过阈值。

    Attributes:
        mass_defect: 归一化前缺失的概率质量
        threshold: 允许的最大缺失质量
    """

    def __init__(self, mass_defect: float, threshold: float):
        self.mass_defect = mass_defect
        self.threshold = threshold
        super().__init__(
            f"Output grid truncates {mass_defect:.3e} of probability mass "
            f"(threshold {threshold:.1e}); widen the grid"
        )


class ModelValidationError(FilterStabError):
    """
    模型校验异常

    Attributes:
        diagnostics: modelio 产生的诊断列表（每条含 rule_id 与文档路径）
        source: 文档来源（文件路径），可选
    """

    def __init__(self, diagnostics: List[Any], source: Optional[str] = None):
        self.diagnostics = list(diagnostics)
        self.source = source
        where = f" in {source}" if source else ""
        summary = "; ".join(str(d) for d in self.diagnostics[:3])
        more = f" (+{len(self.diagnostics) - 3} more)" if len(self.diagnostics) > 3 else ""
        super().__init__(f"Invalid model document{where}: {summary}{more}")
