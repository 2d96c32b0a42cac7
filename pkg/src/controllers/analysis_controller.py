"""
Analysis Controller - 模型分析控制器

本模块实现 analyze 与 validate 命令：加载模型文件，计算 Dobrushin 系数、
收缩系数 α、混合系数与 Hilbert 基线因子，并渲染为表格或写出 CSV。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from src.config.settings import Settings
from src.core.modelio import load_model, validate_document
from src.core.stability import analyze_model
from src.models.pomp_model import PompModel
from src.models.results import CommandResult, ModelAnalysis
from src.utils.atomic_io import atomic_write_csv
from src.utils.formatting import render_key_values, render_table, sig4


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ANALYSIS_CSV_COLUMNS = ("quantity", "value")


class AnalysisController:
    """
    分析控制器

    Attributes:
        settings: 运行时设置

    Example:
        >>> controller = AnalysisController()
        >>> result = controller.analyze("config/models/example1_example3.json")
        >>> result.exit_code
        0
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings.load()
        logger.info("AnalysisController initialized")

    def analyze(self, model_path: PathLike, csv_path: Optional[PathLike] = None, quiet: bool = False) -> CommandResult:
        """
        分析模型文件

        Args:
            model_path: 模型文件路径
            csv_path: 可选的 CSV 输出路径（quantity, value 两列，完整精度）
            quiet: 不输出表格

        Returns:
            CommandResult: 成功时 exit_code 为 0

        Raises:
            ModelValidationError: 模型不合法
            OSError: 文件不可读或不可写
        """
        model = load_model(model_path)
        analysis = analyze_model(model)

        result = CommandResult()
        if csv_path is not None:
            rows = [{"quantity": k, "value": "" if v is None else repr(v)} for k, v in self._quantities(analysis)]
            result.artifacts.append(atomic_write_csv(csv_path, ANALYSIS_CSV_COLUMNS, rows))
            logger.info(f"Analysis of {model.name!r} written to {csv_path}")
        if not quiet:
            result.stdout = self._render(model, analysis)
        return result

    def validate(self, model_path: PathLike, quiet: bool = False) -> CommandResult:
        """
        校验模型文件，列出全部诊断

        Returns:
            CommandResult: 无诊断时 exit_code 为 0，否则为 1

        Raises:
            OSError: 文件不可读
        """
        path = Path(model_path)
        with open(path, 'rb') as f:
            diagnostics = validate_document(f.read())

        if diagnostics:
            logger.warning(f"{path}: {len(diagnostics)} validation problem(s)")
            lines = [f"{path}: {len(diagnostics)} problem(s)"] + [f"  {d}" for d in diagnostics]
            return CommandResult(exit_code=1, stdout="" if quiet else "\n".join(lines))

        logger.info(f"{path}: valid")
        return CommandResult(stdout="" if quiet else f"{path}: ok")

    @staticmethod
    def _quantities(analysis: ModelAnalysis) -> List[Tuple[str, object]]:
        report = analysis.report
        pairs: List[Tuple[str, object]] = [
            ("delta_T", report.delta_T),
            ("delta_Q", report.delta_Q),
            ("alpha", report.alpha),
            ("stable", report.stable),
            ("stable_for_any_Q", report.stable_for_any_Q),
        ]
        pairs.extend((f"delta_T[{name}]", delta) for name, delta in analysis.action_deltas.items())
        if analysis.kind == "finite":
            pairs.extend([
                ("mixing_epsilon_T", analysis.mixing_T),
                ("mixing_epsilon_update", analysis.mixing_update),
                ("hilbert_factor", analysis.hilbert_factor),
            ])
        else:
            pairs.extend([
                ("overlap_T", analysis.overlap_T),
                ("overlap_Q", analysis.overlap_Q),
                ("sigma_t_over_t", analysis.ratio_T),
                ("sigma_q_over_q", analysis.ratio_Q),
            ])
        return pairs

    @staticmethod
    def _render(model: PompModel, analysis: ModelAnalysis) -> str:
        report = analysis.report
        controlled = bool(analysis.action_deltas)
        if model.is_finite:
            header = f"{model.name} (finite, {model.finite.states} states, {model.finite.symbols} symbols)"
        else:
            header = f"{model.name} (gaussian1d)"

        pairs = [
            ("model", header),
            ("delta~(T)" if controlled else "delta(T)", sig4(report.delta_T)),
            ("delta(Q)", sig4(report.delta_Q)),
            ("alpha", sig4(report.alpha)),
            ("verdict", report.verdict),
            ("stable for any Q", sig4(report.stable_for_any_Q)),
        ]
        if model.is_finite:
            if analysis.is_mixing:
                pairs.append(("mixing", f"yes (epsilon {sig4(analysis.mixing_T)})"))
            else:
                pairs.append(("mixing", "no"))
            if analysis.mixing_update is not None:
                pairs.append(("update mixing", f"yes (epsilon {sig4(analysis.mixing_update)})"))
            if analysis.hilbert_factor is not None:
                pairs.append(("Hilbert factor (m=1)", f"{sig4(analysis.hilbert_factor)} ({analysis.hilbert_source})"))
        else:
            pairs.extend([
                ("sigma_t/t", sig4(analysis.ratio_T)),
                ("sigma_q/q", sig4(analysis.ratio_Q)),
                ("overlap check T", sig4(analysis.overlap_T)),
                ("overlap check Q", sig4(analysis.overlap_Q)),
            ])

        text = render_key_values(pairs)
        if controlled:
            rows = [[name, sig4(delta)] for name, delta in analysis.action_deltas.items()]
            text += "\n\n" + render_table(["action", "delta(T_u)"], rows)
        return text
