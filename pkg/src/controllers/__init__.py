"""
Controllers Package - 控制器层

本包包含命令行各子命令的控制器，负责把核心计算结果组织成输出与 CSV 产物。

模块:
- analysis_controller: analyze / validate
- simulation_controller: simulate
- reproduction_controller: table1 / example3

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

from src.controllers.analysis_controller import AnalysisController
from src.controllers.simulation_controller import SimulationController
from src.controllers.reproduction_controller import ReproductionController

__all__ = [
    'AnalysisController',
    'SimulationController',
    'ReproductionController',
]
