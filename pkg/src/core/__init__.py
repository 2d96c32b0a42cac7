"""
Core Package - 核心层

本包包含滤波稳定性的核心计算模块。

模块:
- errors: 异常层次
- measures: 全变差与 Hilbert 距离
- kernels: Dobrushin 系数与核作用
- filter: 贝叶斯滤波递推
- enumeration: 小规模穷举参照
- stability: 稳定性判据与测量阈值
- simulate: 双滤波 Monte Carlo 实验
- modelio: 模型与实验配置读写

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

# 各模块相互引用，这里不做包级导入，使用时按模块导入

__all__ = []
