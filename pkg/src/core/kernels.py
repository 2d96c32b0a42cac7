"""
Kernels - 核的作用与 Dobrushin 系数

本模块实现：
- 有限核与一维高斯核在测度上的推前作用
- Dobrushin 系数：有限矩阵的两两行重叠、高斯核的解析公式与数值重叠
- 混合系数 ε（对 T 以及未归一化更新 φ̄）

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtr
from scipy.stats import norm

from src.core.errors import ContractViolationError, TruncationError
from src.models.distributions import FiniteDistribution, GridDensity, GridSpec
from src.models.likelihood import FiniteLikelihood
from src.models.operators import Gaussian1DKernel, StochasticMatrix


logger = logging.getLogger(__name__)

TRUNCATION_THRESHOLD = 1e-3
MIN_QUAD_POINTS = 1000
DEFAULT_QUAD_POINTS = 100_000


def standard_normal_cdf(z):
    """标准正态分布函数 Φ"""
    return ndtr(z)


def dobrushin_finite(K: StochasticMatrix) -> float:
    """
    有限核的 Dobrushin 系数

    δ(K) = min_{i<j} Σ_k min(K_ik, K_jk)；单行矩阵返回 1。

    Example:
        >>> dobrushin_finite(StochasticMatrix([[0, 1/3, 2/3], [1/2, 1/2, 0], [1/3, 1/3, 1/3]]))
        0.3333333333333333
    """
    if K.rows == 1:
        return 1.0
    E = K.entries
    overlaps = np.minimum(E[:, None, :], E[None, :, :]).sum(axis=2)
    upper = np.triu_indices(K.rows, k=1)
    return float(min(1.0, overlaps[upper].min()))


def dobrushin_gaussian_analytic(k: Gaussian1DKernel) -> float:
    """
    高斯核的 Dobrushin 系数 2Φ(−bound/σ)

    等方差高斯的重叠随均值距离单调下降，下确界在均值 ±bound 处取得。
    """
    return float(2.0 * standard_normal_cdf(-k.bound / k.sigma))


def dobrushin_overlap_numeric(k: Gaussian1DKernel, quad_points: int = DEFAULT_QUAD_POINTS) -> float:
    """
    数值计算 N(+bound, σ²) 与 N(−bound, σ²) 密度的重叠面积

    在 [−bound−8σ, bound+8σ] 上用复合梯形公式积分 min 密度。

    Args:
        k: 高斯核
        quad_points: 求积节点数 ≥ 1000

    Raises:
        ContractViolationError: quad_points 太少
    """
    if quad_points < MIN_QUAD_POINTS:
        raise ContractViolationError(
            "dobrushin_overlap_numeric", f"quad_points must be >= {MIN_QUAD_POINTS}, got {quad_points}"
        )
    half = k.bound + 8.0 * k.sigma
    x = np.linspace(-half, half, int(quad_points))
    overlap = np.minimum(norm.pdf(x, loc=k.bound, scale=k.sigma), norm.pdf(x, loc=-k.bound, scale=k.sigma))
    return float(trapezoid(overlap, x))


def _canonical_epsilon(E: np.ndarray) -> Optional[float]:
    """
    以列均值 λ 为支配测度的混合系数

    某列同时含零与非零元素时不混合，返回 None；全零矩阵同样返回 None。
    """
    nonzero = E > 0.0
    full = nonzero.all(axis=0)
    empty = ~nonzero.any(axis=0)
    if not np.all(full | empty) or not full.any():
        return None
    block = E[:, full]
    lam = block.mean(axis=0)
    scaled = block / lam[None, :]
    return float(min(1.0, scaled.min(), (1.0 / scaled).min()))


def mixing_coefficient(K: StochasticMatrix) -> Optional[float]:
    """
    混合系数

    每列要么全零要么全非零时，取 λ 为非零列的列均值，返回满足
    ε·λ_j ≤ K_ij ≤ λ_j/ε 的最大 ε；否则返回 None（不混合）。
    """
    return _canonical_epsilon(K.entries)


def unnormalized_mixing_coefficient(T: StochasticMatrix, Q: StochasticMatrix) -> Optional[float]:
    """
    未归一化滤波更新 φ̄_y = T·diag(g(·, y)) 的混合系数

    对每个能被观测到的符号 y 计算规范 ε，返回最小值；任一 φ̄_y 不混合时返回 None。
    """
    if T.cols != Q.rows:
        raise ContractViolationError("unnormalized_mixing_coefficient", f"T is {T.rows}x{T.cols}, Q has {Q.rows} rows")
    likelihood = FiniteLikelihood.from_matrix(Q)
    epsilons = []
    for y in range(likelihood.symbols):
        column = likelihood.column(y)
        if not np.any(column > 0.0):
            continue
        eps = _canonical_epsilon(T.entries * column[None, :])
        if eps is None:
            return None
        epsilons.append(eps)
    return min(epsilons) if epsilons else None


def apply_kernel(K: StochasticMatrix, p: FiniteDistribution) -> FiniteDistribution:
    """
    有限核的推前 pᵀK

    Raises:
        ContractViolationError: K 的行数与 p 的长度不一致
    """
    if K.rows != len(p):
        raise ContractViolationError("apply_kernel", f"kernel has {K.rows} rows, distribution has {len(p)} states")
    masses = p.probs @ K.entries
    return FiniteDistribution(masses / masses.sum())


def apply_matrix_to_grid(K: StochasticMatrix, d: GridDensity) -> GridDensity:
    """
    有限核作用于以单元为状态的网格密度

    方阵保持原网格；非方阵输出到 [0, cols] 上的单位单元网格。
    """
    if K.rows != len(d):
        raise ContractViolationError("apply_matrix_to_grid", f"kernel has {K.rows} rows, grid has {len(d)} cells")
    out_grid = d.grid if K.cols == K.rows else GridSpec(0.0, float(K.cols), K.cols)
    masses = d.masses @ K.entries
    return GridDensity.from_masses(out_grid, masses / masses.sum())


@lru_cache(maxsize=64)
def gaussian_transition_matrix(
    k: Gaussian1DKernel,
    in_grid: GridSpec,
    out_grid: GridSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """
    单元到单元的转移矩阵

    M[i, j] = Φ((e_{j+1} − m(c_i))/σ) − Φ((e_j − m(c_i))/σ)，c_i 为输入单元中心。

    Returns:
        (M, defects): 只读矩阵与每行缺失的质量 1 − Σ_j M[i, j]
    """
    means = k.means(in_grid.centers)
    cdf = standard_normal_cdf((out_grid.edges[None, :] - means[:, None]) / k.sigma)
    M = np.diff(cdf, axis=1)
    defects = np.clip(1.0 - M.sum(axis=1), 0.0, None)
    M.flags.writeable = False
    defects.flags.writeable = False
    logger.debug(
        f"Built {in_grid.cells}x{out_grid.cells} Gaussian transition matrix "
        f"(sigma={k.sigma}, max row defect {defects.max():.3e})"
    )
    return M, defects


def apply_gaussian_kernel(
    k: Gaussian1DKernel,
    d: GridDensity,
    out_grid: Optional[GridSpec] = None,
    threshold: float = TRUNCATION_THRESHOLD
) -> GridDensity:
    """
    高斯核作用于网格密度

    用精确单元积分推前后重新归一化，归一化前缺失的质量记入 mass_defect。

    Args:
        k: 高斯核
        d: 输入密度
        out_grid: 输出网格，默认与输入相同
        threshold: 允许的最大缺失质量

    Raises:
        TruncationError: 缺失质量超过 threshold
    """
    out_grid = d.grid if out_grid is None else out_grid
    M, _ = gaussian_transition_matrix(k, d.grid, out_grid)
    masses = d.masses @ M
    total = float(masses.sum())
    defect = max(0.0, 1.0 - total)
    if defect > threshold:
        raise TruncationError(defect, threshold)
    if defect > 1e-6:
        logger.debug(f"Gaussian pushforward lost {defect:.3e} of mass on {out_grid}")
    return GridDensity.from_masses(out_grid, masses / total, mass_defect=defect)
