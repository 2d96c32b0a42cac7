"""
Pytest Configuration and Shared Fixtures

本模块提供 pytest 配置和共享的测试 fixture：参考矩阵、标准模型集、
临时目录、测试用设置与重置后的事件总线。

Author: FilterStab Development Team
Version: v1.0
Date: 2026-10-19
"""

import json
import sys
import tempfile
from pathlib import Path

import pytest

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config.settings import Settings
from src.models.distributions import FiniteDistribution
from src.models.operators import Gaussian1DKernel, SineMean, StochasticMatrix, TanhMean
from src.models.pomp_model import PompModel
from src.utils.event_bus import EventBus


REPO_ROOT = Path(__file__).parent.parent


# ======================
# Path Fixtures
# ======================

@pytest.fixture
def temp_dir():
    """
    创建临时目录 fixture

    Yields:
        Path: 临时目录路径
    """
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def models_dir():
    """标准模型集目录 config/models"""
    return REPO_ROOT / "config" / "models"


@pytest.fixture
def experiments_dir():
    """实验配置目录 config/experiments"""
    return REPO_ROOT / "config" / "experiments"


@pytest.fixture
def write_json(temp_dir):
    """
    把对象写成 JSON 文件的辅助函数

    Returns:
        Callable[[str, Any], Path]: (文件名, 对象) -> 路径
    """
    def _write(name, payload):
        path = temp_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
        path.write_text(text, encoding='utf-8')
        return path
    return _write


# ======================
# Reference Matrices
# ======================

@pytest.fixture
def example1_T():
    """3×3 矩阵，δ = 1/3"""
    return StochasticMatrix([[0.0, 1 / 3, 2 / 3], [0.5, 0.5, 0.0], [1 / 3, 1 / 3, 1 / 3]])


@pytest.fixture
def example3_Q():
    """3×3 观测矩阵，δ = 0.2"""
    return StochasticMatrix([[0.1, 0.3, 0.6], [0.5, 0.3, 0.2], [0.9, 0.1, 0.0]])


@pytest.fixture
def example3_mu():
    return FiniteDistribution([0.05, 0.65, 0.3])


@pytest.fixture
def example3_nu():
    return FiniteDistribution([0.2, 0.65, 0.15])


@pytest.fixture
def nonmixing_T():
    """零元素不在整列上的矩阵：不混合"""
    return StochasticMatrix([[0.0, 0.25, 0.75], [0.25, 0.25, 0.5], [0.0, 0.1, 0.9]])


# ======================
# Model Fixtures
# ======================

@pytest.fixture
def two_state_model():
    """δ(T) = 0.6，δ(Q) = 0.5，α = 0.6"""
    return PompModel.finite_model("two_state_stable", [[0.8, 0.2], [0.4, 0.6]], [[0.8, 0.2], [0.3, 0.7]])


@pytest.fixture
def example_model(example1_T, example3_Q):
    """δ(T) = 1/3，δ(Q) = 0.2，α = 1.2"""
    return PompModel.finite_model("example1_example3", example1_T, example3_Q)


@pytest.fixture
def controlled_model():
    """两个动作：δ(stay) = 0.4，δ(shift) = 0.6"""
    stay = [[0.7, 0.2, 0.1], [0.1, 0.7, 0.2], [0.2, 0.1, 0.7]]
    shift = [[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]]
    Q = [[0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6]]
    return PompModel.finite_model("controlled_two_action", stay, Q, actions={"stay": stay, "shift": shift})


@pytest.fixture
def gaussian_model():
    """f = tanh(2x)，t = 1，σ_t = 1.2；g = sin(x)，q = 1，σ_q = 1.5"""
    transition = Gaussian1DKernel(mean_fn=TanhMean(scale=1.0, gain=2.0), sigma=1.2, bound=1.0)
    measurement = Gaussian1DKernel(mean_fn=SineMean(amplitude=1.0, frequency=1.0), sigma=1.5, bound=1.0)
    return PompModel.gaussian_model("gaussian_1p2_1p5", transition, measurement)


@pytest.fixture
def small_model_battery(two_state_model, example_model, controlled_model):
    """小规模有限模型集，用于与穷举结果比较"""
    return [
        two_state_model,
        example_model,
        controlled_model,
        PompModel.finite_model("identity_T", StochasticMatrix.identity(2), [[0.9, 0.1], [0.4, 0.6]]),
        PompModel.finite_model(
            "sparse_Q",
            [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]],
        ),
    ]


# ======================
# Runtime Fixtures
# ======================

@pytest.fixture
def settings(temp_dir):
    """
    测试用设置：两个线程，结果写入临时目录

    Returns:
        Settings: 设置实例
    """
    return Settings(threads=2, results_dir=str(temp_dir / "results"))


@pytest.fixture
def event_bus():
    """
    清空订阅者的事件总线

    Yields:
        EventBus: 事件总线单例
    """
    bus = EventBus()
    bus.clear_subscribers()
    yield bus
    bus.clear_subscribers()
