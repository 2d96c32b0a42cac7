"""
Settings - 运行时设置

本模块从 config/settings.json 加载运行时设置。文件缺失时使用默认值并记录警告，
环境变量 FILTERSTAB_THREADS 覆盖 threads。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional

from src.core.errors import ContractViolationError


logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parents[2] / "config" / "settings.json"
THREADS_ENV_VAR = "FILTERSTAB_THREADS"


@dataclass
class Settings:
    """
    运行时设置

    Attributes:
        threads: 试验并行线程数上限，0 表示自动
        results_dir: CSV 结果默认目录
        truncation_threshold: 网格截断允许的最大缺失质量
        ci_z: 95% 置信区间的正态分位数
        default_grid_cells: 高斯模型未指定网格时的单元数
    """
    threads: int = 0
    results_dir: str = "results"
    truncation_threshold: float = 1e-3
    ci_z: float = 1.959963984540054
    default_grid_cells: int = 400

    def __post_init__(self):
        if int(self.threads) != self.threads or self.threads < 0:
            raise ContractViolationError("Settings", f"threads must be an integer >= 0, got {self.threads!r}")
        if int(self.default_grid_cells) != self.default_grid_cells or self.default_grid_cells < 2:
            raise ContractViolationError(
                "Settings", f"default_grid_cells must be an integer >= 2, got {self.default_grid_cells!r}"
            )
        for name in ("truncation_threshold", "ci_z"):
            if not float(getattr(self, name)) > 0.0:
                raise ContractViolationError("Settings", f"{name} must be > 0, got {getattr(self, name)!r}")
        self.threads = int(self.threads)
        self.default_grid_cells = int(self.default_grid_cells)

    @property
    def results_path(self) -> Path:
        return Path(self.results_dir)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Settings':
        """忽略未知键（记录警告）"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"Ignoring unknown settings keys: {unknown}")
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def load(cls, path: Optional[Path] = None, environ: Optional[Dict[str, str]] = None) -> 'Settings':
        """
        加载设置

        Args:
            path: 设置文件路径，默认 config/settings.json
            environ: 环境变量映射，默认 os.environ

        Returns:
            Settings: 设置实例

        Raises:
            ContractViolationError: 设置值不合法或文件不是合法 JSON
        """
        path = DEFAULT_SETTINGS_PATH if path is None else Path(path)
        environ = os.environ if environ is None else environ

        if not path.exists():
            logger.warning(f"Settings file not found: {path}; using defaults")
            settings = cls()
        else:
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                logger.error(f"Invalid JSON in settings file {path}: {e}")
                raise ContractViolationError("Settings.load", f"{path} is not valid JSON: {e}")
            settings = cls.from_dict(data)
            logger.info(f"Loaded settings from {path}")

        raw_threads = environ.get(THREADS_ENV_VAR)
        if raw_threads not in (None, ""):
            try:
                settings.threads = int(raw_threads)
            except ValueError:
                raise ContractViolationError("Settings.load", f"{THREADS_ENV_VAR}={raw_threads!r} is not an integer")
            settings.__post_init__()
            logger.info(f"{THREADS_ENV_VAR} overrides threads: {settings.threads}")

        return settings

    def worker_count(self, trials: int) -> int:
        """实际使用的线程数：threads 为 0 时取 CPU 数，且不超过 trials"""
        wanted = self.threads or (os.cpu_count() or 1)
        return max(1, min(wanted, trials))
