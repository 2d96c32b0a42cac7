"""
Unit Tests for Settings

测试覆盖：
- 默认值与校验
- 从文件加载（缺失文件、非法 JSON、未知键）
- FILTERSTAB_THREADS 环境变量覆盖
- 线程数计算

Author: FilterStab Development Team
Version: v1.0
Date: 2026-10-19
"""

import json

import pytest

from src.config.settings import DEFAULT_SETTINGS_PATH, THREADS_ENV_VAR, Settings
from src.core.errors import ContractViolationError


class TestSettings:
    """测试 Settings 数据类"""

    def test_defaults(self):
        settings = Settings()
        assert settings.threads == 0
        assert settings.truncation_threshold == 1e-3
        assert settings.ci_z == pytest.approx(1.96, abs=1e-3)
        assert settings.default_grid_cells == 400

    @pytest.mark.parametrize("field, value", [
        ("threads", -1),
        ("threads", 1.5),
        ("default_grid_cells", 1),
        ("truncation_threshold", 0.0),
        ("ci_z", -1.0),
    ])
    def test_validation(self, field, value):
        with pytest.raises(ContractViolationError):
            Settings(**{field: value})

    def test_round_trip(self):
        settings = Settings(threads=3, results_dir="out")
        assert Settings.from_dict(settings.to_dict()) == settings

    def test_worker_count(self):
        assert Settings(threads=4).worker_count(100) == 4
        assert Settings(threads=4).worker_count(2) == 2
        assert Settings(threads=0).worker_count(1) == 1
        assert Settings(threads=0).worker_count(10_000) >= 1


class TestSettingsLoad:
    """测试 Settings.load"""

    def test_shipped_file(self):
        settings = Settings.load(DEFAULT_SETTINGS_PATH, environ={})
        assert settings == Settings()

    def test_missing_file_uses_defaults(self, temp_dir):
        assert Settings.load(temp_dir / "absent.json", environ={}) == Settings()

    def test_unknown_keys_ignored(self, write_json):
        path = write_json("settings.json", {"threads": 2, "colour": "blue"})
        settings = Settings.load(path, environ={})
        assert settings.threads == 2

    def test_invalid_json(self, write_json):
        path = write_json("settings.json", "{threads: 2")
        with pytest.raises(ContractViolationError):
            Settings.load(path, environ={})

    def test_invalid_value_in_file(self, write_json):
        path = write_json("settings.json", json.dumps({"ci_z": 0}))
        with pytest.raises(ContractViolationError):
            Settings.load(path, environ={})

    def test_environment_override(self, write_json):
        path = write_json("settings.json", {"threads": 2})
        assert Settings.load(path, environ={THREADS_ENV_VAR: "7"}).threads == 7
        assert Settings.load(path, environ={THREADS_ENV_VAR: ""}).threads == 2

    @pytest.mark.parametrize("raw", ["many", "-2"])
    def test_invalid_environment(self, write_json, raw):
        path = write_json("settings.json", {})
        with pytest.raises(ContractViolationError):
            Settings.load(path, environ={THREADS_ENV_VAR: raw})

    def test_process_environment(self, temp_dir, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "5")
        assert Settings.load(temp_dir / "absent.json").threads == 5
