"""
Model IO - 模型文件与实验配置的读写与校验

模型文件是带 "version": 1 的 JSON 文档。解析时收集所有问题而不是遇到第一个
就停止；每条诊断都带有规则 id 和指向文档内位置的路径（如 $.finite.T[1]）。

序列化使用 sort_keys，浮点数以最短可精确往返的十进制表示写出，
相同的模型总是得到逐字节相同的输出。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import json
import logging
import math
from dataclasses import dataclass
from numbers import Real
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from src.config.settings import Settings
from src.core.errors import ContractViolationError, ModelValidationError
from src.models.distributions import FINITE_TOLERANCE, GRID_TOLERANCE, FiniteDistribution, GridDensity, GridSpec
from src.models.operators import (
    Gaussian1DKernel,
    MeanFamily,
    MeanFunction,
    StochasticMatrix,
    mean_function_from_dict,
)
from src.models.pomp_model import (
    MODEL_FORMAT_VERSION,
    Backend,
    ExperimentConfig,
    FiniteModelSpec,
    GaussianModelSpec,
    ModelKind,
    PompModel,
)
from src.utils.atomic_io import atomic_write_bytes


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Document = Union[str, bytes]

RULE_IDS = (
    "malformed_json",
    "unsupported_version",
    "missing_field",
    "invalid_kind",
    "not_a_matrix",
    "negative_entry",
    "row_stochastic_violation",
    "dimension_mismatch",
    "empty_action_key",
    "unknown_mean_family",
    "invalid_mean_parameters",
    "positive_sigma_required",
    "bound_violation",
    "invalid_grid",
    "invalid_prior",
    "invalid_value",
)


@dataclass(frozen=True)
class Diagnostic:
    """
    校验诊断

    Attributes:
        rule_id: 规则 id（见 RULE_IDS）
        path: 文档内路径
        message: 说明
        defect: 数值缺陷（行和偏差等），可选
    """
    rule_id: str
    path: str
    message: str
    defect: Optional[float] = None

    def __str__(self) -> str:
        return f"{self.path}: [{self.rule_id}] {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        return {"rule_id": self.rule_id, "path": self.path, "message": self.message, "defect": self.defect}


class _Collector:
    """累积诊断"""

    def __init__(self):
        self.diagnostics: List[Diagnostic] = []

    def add(self, rule_id: str, path: str, message: str, defect: Optional[float] = None) -> None:
        self.diagnostics.append(Diagnostic(rule_id, path, message, defect))

    def __bool__(self) -> bool:
        return bool(self.diagnostics)


def _is_number(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool) and math.isfinite(float(value))


def _decode(text: Document, out: _Collector) -> Optional[Any]:
    try:
        if isinstance(text, bytes):
            text = text.decode('utf-8')
        return json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        out.add("malformed_json", "$", f"not valid JSON: {e}")
        return None


def _check_header(doc: Any, out: _Collector) -> bool:
    if not isinstance(doc, dict):
        out.add("malformed_json", "$", "top level must be a JSON object")
        return False
    if "version" not in doc:
        out.add("missing_field", "$.version", "missing format version")
        return False
    if doc["version"] != MODEL_FORMAT_VERSION or isinstance(doc["version"], bool):
        out.add("unsupported_version", "$.version", f"version {doc['version']!r} is not supported (expected 1)")
        return False
    return True


def _matrix(value: Any, path: str, out: _Collector) -> Optional[StochasticMatrix]:
    """校验嵌套列表为行随机矩阵；有问题时记录诊断并返回 None"""
    if (
        not isinstance(value, list) or not value
        or not all(isinstance(row, list) and row for row in value)
        or len({len(row) for row in value}) != 1
        or not all(_is_number(v) for row in value for v in row)
    ):
        out.add("not_a_matrix", path, "expected a non-empty rectangular list of lists of finite numbers")
        return None

    ok = True
    for i, row in enumerate(value):
        for j, v in enumerate(row):
            if v < 0:
                out.add("negative_entry", f"{path}[{i}][{j}]", f"entry {v!r} is negative")
                ok = False
        total = math.fsum(float(v) for v in row)
        defect = abs(total - 1.0)
        if defect > FINITE_TOLERANCE:
            out.add(
                "row_stochastic_violation", f"{path}[{i}]",
                f"row sums to {total!r} (defect {defect:.3g})", defect=defect
            )
            ok = False
    if not ok:
        return None
    try:
        return StochasticMatrix(value)
    except ContractViolationError as e:
        out.add("row_stochastic_violation", path, str(e))
        return None


def _mean_function(value: Any, path: str, out: _Collector) -> Optional[MeanFunction]:
    if not isinstance(value, dict):
        out.add("missing_field", path, "expected a mean function object with a 'family' key")
        return None
    if "family" not in value:
        out.add("missing_field", f"{path}.family", "missing mean function family")
        return None
    try:
        MeanFamily.from_string(value["family"])
    except ValueError as e:
        out.add("unknown_mean_family", f"{path}.family", str(e))
        return None
    try:
        for key, param in value.items():
            if key == "family":
                continue
            items = param if isinstance(param, list) else [param]
            if not all(_is_number(v) for v in items):
                raise ValueError(f"parameter {key!r} must be a finite number (or list of numbers)")
        return mean_function_from_dict(value)
    except (KeyError, TypeError, ValueError) as e:
        out.add("invalid_mean_parameters", path, f"invalid parameters: {e}")
        return None


def _positive_sigma(section: Dict[str, Any], key: str, path: str, out: _Collector) -> Optional[float]:
    value = section.get(key)
    if not _is_number(value) or value <= 0:
        out.add("positive_sigma_required", f"{path}.{key}", f"{key} must be a number > 0, got {value!r}")
        return None
    return float(value)


def _gaussian_kernel(section: Dict[str, Any], fn_key: str, bound_key: str, sigma_key: str,
                     path: str, out: _Collector) -> Optional[Gaussian1DKernel]:
    missing = [k for k in (fn_key, bound_key, sigma_key) if k not in section]
    for key in missing:
        out.add("missing_field", f"{path}.{key}", f"missing {key}")
    if missing:
        return None
    mean_fn = _mean_function(section[fn_key], f"{path}.{fn_key}", out)
    sigma = _positive_sigma(section, sigma_key, path, out)
    bound = section[bound_key]
    if not _is_number(bound) or bound < 0:
        out.add("bound_violation", f"{path}.{bound_key}", f"{bound_key} must be a number >= 0, got {bound!r}")
        return None
    if mean_fn is None or sigma is None:
        return None
    try:
        return Gaussian1DKernel(mean_fn=mean_fn, sigma=sigma, bound=float(bound))
    except ContractViolationError as e:
        out.add("bound_violation", f"{path}.{bound_key}", e.detail)
        return None


def _finite_spec(section: Any, out: _Collector) -> Optional[FiniteModelSpec]:
    path = "$.finite"
    if not isinstance(section, dict):
        out.add("missing_field", path, "finite model parameters must be an object")
        return None
    for key in ("T", "Q"):
        if key not in section:
            out.add("missing_field", f"{path}.{key}", f"missing matrix {key}")
    T = _matrix(section["T"], f"{path}.T", out) if "T" in section else None
    Q = _matrix(section["Q"], f"{path}.Q", out) if "Q" in section else None
    if T is not None and T.rows != T.cols:
        out.add("dimension_mismatch", f"{path}.T", f"T must be square, got {T.rows}x{T.cols}")
        T = None
    if T is not None and Q is not None and Q.rows != T.rows:
        out.add("dimension_mismatch", f"{path}.Q", f"Q has {Q.rows} rows, T has {T.rows} states")
        Q = None

    actions: List[Tuple[str, StochasticMatrix]] = []
    raw_actions = section.get("actions", {})
    if not isinstance(raw_actions, dict):
        out.add("not_a_matrix", f"{path}.actions", "actions must map action names to matrices")
        raw_actions = {}
    for name in sorted(raw_actions):
        action_path = f"{path}.actions.{name}"
        if not name.strip():
            out.add("empty_action_key", f"{path}.actions", "action names must be non-empty strings")
            continue
        K = _matrix(raw_actions[name], action_path, out)
        if K is not None and T is not None and (K.rows != T.rows or K.cols != T.cols):
            out.add("dimension_mismatch", action_path, f"kernel is {K.rows}x{K.cols}, need {T.rows}x{T.rows}")
            continue
        if K is not None:
            actions.append((name, K))

    if out or T is None or Q is None:
        return None
    return FiniteModelSpec(T=T, Q=Q, actions=tuple(actions))


def _gaussian_spec(section: Any, out: _Collector) -> Optional[GaussianModelSpec]:
    path = "$.gaussian1d"
    if not isinstance(section, dict):
        out.add("missing_field", path, "gaussian1d model parameters must be an object")
        return None
    transition = _gaussian_kernel(section, "f", "t", "sigma_t", path, out)
    measurement = _gaussian_kernel(section, "g", "q", "sigma_q", path, out)
    if transition is None or measurement is None:
        return None
    return GaussianModelSpec(transition=transition, measurement=measurement)


def _build_model(text: Document) -> Tuple[Optional[PompModel], List[Diagnostic]]:
    out = _Collector()
    doc = _decode(text, out)
    if doc is None or not _check_header(doc, out):
        return None, out.diagnostics

    name = doc.get("name")
    if not isinstance(name, str) or not name:
        out.add("missing_field", "$.name", "model name must be a non-empty string")
    if "kind" not in doc:
        out.add("missing_field", "$.kind", "missing model kind")
        return None, out.diagnostics
    try:
        kind = ModelKind.from_string(doc["kind"])
    except ValueError as e:
        out.add("invalid_kind", "$.kind", str(e))
        return None, out.diagnostics

    section_key = kind.value
    other_key = "gaussian1d" if kind is ModelKind.FINITE else "finite"
    if other_key in doc:
        out.add("invalid_kind", f"$.{other_key}", f"a {kind.value} model must not carry '{other_key}' parameters")
    if section_key not in doc:
        out.add("missing_field", f"$.{section_key}", f"missing '{section_key}' parameters")
        return None, out.diagnostics

    if kind is ModelKind.FINITE:
        section = _finite_spec(doc[section_key], out)
        model = None if out or section is None else PompModel(name=name, kind=kind, finite=section)
    else:
        section = _gaussian_spec(doc[section_key], out)
        model = None if out or section is None else PompModel(name=name, kind=kind, gaussian=section)
    return model, out.diagnostics


def validate_document(text: Document) -> List[Diagnostic]:
    """校验模型文档，返回诊断列表（合法时为空）"""
    return _build_model(text)[1]


def parse_model(text: Document, source: Optional[str] = None) -> PompModel:
    """
    解析模型文档

    Args:
        text: JSON 文本（bytes 或 str）
        source: 文档来源，用于错误信息

    Returns:
        PompModel: 校验通过的模型

    Raises:
        ModelValidationError: 文档不合法，携带全部诊断
    """
    model, diagnostics = _build_model(text)
    if diagnostics or model is None:
        raise ModelValidationError(diagnostics, source=source)
    return model


def serialize_model(m: PompModel) -> bytes:
    """规范序列化：键排序、两空格缩进、以换行结尾"""
    return (json.dumps(m.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n").encode('utf-8')


def load_model(path: PathLike) -> PompModel:
    """
    从文件加载模型

    Raises:
        OSError: 文件不可读
        ModelValidationError: 文档不合法
    """
    path = Path(path)
    with open(path, 'rb') as f:
        payload = f.read()
    model = parse_model(payload, source=str(path))
    logger.info(f"Loaded {model.kind} model {model.name!r} from {path}")
    return model


def save_model(model: PompModel, path: PathLike) -> Path:
    target = atomic_write_bytes(path, serialize_model(model))
    logger.info(f"Saved model {model.name!r} to {target}")
    return target


# ======================
# Experiment configuration
# ======================

def _grid(value: Any, out: _Collector) -> Optional[GridSpec]:
    if not isinstance(value, dict) or not all(k in value for k in ("lo", "hi", "cells")):
        out.add("invalid_grid", "$.grid", "grid must be an object with lo, hi and cells")
        return None
    try:
        if not (_is_number(value["lo"]) and _is_number(value["hi"]) and isinstance(value["cells"], int)):
            raise ContractViolationError("GridSpec", "lo and hi must be numbers, cells an integer")
        return GridSpec.from_dict(value)
    except ContractViolationError as e:
        out.add("invalid_grid", "$.grid", e.detail)
        return None


def _prior(value: Any, path: str, model: PompModel, backend: Backend,
           grid: Optional[GridSpec], out: _Collector):
    """
    先验描述：
    - 概率列表（有限后端，或嵌入网格的有限模型）
    - {"point_mass": i}
    - {"uniform": {}} 或 {"uniform": {"lo": a, "hi": b}}（网格）
    - {"gaussian": {"mean": m, "std": s}}（网格）
    """
    try:
        if isinstance(value, list):
            if not all(_is_number(v) for v in value):
                raise ContractViolationError("prior", "entries must be numbers")
            finite = FiniteDistribution(value)
        elif isinstance(value, dict) and len(value) == 1:
            (key, params), = value.items()
            continuous = backend is Backend.GRID and not model.is_finite
            if key == "point_mass":
                if isinstance(params, bool) or not isinstance(params, int):
                    raise ContractViolationError("prior", f"point_mass needs a state index, got {params!r}")
                n = model.finite.states if model.is_finite else grid.cells
                finite = FiniteDistribution.point_mass(n, params)
            elif key == "uniform" and continuous:
                params = params or {}
                return GridDensity.uniform(grid, params.get("lo"), params.get("hi"))
            elif key == "uniform":
                finite = FiniteDistribution.uniform(model.finite.states)
            elif key == "gaussian" and continuous:
                return GridDensity.gaussian(grid, float(params["mean"]), float(params["std"]))
            else:
                raise ContractViolationError("prior", f"prior form {key!r} does not fit a {model.kind} model on {backend}")
        else:
            raise ContractViolationError("prior", "expected a probability list or a single-key prior object")
    except (ContractViolationError, KeyError, TypeError, ValueError, AttributeError) as e:
        out.add("invalid_prior", path, str(e))
        return None

    if backend is Backend.FINITE:
        return finite
    if model.is_finite:
        return finite.to_grid_density()
    if len(finite) != grid.cells:
        out.add("invalid_prior", path, f"{len(finite)} masses for a {grid.cells}-cell grid")
        return None
    return GridDensity.from_masses(grid, finite.probs)


def parse_experiment_config(
    text: Document,
    base_dir: PathLike = ".",
    settings: Optional[Settings] = None,
    source: Optional[str] = None
) -> ExperimentConfig:
    """
    解析实验配置

    模型路径与 csv 路径相对于 base_dir（配置文件所在目录）解析。

    Raises:
        ModelValidationError: 配置不合法（包括引用的模型不合法）
        AbsoluteContinuityError: 有限后端下 μ 不绝对连续于 ν
        OSError: 引用的模型文件不可读
    """
    settings = settings or Settings.load()
    base_dir = Path(base_dir)
    out = _Collector()
    doc = _decode(text, out)
    if doc is None or not _check_header(doc, out):
        raise ModelValidationError(out.diagnostics, source=source)

    for key in ("model", "mu", "nu", "horizon", "trials", "seed"):
        if key not in doc:
            out.add("missing_field", f"$.{key}", f"missing {key}")
    if out:
        raise ModelValidationError(out.diagnostics, source=source)

    for key in ("horizon", "trials", "seed"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool) or doc[key] < (0 if key == "seed" else 1):
            out.add("invalid_value", f"$.{key}", f"{key} must be an integer >= {0 if key == 'seed' else 1}")
    if not isinstance(doc["model"], str):
        out.add("invalid_value", "$.model", "model must be a path string")
    try:
        backend = Backend.from_string(doc.get("backend", "finite"))
    except ValueError as e:
        out.add("invalid_value", "$.backend", str(e))
        backend = None
    policy = doc.get("policy")
    if policy is not None and not (isinstance(policy, list) and all(isinstance(a, str) for a in policy)):
        out.add("invalid_value", "$.policy", "policy must be a list of action names")
    if out:
        raise ModelValidationError(out.diagnostics, source=source)

    model_path = (base_dir / doc["model"]).resolve()
    model = load_model(model_path)

    grid = None
    if backend is Backend.GRID:
        if "grid" in doc:
            grid = _grid(doc["grid"], out)
        elif model.is_finite:
            grid = GridSpec(0.0, float(model.finite.states), model.finite.states)
        else:
            grid = model.gaussian.default_grid(settings.default_grid_cells)
        if grid is not None and model.is_finite and grid != GridSpec(0.0, float(model.finite.states), model.finite.states):
            out.add("invalid_grid", "$.grid", "a finite model embeds on unit cells [0, n] with one cell per state")
            grid = None
        if grid is not None and not model.is_finite:
            half = model.gaussian.transition.bound + 6.0 * model.gaussian.transition.sigma
            if not grid.covers(-half + GRID_TOLERANCE, half - GRID_TOLERANCE):
                out.add("invalid_grid", "$.grid", f"grid must cover [-{half:g}, {half:g}] (t + 6 sigma_t)")
                grid = None
        if grid is None:
            raise ModelValidationError(out.diagnostics, source=source)

    mu = _prior(doc["mu"], "$.mu", model, backend, grid, out)
    nu = _prior(doc["nu"], "$.nu", model, backend, grid, out)
    if out:
        raise ModelValidationError(out.diagnostics, source=source)

    csv_path = doc.get("csv")
    try:
        cfg = ExperimentConfig(
            name=str(doc.get("name") or (Path(source).stem if source else model.name)),
            model=model,
            mu=mu,
            nu=nu,
            horizon=doc["horizon"],
            trials=doc["trials"],
            seed=doc["seed"],
            backend=backend,
            grid=grid,
            policy=tuple(policy) if policy is not None else None,
            model_path=model_path,
            csv=(base_dir / csv_path) if csv_path else None,
        )
    except ContractViolationError as e:
        if e.__class__ is not ContractViolationError:
            raise
        raise ModelValidationError([Diagnostic("invalid_value", "$", str(e))], source=source)
    logger.info(f"Parsed experiment {cfg.name!r}: {cfg.trials} trials, horizon {cfg.horizon}, backend {backend}")
    return cfg


def load_experiment_config(path: PathLike, settings: Optional[Settings] = None) -> ExperimentConfig:
    """从文件加载实验配置（模型路径相对于配置文件目录）"""
    path = Path(path)
    with open(path, 'rb') as f:
        payload = f.read()
    return parse_experiment_config(payload, base_dir=path.parent, settings=settings, source=str(path))
