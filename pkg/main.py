"""
FilterStab - 非线性滤波稳定性分析工具

主程序入口文件

用法:
    python main.py analyze config/models/example1_example3.json
    python main.py simulate config/experiments/two_state_stable.json --seed 7
    python main.py table1 --ratios 1.2 1.0 0.8 --csv results/table1.csv
    python main.py example3
    python main.py validate path/to/model.json

退出码: 0 成功，1 契约或校验失败，2 I/O 失败

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.config.settings import Settings
from src.controllers.analysis_controller import AnalysisController
from src.controllers.reproduction_controller import ReproductionController
from src.controllers.simulation_controller import SimulationController
from src.core.errors import FilterStabError, ModelValidationError
from src.models.results import CommandResult
from src.version import __description__, __version__


logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE = 'filterstab.log'

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_IO = 2


def configure_logging(level_name: str) -> None:
    """
    配置日志：文件记录 INFO 及以上，stderr 只显示 --log-level 及以上

    Args:
        level_name: 日志级别名称
    """
    level = getattr(logging, level_name.upper())
    file_handler = logging.FileHandler(LOG_FILE, encoding='utf-8')
    file_handler.setLevel(min(level, logging.INFO))
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(level)
    logging.basicConfig(
        level=min(level, logging.INFO),
        format=LOG_FORMAT,
        handlers=[file_handler, stream_handler],
        force=True
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--csv", type=Path, default=None, help="write machine-readable results to this CSV file")
    common.add_argument("--quiet", action="store_true", help="suppress tables on stdout")
    common.add_argument(
        "--log-level", default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="stderr log level (the log file always records INFO)"
    )

    parser = argparse.ArgumentParser(prog="filterstab", description=__description__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="Dobrushin coefficients and stability verdict")
    analyze.add_argument("model", type=Path, help="model file (JSON)")

    simulate = sub.add_parser("simulate", parents=[common], help="dual-filter Monte Carlo experiment")
    simulate.add_argument("config", type=Path, help="experiment configuration (JSON)")
    simulate.add_argument("--seed", type=int, default=None, help="override the configured base seed")

    table = sub.add_parser("table1", parents=[common], help="minimum sigma_q/q for each sigma_t/t")
    table.add_argument("--ratios", type=float, nargs="+", default=None, metavar="RT", help="sigma_t/t values")

    sub.add_parser("example3", parents=[common], help="one-step Bayes expansion example")

    validate = sub.add_parser("validate", parents=[common], help="lint a model file")
    validate.add_argument("model", type=Path, help="model file (JSON)")
    return parser


def dispatch(args: argparse.Namespace, settings: Settings) -> CommandResult:
    """把子命令分派到对应控制器"""
    if args.command == "analyze":
        return AnalysisController(settings).analyze(args.model, csv_path=args.csv, quiet=args.quiet)
    if args.command == "validate":
        return AnalysisController(settings).validate(args.model, quiet=args.quiet)
    if args.command == "simulate":
        return SimulationController(settings).simulate(
            args.config, seed=args.seed, csv_path=args.csv, quiet=args.quiet
        )
    if args.command == "table1":
        return ReproductionController().table1(args.ratios, csv_path=args.csv, quiet=args.quiet)
    return ReproductionController().example3(csv_path=args.csv, quiet=args.quiet)


def main(argv: Optional[List[str]] = None) -> int:
    """
    主函数

    Args:
        argv: 命令行参数（不含程序名），默认 sys.argv[1:]

    Returns:
        int: 退出码
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    logger.info(f"FilterStab {__version__}: {args.command}")

    try:
        settings = Settings.load()
        result = dispatch(args, settings)
    except ModelValidationError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: invalid document{' ' + e.source if e.source else ''}", file=sys.stderr)
        for diagnostic in e.diagnostics:
            print(f"  {diagnostic}", file=sys.stderr)
        return EXIT_CONTRACT
    except FilterStabError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as e:
        logger.error(f"{args.command} failed with an I/O error: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    if result.stdout:
        print(result.stdout)
    for artifact in result.artifacts:
        logger.info(f"Wrote {artifact}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
