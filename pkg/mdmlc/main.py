"""命令行入口"""
import argparse
import logging
import logging.handlers
import sys
from pathlib import Path
from typing import List, Optional

import yaml

from . import __version__
from .cli import COMMANDS
from .cli.common import emit_json, print_diagnostics
from .core.config import Config, set_config
from .core.errors import DeploymentRejected, ExitStatus, MdmlError, ParseFailure, SemanticError

logger = logging.getLogger("mdmlc")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(config: Config, verbose: bool = False, quiet: bool = False) -> None:
    """日志输出到 stderr；配置了 logging.dir 时另按天轮转写文件"""
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, config.log_level, logging.INFO)

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_dir = config.log_dir
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.handlers.TimedRotatingFileHandler(
            filename=str(log_dir / "mdmlc.log"),
            when="midnight",
            interval=1,
            backupCount=30,
            encoding="utf-8",
        ))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdmlc",
        description="Compiler toolchain for a modeling language of IoT things with embedded ML.",
    )
    parser.add_argument("--config", dest="config_file", help="YAML configuration file (default: ./mdml.yaml)")
    parser.add_argument("--platforms", help="YAML file with additional platform profiles")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def _report(error: MdmlError, as_json: bool) -> None:
    """错误写到 stderr；--json 时另在 stdout 输出结构化结果"""
    diagnostics = []
    if isinstance(error, ParseFailure):
        for e in error.errors:
            sys.stderr.write(f"{e}\n")
        diagnostics = [e.to_dict() for e in error.errors]
    elif isinstance(error, SemanticError) and error.diagnostics:
        print_diagnostics(error.diagnostics)
        diagnostics = [d.to_dict() for d in error.diagnostics]
    else:
        sys.stderr.write(f"error: {error}\n")

    if isinstance(error, DeploymentRejected) and error.decision is not None:
        sys.stderr.write(error.decision.summary() + "\n")

    if as_json:
        payload = {
            "ok": False,
            "exit_status": int(error.exit_status),
            "error": str(error),
            "diagnostics": diagnostics,
        }
        if isinstance(error, DeploymentRejected) and error.decision is not None:
            payload["decision"] = error.decision.model_dump(mode="json")
        emit_json(payload)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = Config(args.config_file)
    except (OSError, ValueError, yaml.YAMLError) as e:
        sys.stderr.write(f"error: cannot load configuration: {e}\n")
        return ExitStatus.IO_ERROR
    set_config(config)
    setup_logging(config, args.verbose, args.quiet)
    if config.config_path is not None:
        logger.debug(f"使用配置文件: {Path(config.config_path).absolute()}")

    as_json = getattr(args, "json", False)
    try:
        return int(args.func(args, config))
    except MdmlError as e:
        logger.debug(f"{args.command} 失败: {e!r}")
        _report(e, as_json)
        return int(e.exit_status)
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return ExitStatus.IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
