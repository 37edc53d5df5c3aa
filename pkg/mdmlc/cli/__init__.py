"""命令行子命令；每个模块提供 register(subparsers)"""
from . import check, convert, estimate, generate, predict, simulate, synth, targets, train

COMMANDS = (check, generate, train, predict, convert, estimate, simulate, synth, targets)

__all__ = ["COMMANDS"]
