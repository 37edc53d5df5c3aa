#!/usr/bin/env python3
"""命令行启动脚本，等价于 python -m mdmlc.main"""
import sys

from mdmlc.main import main

if __name__ == "__main__":
    sys.exit(main())
