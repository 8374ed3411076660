"""
CLI package
"""

import argparse

from .dynamics import register as register_dynamics
from .run import register as register_run
from .sharpness import register as register_sharpness
from .spectral import register as register_spectral
from .wave import register as register_wave


def build_parser() -> argparse.ArgumentParser:
    """Main parser with one sub-command per operation"""
    parser = argparse.ArgumentParser(
        prog="lle-stability",
        description="Spectral and linear stability analysis of periodic Lugiato-Lefever waves",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--workers", type=int, default=None, help="threads for xi-parallel work")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include command groups
    register_wave(subparsers)
    register_spectral(subparsers)
    register_dynamics(subparsers)
    register_sharpness(subparsers)
    register_run(subparsers)
    return parser


# Export build_parser
__all__ = ["build_parser"]
