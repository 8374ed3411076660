"""
Profile commands
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

from app.core.exceptions import ValidationError
from app.models.wave import LleParams
from app.schemas.wave import save_wave
from app.services.wave import WaveService

logger = logging.getLogger(__name__)


def solve(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Solve the profile equation from the bifurcation seed (--mu) or return
    the constant state (--F with --T)
    """
    solver = WaveService(tol=args.tol)
    if args.mu is not None:
        seed = solver.bifurcation_seed(args.alpha, args.mu, M=args.M, beta=args.beta)
        wave = solver.newton_solve(seed)
    elif args.F is not None and args.T is not None:
        wave = solver.constant_wave(LleParams(alpha=args.alpha, beta=args.beta, F=args.F), args.T, M=args.M)
    else:
        raise ValidationError("give --mu, or --F together with --T", field="mu")

    path = save_wave(wave, Path(args.output))
    return {
        "success": True,
        "message": f"Wave written to {path}",
        "data": {
            "T": wave.T,
            "M": wave.M,
            "F": wave.params.F,
            "residual_norm": wave.residual_norm,
            "iterations": wave.iterations,
            "first_harmonic_amplitude": abs(wave.first_harmonic_amplitude),
        },
    }


def register(subparsers) -> None:
    p = subparsers.add_parser("solve", help="solve the periodic profile equation")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=-1.0)
    p.add_argument("--mu", type=float, help="F^2 - F_1^2 of the bifurcating wave")
    p.add_argument("--F", type=float, help="pump of a constant-state wave")
    p.add_argument("--T", type=float, help="period of a constant-state wave")
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", "--output", dest="output", default="wave.json")
    p.set_defaults(handler=solve)
