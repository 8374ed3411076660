"""
Bloch spectrum, stability verdict and critical curve commands
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from app.schemas.bloch import load_verdict, save_curve, save_spectrum, save_verdict
from app.schemas.wave import load_wave
from app.services.blochop import BlochService, assemble, default_xi_grid, spectrum as bloch_spectrum
from app.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


def _grid(args: argparse.Namespace, T: float) -> np.ndarray:
    if args.xi:
        return np.array(sorted(args.xi), dtype=float)
    return default_xi_grid(T, args.n_points, args.refine)


def spectrum(args: argparse.Namespace) -> Dict[str, Any]:
    """Sorted spectra of A_xi on a frequency grid"""
    wave = load_wave(args.wave)
    grid = _grid(args, wave.T)
    M = args.M or wave.M

    def solve(xi: float):
        return bloch_spectrum(assemble(wave, xi, M), wave if args.check_truncation else None)

    slices = ordered_map(solve, list(grid), args.workers)
    path = save_spectrum(slices, Path(args.output))
    unconverged = [s.xi for s in slices if s.truncation_converged is False]
    return {
        "success": True,
        "message": f"Spectrum of {len(slices)} slices written to {path}",
        "data": {
            "max_real_part": max(s.max_real_part for s in slices),
            "unconverged_xi": unconverged,
        },
    }


def verdict(args: argparse.Namespace) -> Dict[str, Any]:
    """Diffusive spectral stability check"""
    wave = load_wave(args.wave)
    service = BlochService(wave, M=args.M, max_workers=args.workers)
    result = service.check_diffusive_stability(_grid(args, wave.T), args.N_list,
                                               check_truncation=not args.skip_truncation)
    path = save_verdict(result, Path(args.output))
    return {
        "success": True,
        "message": f"Verdict written to {path}",
        "data": {
            "stable": result.stable,
            "failing_conditions": [c.value for c in result.failing_conditions()],
            "theta": result.theta,
            "xi1": result.xi1,
            "delta1": result.delta1,
            "offending_xi": result.offending_xi[:10],
        },
    }


def curve(args: argparse.Namespace) -> Dict[str, Any]:
    """Critical branch through zero and its (a, d) fit"""
    wave = load_wave(args.wave)
    service = BlochService(wave, M=args.M, max_workers=args.workers)
    stability = load_verdict(args.verdict) if args.verdict else service.check_diffusive_stability(
        default_xi_grid(wave.T), check_truncation=False)
    xi_max = args.xi_max or stability.xi1
    result = service.critical_curve(xi_max, args.samples, stability)
    path = save_curve(result, Path(args.output))
    return {
        "success": True,
        "message": f"Critical curve written to {path}",
        "data": {"a": result.a, "d": result.d, "theta": result.theta, "fit_residual": result.fit_residual},
    }


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wave", required=True, help="wave.json")
    p.add_argument("--M", type=int, default=None, help="Bloch truncation (default: the wave's)")


def _grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi", type=float, nargs="+", help="explicit frequencies")
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--refine", type=int, default=None)


def register(subparsers) -> None:
    p = subparsers.add_parser("spectrum", help="Bloch spectra on a xi grid")
    _common(p)
    _grid_args(p)
    p.add_argument("--check-truncation", action="store_true")
    p.add_argument("--out", "--output", dest="output", default="spectrum.csv")
    p.set_defaults(handler=spectrum)

    p = subparsers.add_parser("verdict", help="diffusive spectral stability")
    _common(p)
    _grid_args(p)
    p.add_argument("--N-list", type=int, nargs="*", default=None)
    p.add_argument("--skip-truncation", action="store_true")
    p.add_argument("--out", "--output", dest="output", default="verdict.json")
    p.set_defaults(handler=verdict)

    p = subparsers.add_parser("curve", help="critical eigenvalue curve")
    _common(p)
    p.add_argument("--verdict", help="verdict.json supplying xi1 and delta1")
    p.add_argument("--xi-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=17)
    p.add_argument("--out", "--output", dest="output", default="curve.json")
    p.set_defaults(handler=curve)
