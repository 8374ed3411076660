"""
Semigroup commands: evolution, decomposition, subharmonic sweep and Whitham comparison
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from app.config import settings
from app.core.exceptions import ValidationError
from app.models.dynamics import DECAY_COLUMNS, CutoffProfile
from app.models.field import FieldSample
from app.schemas.bloch import load_curve
from app.schemas.field import load_field, save_bloch_coefficients, save_field
from app.schemas.run import TimeGridSpec
from app.schemas.wave import load_wave
from app.services.blochop import BlochService
from app.services.pipeline import write_localized, write_sweep
from app.services.semigroup import SemigroupService, difference_quotient_bound, whitham_multiplier_gap
from app.services.transforms import bloch_T
from app.utils.io import write_csv

logger = logging.getLogger(__name__)


def _services(args: argparse.Namespace, with_curve: bool = True):
    wave = load_wave(args.wave)
    curve = load_curve(args.curve) if with_curve else None
    M = curve.M if curve is not None else None
    semigroup = SemigroupService(BlochService(wave, M=M, max_workers=args.workers))
    cutoff = CutoffProfile(xi1=args.xi1 or curve.xi1) if curve is not None else None
    return semigroup, curve, cutoff


def _bump(semigroup: SemigroupService, args: argparse.Namespace):
    return semigroup.bump_family(width=args.width, seed=args.seed)(args.N)


def _times(args: argparse.Namespace) -> np.ndarray:
    return TimeGridSpec(start=0.0, stop=args.t_stop, count=args.t_count).values()


def _perturbation(semigroup: SemigroupService, args: argparse.Namespace) -> FieldSample:
    """--f field file, or a seeded bump on the --N lattice"""
    if args.f:
        return load_field(args.f)
    if args.N is None:
        raise ValidationError("either --f or --N is required", field="N")
    return _bump(semigroup, args)


def evolve(args: argparse.Namespace) -> Dict[str, Any]:
    """||exp(A t) f|| for a field file or a seeded bump on the NT-periodic lattice"""
    semigroup, _, _ = _services(args, with_curve=False)
    f = _perturbation(semigroup, args)
    rows = [(float(t), semigroup.evolve(f, float(t)).norm()) for t in sorted(args.t)]
    path = write_csv(Path(args.output), ("t", "norm"), rows)
    return {
        "success": True,
        "message": f"Evolution norms written to {path}",
        "data": {"N": f.N, "norms": [r[1] for r in rows]},
    }


def decompose(args: argparse.Namespace) -> Dict[str, Any]:
    """Five-part decomposition: one field file per part and time, the norms table and B_T(f)"""
    semigroup, curve, cutoff = _services(args)
    f = _perturbation(semigroup, args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    split = semigroup.decomposition(curve, cutoff, f)
    reports = [split.report(float(t)) for t in sorted(args.t)]
    files = []
    for r in reports:
        for name, part in [("full", r.full)] + list(r.parts.items()):
            files.append(save_field(part, out / f"{name}_t{r.t:g}.json").name)
    write_csv(out / "decay.csv", DECAY_COLUMNS, (r.csv_row() for r in reports))
    save_bloch_coefficients(bloch_T(f), out / "bloch_coefficients.json")
    logger.info(f"💾 {len(files)} part fields written to {out}")
    return {
        "success": True,
        "message": f"Decomposition of {len(reports)} times written to {out}",
        "data": {
            "closure_residual": max(r.closure_residual for r in reports),
            "norm_f": f.norm(),
            "files": files + ["decay.csv", "bloch_coefficients.json"],
        },
    }


def sweep(args: argparse.Namespace) -> Dict[str, Any]:
    """Uniform-in-N decay sweep"""
    semigroup, curve, cutoff = _services(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    produced = write_sweep(semigroup, curve, cutoff, sorted(args.N_list), _times(args), args.seed, out)
    return {
        "success": True,
        "message": f"Sweep over N={sorted(args.N_list)} written to {out}",
        "data": {"files": [name for name, _ in produced]},
    }


def whitham(args: argparse.Namespace) -> Dict[str, Any]:
    """Windowed localized run and the modulation comparison against the Whitham equation"""
    semigroup, curve, cutoff = _services(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = _times(args)
    produced = write_localized(semigroup, curve, cutoff, args.n_window, args.width, times, args.seed, out)
    return {
        "success": True,
        "message": f"Localized run on a {args.n_window}-cell window written to {out}",
        "data": {
            "files": [name for name, _ in produced],
            "multiplier_gap": whitham_multiplier_gap(curve, cutoff, times),
            "difference_quotient_bound": difference_quotient_bound(curve, cutoff),
        },
    }


def _common(p: argparse.ArgumentParser, curve: bool = True) -> None:
    p.add_argument("--wave", required=True, help="wave.json")
    if curve:
        p.add_argument("--curve", required=True, help="curve.json")
        p.add_argument("--xi1", type=float, default=None, help="cutoff radius (default: the curve's xi1)")
    p.add_argument("--width", type=float, default=1.0, help="Gaussian bump width")
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)


def register(subparsers) -> None:
    p = subparsers.add_parser("evolve", help="apply exp(A t) to an NT-periodic field")
    _common(p, curve=False)
    p.add_argument("--f", default=None, help="field.json (default: a seeded bump on the --N lattice)")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--out", "--output", dest="output", default="evolve.csv")
    p.set_defaults(handler=evolve)

    p = subparsers.add_parser("decompose", help="five-part decomposition of exp(A t) f")
    _common(p)
    p.add_argument("--f", default=None, help="field.json (default: a seeded bump on the --N lattice)")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--out", "--output-dir", dest="output_dir", default="parts")
    p.set_defaults(handler=decompose)

    p = subparsers.add_parser("sweep", help="uniform subharmonic decay sweep")
    _common(p)
    p.add_argument("--N-list", type=int, nargs="+", default=list(settings.DEFAULT_N_LIST))
    p.add_argument("--t-stop", type=float, default=2000.0)
    p.add_argument("--t-count", type=int, default=61)
    p.add_argument("--out", "--output-dir", dest="output_dir", default=".")
    p.set_defaults(handler=sweep)

    p = subparsers.add_parser("whitham", help="localized run and Whitham comparison")
    _common(p)
    p.add_argument("--n-window", type=int, default=64)
    p.add_argument("--t-stop", type=float, default=200.0)
    p.add_argument("--t-count", type=int, default=41)
    p.add_argument("--out", "--output-dir", dest="output_dir", default=".")
    p.set_defaults(handler=whitham, width=2.0)
