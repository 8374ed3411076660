"""
Lattice-sum sharpness command
"""

import argparse
import math
from pathlib import Path
from typing import Any, Dict

from app.models.riemann import SharpnessSummary
from app.services.pipeline import write_sharpness
from app.utils.io import read_json


def sharpness(args: argparse.Namespace) -> Dict[str, Any]:
    """Gaps between lattice sums and Gaussian integrals, with scaling slopes"""
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_sharpness(args.T, args.d, sorted(args.N_list), args.t_list, not args.standard, out)
    summary = SharpnessSummary.model_validate(read_json(out / "sharp_summary.json"))
    return {
        "success": True,
        "message": f"Sharpness sweep written to {out}",
        "data": {
            "slopes": summary.slopes,
            "min_agreement_digits": summary.min_agreement_digits,
            "sup_plain": summary.uniform.sup_plain,
            "sup_weighted": summary.uniform.sup_weighted,
        },
    }


def register(subparsers) -> None:
    p = subparsers.add_parser("sharpness", help="lattice-sum versus integral sharpness sweep")
    p.add_argument("--T", type=float, default=2.0 * math.pi)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--N-list", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128, 256])
    p.add_argument("--t-list", type=float, nargs="+", default=[1.0, 4.0, 16.0, 64.0])
    p.add_argument("--standard", action="store_true", help="skip the extended-precision references")
    p.add_argument("--out", "--output-dir", dest="output_dir", default=".")
    p.set_defaults(handler=sharpness)
