"""
Pipeline, report and config-template commands
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

from app.core.exceptions import AcceptanceFailure
from app.schemas.run import load_run_config, render_template
from app.services.pipeline import Pipeline
from app.services.report import acceptance_checks, report as write_report
from app.utils.io import atomic_write_text

logger = logging.getLogger(__name__)


def pipeline(args: argparse.Namespace) -> Dict[str, Any]:
    """Run (or resume) every stage of a YAML run config"""
    config = load_run_config(args.config)
    if args.output_dir:
        config = config.model_copy(update={"output_dir": args.output_dir})
    runner = Pipeline(config, force=args.force, max_workers=args.workers)
    manifest = runner.run(check=args.check)
    return {
        "success": True,
        "message": f"Pipeline finished in {config.output_dir}",
        "data": {
            "executed": runner.executed,
            "skipped": runner.skipped,
            "files": {f.path: f.sha256 for f in manifest.files},
        },
    }


def report(args: argparse.Namespace) -> Dict[str, Any]:
    """Markdown summary (and plots) of an existing output directory"""
    written = write_report(args.manifest, plots=args.plots)
    data: Dict[str, Any] = {"files": [str(p) for p in written]}
    if args.check:
        checks = acceptance_checks(args.manifest)
        failed = {c.name: c.detail for c in checks if not c.passed}
        if failed:
            raise AcceptanceFailure(failed)
        data["checks"] = [c.name for c in checks]
    return {"success": True, "message": f"Report written to {written[0]}", "data": data}


def config_template(args: argparse.Namespace) -> Dict[str, Any]:
    """Commented YAML with every default"""
    path = atomic_write_text(Path(args.output), render_template())
    return {"success": True, "message": f"Template written to {path}", "data": {"path": str(path)}}


def register(subparsers) -> None:
    p = subparsers.add_parser("pipeline", help="run the full stage DAG from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", "--output-dir", dest="output_dir", default=None,
                   help="override output_dir of the config")
    p.add_argument("--force", action="store_true", help="accept modified artifacts instead of refusing")
    p.add_argument("--assert", dest="check", action="store_true", help="run the acceptance checks")
    p.set_defaults(handler=pipeline)

    p = subparsers.add_parser("report", help="summarize an output directory")
    p.add_argument("--manifest", required=True, help="manifest.json or its directory")
    p.add_argument("--plots", action="store_true")
    p.add_argument("--assert", dest="check", action="store_true")
    p.set_defaults(handler=report)

    p = subparsers.add_parser("config-template", help="write a commented run config")
    p.add_argument("--out", "--output", dest="output", default="run.yaml")
    p.set_defaults(handler=config_template)
