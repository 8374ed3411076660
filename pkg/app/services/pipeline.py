"""
End-to-end run: wave -> verdict -> curve -> sweep / sharpness / whitham -> report.

Every stage records the hashes of its config sections and input files in
manifest.json together with the hashes of what it wrote. A stage whose
recorded inputs still match and whose outputs exist is skipped; an input
file that no longer matches its recorded hash stops the run unless forced.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.core.exceptions import (
    AcceptanceFailure,
    HashMismatchError,
    StageFailure,
    ToolkitError,
    ValidationError,
)
from app.models.bloch import CriticalCurve, StabilityVerdict
from app.models.dynamics import DECAY_COLUMNS, UNIFORM_COLUMNS, CutoffProfile
from app.models.riemann import SHARPNESS_COLUMNS
from app.models.wave import LleParams, PeriodicWave
from app.schemas.bloch import load_curve, load_verdict, save_curve, save_spectrum, save_verdict
from app.schemas.manifest import Manifest, ManifestFile, StageRecord, load_manifest, save_manifest
from app.schemas.run import PrecisionMode, RunConfig
from app.schemas.tables import LOCALIZED_COLUMNS, WHITHAM_COLUMNS, validate_artifact
from app.schemas.wave import load_wave, save_wave
from app.services import riemann
from app.services.blochop import BlochService, default_xi_grid
from app.services.report import AcceptanceCheck, acceptance_checks, report
from app.services.semigroup import SemigroupService
from app.services.transforms import random_identity_check
from app.services.wave import WaveService
from app.utils.io import sha256_file, write_csv, write_json

logger = logging.getLogger(__name__)

IDENTITY_N_LIST = (1, 2, 3, 4, 8, 16, 32)

Produced = List[Tuple[str, str]]


@dataclass(frozen=True)
class Stage:
    """A node of the run DAG: config sections and upstream files it depends on"""
    name: str
    sections: Tuple[str, ...]
    inputs: Tuple[str, ...]


STAGES = (
    Stage("wave", ("params", "mu", "T", "M", "tol"), ()),
    Stage("verdict", ("xi_grid", "N_list"), ("wave.json",)),
    Stage("curve", ("curve_samples",), ("wave.json", "verdict.json")),
    Stage("sweep", ("N_list", "t_grid", "cutoff_xi1", "seed"), ("wave.json", "verdict.json", "curve.json")),
    Stage("sharpness", ("sharpness", "precision_mode"), ("wave.json",)),
    Stage("whitham", ("localized", "cutoff_xi1", "seed"), ("wave.json", "curve.json")),
    Stage("report", ("plots",), ()),
)


# Artifact writers shared with the single-step commands

def write_sweep(semigroup: SemigroupService, curve: CriticalCurve, cutoff: CutoffProfile, N_list: Sequence[int],
                t_grid: Sequence[float], seed: int, out: Path,
                delta_table: Optional[Dict[int, float]] = None) -> Produced:
    """uniform.csv and decay.csv of a single-bump subharmonic sweep"""
    sweep = semigroup.uniform_sweep(curve, cutoff, semigroup.bump_family(seed=seed), N_list, t_grid,
                                    delta_table=delta_table)
    write_csv(out / "uniform.csv", UNIFORM_COLUMNS, (row.csv_row() for row in sweep.rows))
    write_csv(out / "decay.csv", DECAY_COLUMNS, sweep.decay_rows)
    return [("uniform.csv", "uniform"), ("decay.csv", "decay")]


def write_sharpness(T: float, d: float, N_list: Sequence[int], t_list: Sequence[float], extended: bool,
                    out: Path) -> Produced:
    """sharp.csv and sharp_summary.json"""
    records, summary = riemann.sharpness_summary(T, d, N_list, t_list, extended=extended,
                                                 crossover_N=list(N_list)[:2])
    write_csv(out / "sharp.csv", SHARPNESS_COLUMNS, (r.csv_row() for r in records))
    write_json(out / "sharp_summary.json", summary.model_dump())
    return [("sharp.csv", "sharp"), ("sharp_summary.json", "sharp_summary")]


def write_localized(semigroup: SemigroupService, curve: CriticalCurve, cutoff: CutoffProfile, n_window: int,
                    width: float, t_grid: Sequence[float], seed: int, out: Path) -> Produced:
    """
    localized.csv of a windowed Gaussian perturbation and whitham.csv of the
    same bump on the late-time Whitham window
    """
    rng = np.random.default_rng(seed)
    weights = tuple(float(w) for w in rng.standard_normal(2))
    v = semigroup.bump(n_window, width=width, weights=weights, center=(n_window // 2) * semigroup.T)
    localized = semigroup.localized_pipeline(curve, cutoff, v, t_grid)
    rows = zip(localized.times, localized.norm_minus_kernel, localized.norm_phase,
               localized.norm_residual, localized.closure_residuals, localized.leaks)
    write_csv(out / "localized.csv", LOCALIZED_COLUMNS, rows)
    comparison = semigroup.whitham_run(curve, cutoff, width=width, weights=weights)
    write_csv(out / "whitham.csv", WHITHAM_COLUMNS, zip(comparison.times, comparison.errors))
    return [("localized.csv", "localized"), ("whitham.csv", "whitham")]


class Pipeline:
    """Stage-sequential runner over one output directory"""

    def __init__(self, config: RunConfig, force: bool = False, max_workers: Optional[int] = None):
        self.config = config
        self.force = force
        self.max_workers = max_workers or settings.MAX_WORKERS
        self.out = Path(config.output_dir)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValidationError(f"cannot create output directory {self.out}: {e}", field="output_dir")
        if not os.access(self.out, os.W_OK):
            raise ValidationError(f"output directory {self.out} is not writable", field="output_dir")

        config_hash = config.section_hash(*(name for name in RunConfig.model_fields if name != "output_dir"))
        manifest_path = self.out / "manifest.json"
        if manifest_path.exists():
            self.manifest = load_manifest(manifest_path)
            self.manifest.config_hash = config_hash
        else:
            self.manifest = Manifest(app_name=settings.APP_NAME, config_hash=config_hash)

        self._wave: Optional[PeriodicWave] = None
        self._bloch: Optional[BlochService] = None
        self._verdict: Optional[StabilityVerdict] = None
        self._curve: Optional[CriticalCurve] = None
        self.executed: List[str] = []
        self.skipped: List[str] = []

    # Loaded artifacts

    @property
    def wave(self) -> PeriodicWave:
        if self._wave is None:
            self._wave = load_wave(self.out / "wave.json")
        return self._wave

    @property
    def bloch(self) -> BlochService:
        if self._bloch is None:
            self._bloch = BlochService(self.wave, max_workers=self.max_workers)
        return self._bloch

    @property
    def verdict(self) -> StabilityVerdict:
        if self._verdict is None:
            self._verdict = load_verdict(self.out / "verdict.json")
        return self._verdict

    @property
    def curve(self) -> CriticalCurve:
        if self._curve is None:
            self._curve = load_curve(self.out / "curve.json")
        return self._curve

    def cutoff(self) -> CutoffProfile:
        return CutoffProfile(xi1=self.config.cutoff_xi1 or self.curve.xi1)

    # Bookkeeping

    def _stage_inputs(self, stage: Stage) -> Tuple[Dict[str, str], List[str]]:
        """Recorded input hashes and the list of missing upstream files"""
        inputs = {"config": self.config.section_hash(*stage.sections)}
        names = stage.inputs
        if stage.name == "report":
            names = tuple(f.path for f in self.manifest.files if f.stage != "report")
        missing = []
        for name in names:
            path = self.out / name
            if not path.exists():
                missing.append(name)
                continue
            actual = sha256_file(path)
            recorded = self.manifest.file(name)
            if recorded is not None and recorded.sha256 != actual:
                if not self.force:
                    raise HashMismatchError(stage.name, name, recorded.sha256, actual)
                logger.warning(f"⚠️ Accepting modified {name} (forced)")
                self.manifest.record(
                    self.manifest.stage(recorded.stage),
                    [recorded.model_copy(update={"sha256": actual})],
                )
            inputs[name] = actual
        return inputs, missing

    def _up_to_date(self, stage: Stage, inputs: Dict[str, str]) -> bool:
        record = self.manifest.stage(stage.name)
        if record is None or record.inputs != inputs:
            return False
        return all((self.out / name).exists() for name in record.outputs)

    def _record(self, stage: Stage, inputs: Dict[str, str], produced: Produced) -> None:
        files = []
        for name, schema in produced:
            path = self.out / name
            validate_artifact(path, schema)
            files.append(ManifestFile(path=name, sha256=sha256_file(path), stage=stage.name, schema_name=schema))
        stale = self.manifest.stage(stage.name)
        if stale is not None:
            dropped = set(stale.outputs) - {name for name, _ in produced}
            self.manifest.files = [f for f in self.manifest.files if f.path not in dropped]
        self.manifest.record(StageRecord(name=stage.name, inputs=inputs, outputs=[n for n, _ in produced]), files)
        save_manifest(self.manifest, self.out)

    # Run

    def run(self, check: bool = False) -> Manifest:
        logger.info(f"🚀 Pipeline into {self.out} ({len(STAGES)} stages)")
        for stage in STAGES:
            inputs, missing = self._stage_inputs(stage)
            if self._up_to_date(stage, inputs):
                logger.info(f"⏭️ Stage '{stage.name}' up to date")
                self.skipped.append(stage.name)
                continue
            handler: Callable[[List[str]], Produced] = getattr(self, f"_run_{stage.name}")
            logger.info(f"🚀 Stage '{stage.name}'")
            try:
                produced = handler(missing)
                self._record(stage, inputs, produced)
            except StageFailure:
                raise
            except ToolkitError as e:
                logger.error(f"❌ Stage '{stage.name}' failed: {e.message}")
                raise StageFailure(stage.name, e.message, {"cause": e.details.get("error_type")}) from e
            except Exception as e:
                logger.error(f"❌ Stage '{stage.name}' failed: {e}")
                raise StageFailure(stage.name, str(e), {"cause": type(e).__name__}) from e
            self.executed.append(stage.name)
        logger.info(f"✅ Pipeline finished: ran {self.executed or 'nothing'}, skipped {self.skipped or 'nothing'}")
        if check:
            self.assert_acceptance()
        return self.manifest

    def acceptance(self) -> List[AcceptanceCheck]:
        rng = np.random.default_rng(self.config.seed)
        errors: Dict[str, float] = {}
        for N in IDENTITY_N_LIST:
            for key, value in random_identity_check(N, self.wave.T, 16, rng).items():
                errors[f"{key}_N{N}"] = value
        mu = self.config.mu if self.config.bifurcating else None
        return acceptance_checks(self.out, mu=mu, identity_errors=errors)

    def assert_acceptance(self) -> None:
        failed = {c.name: c.detail for c in self.acceptance() if not c.passed}
        if failed:
            raise AcceptanceFailure(failed)
        logger.info("✅ All acceptance checks passed")

    # Stage handlers

    def _run_wave(self, missing: List[str]) -> Produced:
        cfg = self.config
        solver = WaveService(tol=cfg.tol)
        p = cfg.params
        if cfg.bifurcating:
            seed = solver.bifurcation_seed(p.alpha, cfg.mu, M=cfg.M, beta=p.beta)
            wave = solver.newton_solve(seed)
        else:
            wave = solver.constant_wave(LleParams(alpha=p.alpha, beta=p.beta, F=p.F), cfg.period, M=cfg.M)
        save_wave(wave, self.out / "wave.json")
        self._wave, self._bloch = None, None
        return [("wave.json", "wave")]

    def _run_verdict(self, missing: List[str]) -> Produced:
        cfg = self.config
        grid = default_xi_grid(self.wave.T, cfg.xi_grid.n_points, cfg.xi_grid.refine)
        verdict = self.bloch.check_diffusive_stability(grid, cfg.N_list)
        save_verdict(verdict, self.out / "verdict.json")
        slices = [es.slice(zero_mode=es.xi == 0.0) for es in self.bloch.eigensystems(grid)]
        save_spectrum(slices, self.out / "spectrum.csv")
        self._verdict = None
        return [("verdict.json", "verdict"), ("spectrum.csv", "spectrum")]

    def _run_curve(self, missing: List[str]) -> Produced:
        if not self.verdict.stable:
            failed = ", ".join(c.value for c in self.verdict.failing_conditions())
            logger.warning(f"⚠️ No critical curve: wave is not diffusively spectrally stable ({failed})")
            return []
        if self.verdict.xi1 <= 0.0:
            raise ValidationError("critical branch is not separated on any xi > 0", field="xi1")
        curve = self.bloch.critical_curve(self.verdict.xi1, self.config.curve_samples, self.verdict)
        save_curve(curve, self.out / "curve.json")
        self._curve = None
        return [("curve.json", "curve")]

    def _run_sweep(self, missing: List[str]) -> Produced:
        cfg = self.config
        if missing or not cfg.N_list:
            reason = f"missing {', '.join(missing)}" if missing else "empty N_list"
            logger.warning(f"⚠️ Subharmonic sweep skipped ({reason})")
            return []
        return write_sweep(SemigroupService(self.bloch), self.curve, self.cutoff(), cfg.N_list,
                           cfg.t_grid.values(), cfg.seed, self.out, delta_table=self.verdict.delta_N_table)

    def _run_sharpness(self, missing: List[str]) -> Produced:
        spec = self.config.sharpness
        T = spec.T if spec.T is not None else self.wave.T
        if spec.d is not None:
            d = spec.d
        elif (self.out / "curve.json").exists():
            d = self.curve.d
        else:
            logger.warning("⚠️ Sharpness sweep skipped: no d configured and no critical curve")
            return []
        extended = self.config.precision_mode == PrecisionMode.EXTENDED
        return write_sharpness(T, d, spec.N_list, spec.t_list, extended, self.out)

    def _run_whitham(self, missing: List[str]) -> Produced:
        spec = self.config.localized
        if missing or not spec.enabled:
            reason = f"missing {', '.join(missing)}" if missing else "disabled"
            logger.warning(f"⚠️ Localized run skipped ({reason})")
            return []
        return write_localized(SemigroupService(self.bloch), self.curve, self.cutoff(), spec.n_window,
                               spec.width, spec.t_grid.values(), self.config.seed, self.out)

    def _run_report(self, missing: List[str]) -> Produced:
        # the manifest must list the upstream artifacts before the report reads it
        save_manifest(self.manifest, self.out)
        written = report(self.out, plots=self.config.plots)
        return [(path.name, "markdown" if path.suffix == ".md" else "png") for path in written]


def run_pipeline(config: RunConfig, force: bool = False, check: bool = False,
                 max_workers: Optional[int] = None) -> Manifest:
    return Pipeline(config, force=force, max_workers=max_workers).run(check=check)
