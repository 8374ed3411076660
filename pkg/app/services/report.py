"""
Human-readable summary, plots and acceptance checks of a pipeline run.

Everything here reads the artifacts listed in the manifest, so a report can
be regenerated from an output directory alone.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from app.config import settings
from app.core.exceptions import DegenerateFitError
from app.models.riemann import SharpnessSummary
from app.models.wave import BifurcationSeed
from app.schemas.bloch import load_curve, load_verdict
from app.schemas.manifest import Manifest, load_manifest
from app.schemas.tables import float_column
from app.schemas.wave import load_wave
from app.services.semigroup import decay_fit
from app.utils.io import PathLike, atomic_write_text, read_csv, read_json

logger = logging.getLogger(__name__)

REPORT_NAME = "report.md"


class AcceptanceCheck(BaseModel):
    """Outcome of one acceptance criterion"""
    name: str
    passed: bool
    detail: str


def _fmt(value: Optional[float], digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:.{digits}g}"


def _power_exponent(times, series, min_decades: Optional[float] = None) -> Optional[float]:
    try:
        return decay_fit(times, series, "power", window=(settings.FIT_T_MIN, math.inf),
                         min_decades=min_decades).fitted_exponent
    except DegenerateFitError:
        return None


class RunArtifacts:
    """Lazy access to the files of one output directory"""

    def __init__(self, manifest_path: PathLike):
        path = Path(manifest_path)
        self.directory = path if path.is_dir() else path.parent
        self.manifest: Manifest = load_manifest(path)

    def has(self, name: str) -> bool:
        return self.manifest.file(name) is not None and (self.directory / name).exists()

    def path(self, name: str) -> Path:
        return self.directory / name

    def rows(self, name: str) -> List[dict]:
        return read_csv(self.path(name)) if self.has(name) else []

    def localized_exponents(self) -> Dict[str, Optional[float]]:
        rows = self.rows("localized.csv")
        if not rows:
            return {}
        t = float_column(rows, "t")
        return {
            "kernel": _power_exponent(t, float_column(rows, "norm_minus_kernel"), settings.SLOW_FIT_MIN_DECADES),
            "residual": _power_exponent(t, float_column(rows, "norm_residual"), settings.SLOW_FIT_MIN_DECADES),
        }

    def whitham_exponent(self) -> Optional[float]:
        rows = self.rows("whitham.csv")
        if not rows:
            return None
        t = np.array(float_column(rows, "t"))
        err = np.array(float_column(rows, "error"))
        keep = err > 0
        return _power_exponent(t[keep], err[keep])

    def sharpness(self) -> Optional[SharpnessSummary]:
        if not self.has("sharp_summary.json"):
            return None
        return SharpnessSummary.model_validate(read_json(self.path("sharp_summary.json")))


def render_report(art: RunArtifacts) -> str:
    lines = ["# LLE stability report", ""]

    if art.has("wave.json"):
        wave = load_wave(art.path("wave.json"))
        p = wave.params
        lines += [
            "## Wave", "",
            f"- alpha = {p.alpha}, beta = {p.beta}, F = {p.F:.12g}",
            f"- period T = {wave.T:.12g}, truncation M = {wave.M}",
            f"- collocation residual = {wave.residual_norm:.3e}",
            f"- first-harmonic amplitude = {abs(wave.first_harmonic_amplitude):.6e}",
            "",
        ]

    if art.has("verdict.json"):
        verdict = load_verdict(art.path("verdict.json"))
        lines += ["## Spectral stability", ""]
        lines.append(f"- diffusively spectrally stable: {'yes' if verdict.stable else 'no'}")
        if not verdict.stable:
            failed = ", ".join(c.value for c in verdict.failing_conditions())
            lines.append(f"- failing condition(s): {failed}")
            shown = ", ".join(f"{x:.6g}" for x in verdict.offending_xi[:10])
            more = " ..." if len(verdict.offending_xi) > 10 else ""
            lines.append(f"- offending xi: {shown or 'none'}{more}")
        lines += [
            f"- max Re lambda (zero eigenvalue removed) = {verdict.max_real_part:.4e}",
            f"- theta = {_fmt(verdict.theta)}, xi1 = {_fmt(verdict.xi1)}, delta1 = {_fmt(verdict.delta1)}",
            f"- secondary gap at xi = 0: {_fmt(verdict.secondary_gap)}",
            f"- zero-eigenvalue residual = {verdict.zero_mode_residual:.2e}, "
            f"||A_0 phi'||/||phi'|| = {verdict.kernel_residual:.2e}",
            f"- truncation converged under M-doubling: {verdict.truncation_converged}",
            "",
        ]

    if art.has("curve.json"):
        curve = load_curve(art.path("curve.json"))
        lines += [
            "## Critical curve", "",
            f"- lambda_c(xi) ~ i a xi - d xi^2 with a = {curve.a:.3e}, d = {curve.d:.6g}",
            f"- theta = {_fmt(curve.theta)}, fit residual = {curve.fit_residual:.2e}",
            "",
        ]

    uniform = art.rows("uniform.csv")
    if uniform:
        lines += [
            "## Subharmonic decay", "",
            "| N | prefactor | late rate | min(eta_N, d dxi^2) | delta_N | residual exponent |",
            "|---|---|---|---|---|---|",
        ]
        for r in uniform:
            late = float(r["late_rate"]) if r["late_rate"] else None
            res = float(r["residual_exponent"]) if r["residual_exponent"] else None
            lines.append(
                f"| {r['N']} | {_fmt(float(r['prefactor']))} | {_fmt(late)} | {_fmt(float(r['diffusive_rate']))} "
                f"| {_fmt(float(r['delta_N']))} | {_fmt(res)} |"
            )
        prefactors = [float(r["prefactor"]) for r in uniform if float(r["prefactor"]) > 0]
        if prefactors:
            lines.append("")
            lines.append(f"Prefactor spread across N: {max(prefactors) / min(prefactors):.3f}")
        lines.append("")

    exps = art.localized_exponents()
    whitham = art.whitham_exponent()
    if exps or whitham is not None:
        lines += ["## Localized run and Whitham comparison", ""]
        if exps:
            lines.append(f"- ||exp(At)v - kernel part|| decay exponent: {_fmt(exps.get('kernel'))}")
            lines.append(f"- ||exp(At)v - phi' gamma|| decay exponent: {_fmt(exps.get('residual'))}")
        lines.append(f"- ||gamma - w|| decay exponent: {_fmt(whitham)}")
        lines.append("")

    summary = art.sharpness()
    sharp = art.rows("sharp.csv")
    if summary is not None and sharp:
        lines += [
            "## Lattice-sum sharpness", "",
            f"T = {summary.T:.6g}, d = {summary.d:.6g}, extended references: {summary.extended}", "",
            "| variant | t | slope log gap / log N | normalized constant min | max |",
            "|---|---|---|---|---|",
        ]
        for variant, slopes in summary.slopes.items():
            for t_key, slope in slopes.items():
                consts = [float(r["normalized_const"]) for r in sharp
                          if r["variant"] == variant and float(r["t"]) == float(t_key)]
                lines.append(f"| {variant} | {t_key} | {slope:.4f} | {_fmt(min(consts))} | {_fmt(max(consts))} |")
        lines += [
            "",
            f"- sup plain sum (1+t)^(1/2) = {summary.uniform.sup_plain:.6g}",
            f"- sup weighted sum (1+t)^(3/2) = {summary.uniform.sup_weighted:.6g}",
            f"- hardware/extended agreement: {summary.min_agreement_digits:.1f} digits",
            "",
        ]
    return "\n".join(lines)


def _plot_spectrum(art: RunArtifacts, out: Path) -> Optional[Path]:
    import matplotlib.pyplot as plt

    rows = art.rows("spectrum.csv")
    if not rows:
        return None
    re = np.array(float_column(rows, "re_lambda"))
    im = np.array(float_column(rows, "im_lambda"))
    keep = re > -5.0
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(re[keep], im[keep], ".", markersize=2)
    ax.axvline(0.0, color="k", linewidth=0.5)
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    fig.tight_layout()
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return out


def _plot_decay(art: RunArtifacts, out: Path) -> Optional[Path]:
    import matplotlib.pyplot as plt

    rows = art.rows("decay.csv")
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    for N in sorted({int(r["N"]) for r in rows}):
        chosen = [r for r in rows if int(r["N"]) == N and float(r["norm_minus_p0"]) > 0]
        ax.loglog([1.0 + float(r["t"]) for r in chosen], [float(r["norm_minus_p0"]) for r in chosen],
                  label=f"N={N}")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("||(1 - P_0N) exp(At) f||")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return out


def _plot_sharpness(art: RunArtifacts, out: Path) -> Optional[Path]:
    import matplotlib.pyplot as plt

    rows = [r for r in art.rows("sharp.csv") if r["variant"] == "plain" and float(r["gap"]) > 0]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    for t in sorted({float(r["t"]) for r in rows}):
        chosen = [r for r in rows if float(r["t"]) == t]
        ax.loglog([int(r["N"]) for r in chosen], [float(r["gap"]) for r in chosen], "o-", label=f"t={t:g}")
    ax.set_xlabel("N")
    ax.set_ylabel("|sum - integral|")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return out


def report(manifest_path: PathLike, plots: bool = False) -> List[Path]:
    """Write report.md (and PNG plots) next to the manifest; returns the written files"""
    art = RunArtifacts(manifest_path)
    written = [atomic_write_text(art.path(REPORT_NAME), render_report(art))]
    if plots:
        import matplotlib
        matplotlib.use("Agg")
        for name, draw in (("spectrum.png", _plot_spectrum), ("decay.png", _plot_decay),
                           ("sharpness.png", _plot_sharpness)):
            path = draw(art, art.path(name))
            if path is not None:
                written.append(path)
    logger.info(f"✅ Report written to {written[0]}")
    return written


# Acceptance

def acceptance_checks(manifest_path: PathLike, mu: Optional[float] = None,
                      identity_errors: Optional[Dict[str, float]] = None) -> List[AcceptanceCheck]:
    """Property checks on the artifacts of a run; artifacts that are absent are not checked"""
    art = RunArtifacts(manifest_path)
    checks: List[AcceptanceCheck] = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append(AcceptanceCheck(name=name, passed=bool(passed), detail=detail))

    if art.has("wave.json"):
        wave = load_wave(art.path("wave.json"))
        check("profile_residual", wave.residual_norm <= 1e-10, f"residual {wave.residual_norm:.2e}")
        if mu is not None:
            seed = BifurcationSeed(alpha=wave.params.alpha, mu=mu)
            expected = abs(seed.amplitude)
            rel = abs(abs(wave.first_harmonic_amplitude) - expected) / expected
            check("profile_amplitude", rel <= 0.1, f"relative amplitude deviation {rel:.3f}")
            check("profile_period", abs(wave.T - seed.T) <= 1e-12 * seed.T, f"T = {wave.T:.12g}")

    if art.has("verdict.json"):
        v = load_verdict(art.path("verdict.json"))
        check("verdict_stable", v.stable, f"failing: {[c.value for c in v.failing_conditions()]}")
        check("kernel_residual", v.kernel_residual <= 1e-8, f"{v.kernel_residual:.2e}")
        check("truncation_converged", bool(v.truncation_converged), f"{v.truncation_converged}")

    if art.has("curve.json"):
        curve = load_curve(art.path("curve.json"))
        check("curve_diffusive", curve.d > 0 and curve.theta > 0, f"d = {curve.d:.4g}, theta = {curve.theta:.4g}")
        check("curve_even", abs(curve.a) <= 1e-6, f"a = {curve.a:.2e}")

    if identity_errors is not None:
        worst = max(identity_errors.values()) if identity_errors else 0.0
        check("transform_identities", worst <= 1e-11, f"worst relative error {worst:.2e}")

    decay = art.rows("decay.csv")
    if decay:
        worst = 0.0
        for N in {int(r["N"]) for r in decay}:
            chosen = [r for r in decay if int(r["N"]) == N]
            scale = float(chosen[0]["norm_full"])
            worst = max(worst, max(float(r["closure_residual"]) for r in chosen) / max(scale, 1e-300))
        check("decomposition_closure", worst <= 1e-8, f"worst closure / ||f|| = {worst:.2e}")

    uniform = art.rows("uniform.csv")
    if uniform:
        prefactors = [float(r["prefactor"]) for r in uniform if float(r["prefactor"]) > 0]
        spread = max(prefactors) / min(prefactors) if prefactors else math.inf
        check("uniform_prefactor_spread", spread <= 3.0, f"spread {spread:.3f}")
        large = [r for r in uniform if int(r["N"]) >= 16 and r["residual_exponent"]]
        if large:
            lowest = min(float(r["residual_exponent"]) for r in large)
            check("uniform_residual_exponent", lowest >= 0.70, f"lowest exponent {lowest:.3f}")
        eight = [r for r in uniform if int(r["N"]) == 8 and r["late_rate"]]
        if eight:
            late, target = float(eight[0]["late_rate"]), float(eight[0]["delta_N"])
            check("fixed_N_rate", abs(late - target) <= 0.25 * target, f"late {late:.4g} vs delta_8 {target:.4g}")

    exps = art.localized_exponents()
    if exps:
        k, r = exps.get("kernel"), exps.get("residual")
        check("localized_kernel_exponent", k is not None and k >= 0.20, f"{_fmt(k)}")
        check("localized_residual_exponent", r is not None and r >= 0.70, f"{_fmt(r)}")
    if art.has("whitham.csv"):
        w = art.whitham_exponent()
        check("whitham_exponent", w is not None and w >= 0.70, f"{_fmt(w)}")

    summary = art.sharpness()
    if summary is not None:
        sharp = art.rows("sharp.csv")
        plain = [float(r["normalized_const"]) for r in sharp if r["variant"] == "plain" and float(r["gap"]) > 0]
        ratio = max(plain) / min(plain) if plain else math.inf
        check("sharpness_plain_constant", ratio <= 5.0, f"max/min {ratio:.3f}")
        slopes = list(summary.slopes.get("plain", {}).values())
        check("sharpness_slope", bool(slopes) and all(abs(s + 1.0) <= 0.1 for s in slopes),
              f"slopes {[round(s, 3) for s in slopes]}")
        weighted = [float(r["normalized_const"]) for r in sharp if r["variant"] == "weighted"]
        check("sharpness_weighted_bounded", bool(weighted) and max(weighted) <= 1.0,
              f"sup gap N (1+t) = {max(weighted) if weighted else math.nan:.3g}")
        if summary.extended:
            check("sharpness_agreement", summary.min_agreement_digits >= 12.0,
                  f"{summary.min_agreement_digits:.1f} digits")
        u = summary.uniform
        check("uniform_bounds", math.isfinite(u.sup_plain) and math.isfinite(u.sup_weighted)
              and u.small_time_bound_ok, f"plain {u.sup_plain:.4g}, weighted {u.sup_weighted:.4g}")

    for c in checks:
        logger.info(f"{'✅' if c.passed else '❌'} {c.name}: {c.detail}")
    return checks
