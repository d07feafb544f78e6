"""Command pipelines: dispatch, deterministic file emission, run manifests.

Every run writes its outputs into one directory and finishes with a
manifest.json listing content digests, so identical (config, seed, version)
reproduce identical CSV/JSON bytes. Failures retain partial outputs and a
manifest marking the failing stage.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_digest, serialize_config
from .errors import NotApplicableError, PipelineError
from .feasibility import DropScenario, evaluate_scenario, render_report
from .detector import build_up, sample_hits
from .models import (
    DeflectionModel,
    Scenario,
    fringe_onset_sweep,
    h1_screen_grid,
    predict_H0,
    predict_H1,
    sweep_xb,
    uncertainty_product,
)
from .patterns import IntensityProfile
from .plotting import (
    plot_buildup_checkpoint,
    plot_onset,
    plot_profiles,
    plot_sweep,
)
from .quantities import CONSTANTS, make_species, species_lookup
from .wavefield import FINE, WIDE, Grid1D, SourceSpec


def format_float(v: float) -> str:
    """Fixed CSV float format: scientific, 12 significant digits, '.' decimal."""
    return f"{v:.11e}"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    if v is None:
        return ""
    return str(v).replace(",", ";").replace("\n", " ")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    tool_version: str
    seed: int
    algorithm: str
    outputs: tuple[tuple[str, str], ...]  # (filename, digest)
    wall_time_s: float
    status: str = "ok"
    failed_stage: str | None = None
    error: str | None = None
    warnings: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "error": self.error,
            "outputs": [{"file": f, "sha256": d} for f, d in self.outputs],
            "warnings": list(self.warnings),
            "wall_time_s": self.wall_time_s,
        }


class _RunContext:
    """Collects outputs under one directory and tracks the current stage."""

    def __init__(self, out_dir: Path, formats: tuple[str, ...]):
        self.out_dir = out_dir
        self.formats = formats
        self.outputs: list[tuple[str, str]] = []
        self.warnings: list[str] = []
        self.stage = "configure"

    def _register(self, name: str, data: bytes) -> None:
        path = self.out_dir / name
        if self.out_dir.resolve() not in path.resolve().parents:
            raise ValueError(f"output {name!r} escapes the output directory")
        path.write_bytes(data)
        self.outputs.append((name, sha256_bytes(data)))

    def write_text(self, name: str, text: str) -> None:
        self._register(name, text.encode("utf-8"))

    def write_csv(self, name: str, header: list[str], rows) -> None:
        if "csv" not in self.formats:
            return
        lines = [",".join(header)]
        lines += [",".join(_cell(v) for v in row) for row in rows]
        self.write_text(name, "\n".join(lines) + "\n")

    def write_json(self, name: str, obj) -> None:
        if "json" not in self.formats:
            return
        self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def write_plot(self, name: str, render) -> None:
        if "svg" not in self.formats:
            return
        path = self.out_dir / name
        warning = render(path)
        if warning:
            self.warnings.append(warning)
        elif path.exists():
            self.outputs.append((name, sha256_bytes(path.read_bytes())))


def build_scenario(config: RunConfig) -> Scenario:
    extra = {name: make_species(name, mass) for name, mass in config.species_extra}
    species = species_lookup(config.scenario.species, extra)
    sc = config.scenario
    if sc.source == "fine":
        source = SourceSpec(kind=FINE, b=sc.beam_fwhm, x_b=sc.beam_offset)
    else:
        source = SourceSpec(kind=WIDE)
    grid = None
    if sc.grid_spacing is not None:
        grid = Grid1D(n_samples=sc.grid_n, spacing=sc.grid_spacing)
    return Scenario(species=species, wavelength=sc.wavelength, slit_width=sc.slit_width,
                    distance=sc.distance, source=source, grid=grid, kernel=sc.kernel,
                    grid_n=sc.grid_n)


def build_drop_scenario(config: RunConfig) -> DropScenario:
    extra = {name: make_species(name, mass) for name, mass in config.species_extra}
    d = config.drop
    return DropScenario(
        species=species_lookup(d.species, extra),
        drop_height=d.drop_height, slit_width=d.slit_width,
        radial_freq=d.radial_freq, axial_freq=d.axial_freq,
        beam_window=d.beam_window, lens_offset_max=d.lens_offset_max,
        margin_factor=d.margin_factor, assumed_beam_width=d.assumed_beam_width,
        wavelength_margin=d.wavelength_margin, drift_budget=d.drift_budget,
    )


def _profile_rows(profile: IntensityProfile):
    return zip(profile.x, profile.values)


def profile_csv(profile: IntensityProfile) -> str:
    """Delimited export of an intensity profile (columns x_m, intensity)."""
    lines = ["x_m,intensity"]
    lines += [f"{_cell(x)},{_cell(v)}" for x, v in _profile_rows(profile)]
    return "\n".join(lines) + "\n"


def field_csv(field) -> str:
    """Delimited export of a complex field (columns x_m, re, im)."""
    lines = ["x_m,re,im"]
    for x, a in zip(field.grid.coordinates(), field.amplitudes):
        lines.append(f"{_cell(x)},{_cell(a.real)},{_cell(a.imag)}")
    return "\n".join(lines) + "\n"


def _run_simulate(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_scenario(config)
    ctx.stage = "predict"
    pred = predict_H0(scenario)
    ctx.warnings.extend(pred.warnings)
    ctx.stage = "write"
    ctx.write_csv("profile.csv", ["x_m", "intensity"], _profile_rows(pred.profile))
    ctx.write_json("features.json", pred.features.to_json_dict())
    ctx.write_plot("plot.svg", lambda p: plot_profiles(
        [("H0", pred.profile)], p, features=pred.features,
        title=f"{scenario.species.name}: slit {scenario.slit_width:g} m at L = {scenario.distance:g} m"))


def _run_buildup(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_scenario(config)
    sampling = config.sampling
    ctx.stage = "predict"
    pred = predict_H0(scenario)
    ctx.warnings.extend(pred.warnings)
    ctx.stage = "sample"
    events = sample_hits(pred.profile, max(sampling.checkpoints), sampling.seed)
    result = build_up(pred.profile, sampling.checkpoints, sampling.bins, sampling.seed)
    ctx.stage = "write"
    ctx.write_csv("events.csv", ["index", "x_m"], enumerate(events))
    ctx.write_json("buildup.json", result.to_json_dict())
    for i, count in enumerate(result.checkpoints):
        ctx.write_plot(f"buildup_{count:08d}.svg",
                       lambda p, i=i: plot_buildup_checkpoint(result, i, p))


def _run_sweep(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_scenario(config)
    model = DeflectionModel(gain=config.model.gain, width_factor=config.model.width_factor,
                            sign=config.model.sign, mask_enabled=config.model.mask)
    ctx.stage = "sweep"
    steps = sweep_xb(scenario, model, config.sweep.steps)
    ctx.stage = "write"
    index_rows = []
    for i, step in enumerate(steps):
        name = f"step_{i:02d}.csv"
        ctx.write_csv(name, ["x_m", "intensity"], _profile_rows(step.prediction.profile))
        index_rows.append((i, step.x_b, step.prediction.x_p, step.prediction.d,
                           step.modes, name))
        ctx.warnings.extend(step.prediction.warnings)
    ctx.write_csv("index.csv",
                  ["step", "x_b_m", "x_p_m", "d_m", "mode_count", "profile_csv"],
                  index_rows)
    ctx.write_plot("plot.svg", lambda p: plot_sweep(steps, p, title="beam-offset sweep"))


def _run_onset(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_scenario(config)
    on = config.onset
    n_f = np.geomspace(on.fresnel_min, on.fresnel_max, on.steps)
    distances = scenario.slit_width ** 2 / (4.0 * scenario.wavelength * n_f)
    ctx.stage = "sweep"
    rows = fringe_onset_sweep(scenario, distances)
    ctx.stage = "write"
    ctx.write_csv("onset.csv",
                  ["distance_m", "fresnel_number", "visibility", "flagged", "error"],
                  ((r.distance, r.fresnel_number, r.visibility, r.flagged, r.error)
                   for r in rows))
    ctx.write_plot("plot.svg", lambda p: plot_onset(rows, p))


def _run_feasibility(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_drop_scenario(config)
    constants = CONSTANTS.with_gravity(config.gravity)
    ctx.stage = "evaluate"
    report = evaluate_scenario(scenario, constants)
    ctx.stage = "write"
    ctx.write_json("report.json", report.to_json_dict())
    ctx.write_text("report.txt", render_report(report))


def _run_compare(config: RunConfig, ctx: _RunContext) -> None:
    ctx.stage = "configure"
    scenario = build_scenario(config)
    model = DeflectionModel(gain=config.model.gain, width_factor=config.model.width_factor,
                            sign=config.model.sign, mask_enabled=config.model.mask)
    ctx.stage = "predict"
    h0 = predict_H0(scenario)
    # widen the comparison window to the H0 pattern when it spills past 8 periods
    b = scenario.source.b
    extent = min(2.0 * scenario.wavelength * scenario.distance / b, 4.0 * scenario.distance)
    periods = max(8, min(512, int(np.ceil(1.2 * extent / scenario.fringe_period))))
    grid = h1_screen_grid(scenario, periods=periods)
    h1 = predict_H1(scenario, model, grid=grid)
    ctx.warnings.extend(h0.warnings + h1.warnings)

    ctx.stage = "analyze"
    x = h1.profile.x
    h0_interp = np.maximum(np.interp(x, h0.profile.x, h0.profile.values), 0.0)
    h0_win = IntensityProfile(x, h0_interp).normalize()
    diff_l2 = float(np.linalg.norm(h0_win.values - h1.profile.values)
                    / np.linalg.norm(h0_win.values))
    metrics = {
        "relative_l2_difference": diff_l2,
        "h1_x_p_m": h1.x_p,
        "h1_d_m": h1.d,
        "fringe_period_m": scenario.fringe_period,
        "fresnel_number": scenario.fresnel_number,
    }
    try:
        metrics["uncertainty_ratio_h1"] = uncertainty_product(h1, scenario)
    except NotApplicableError:
        metrics["uncertainty_ratio_h1"] = None
    try:
        metrics["uncertainty_ratio_h0"] = uncertainty_product(h0, scenario)
    except NotApplicableError:
        metrics["uncertainty_ratio_h0"] = None

    ctx.stage = "write"
    ctx.write_csv("compare.csv", ["x_m", "h0_intensity", "h1_intensity"],
                  zip(x, h0_win.values, h1.profile.values))
    ctx.write_json("metrics.json", metrics)
    ctx.write_json("features_h0.json", h0.features.to_json_dict())
    ctx.write_json("features_h1.json", h1.features.to_json_dict())
    ctx.write_plot("plot.svg", lambda p: plot_profiles(
        [("H0 (wave)", h0_win), ("H1 (deflection)", h1.profile)], p,
        features=h1.features, title="wave vs deflection prediction"))


_PIPELINES = {
    "simulate": _run_simulate,
    "buildup": _run_buildup,
    "sweep-xb": _run_sweep,
    "onset": _run_onset,
    "feasibility": _run_feasibility,
    "compare": _run_compare,
}


def run(config: RunConfig, out_dir: str | Path | None = None,
        seed: int | None = None) -> RunManifest:
    """Execute the configured command and write its outputs plus manifest.

    Parameters
    ----------
    config : RunConfig
        Parsed, validated configuration including the command.
    out_dir : path, optional
        Overrides the configured output directory.
    seed : int, optional
        Overrides the sampling seed (recorded in the effective config).

    Raises
    ------
    PipelineError
        On failure, after retaining partial outputs and a failure manifest.
    """
    if seed is not None:
        config = dataclasses.replace(
            config, sampling=dataclasses.replace(config.sampling, seed=seed))
    if config.command not in _PIPELINES:
        raise PipelineError("configure", f"unknown command {config.command!r}")

    out = Path(out_dir) if out_dir is not None else Path(config.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    ctx = _RunContext(out, config.output.formats)
    digest = config_digest(config)
    started = time.monotonic()

    def manifest(status: str, failed_stage=None, error=None) -> RunManifest:
        m = RunManifest(
            config_digest=digest, tool_version=__version__,
            seed=config.sampling.seed, algorithm="sha256",
            outputs=tuple(ctx.outputs), wall_time_s=time.monotonic() - started,
            status=status, failed_stage=failed_stage, error=error,
            warnings=tuple(ctx.warnings),
        )
        # manifest.json is always written, and always written last
        (out / "manifest.json").write_bytes(
            (json.dumps(m.to_json_dict(), indent=2, sort_keys=True) + "\n").encode())
        return m

    try:
        ctx.write_text("config.resolved.toml", serialize_config(config))
        _PIPELINES[config.command](config, ctx)
    except Exception as exc:
        manifest("failed", failed_stage=ctx.stage, error=f"{type(exc).__name__}: {exc}")
        raise PipelineError(ctx.stage, str(exc)) from exc
    return manifest("ok")
