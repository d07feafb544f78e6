"""Run configuration: strict TOML-subset parsing, units, canonical serialization.

Every dimensioned field must carry an explicit unit suffix ("20um", "1.39MHz");
bare numbers are rejected for such fields, unknown keys are rejected
everywhere, and defaults applied during parsing are recorded on the result.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, fields

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError, UnitError
from .quantities import CONSTANTS

COMMANDS = ("simulate", "buildup", "sweep-xb", "onset", "feasibility", "compare")

# Unit scale as a decimal exponent (int) keeps "20um" bit-identical to the
# literal 20e-6; non-decimal conversions (amu) carry a float factor instead.
LENGTH = {"m": 0, "cm": -2, "mm": -3, "um": -6, "µm": -6, "nm": -9, "pm": -12}
TIME = {"s": 0, "ms": -3, "us": -6, "µs": -6, "ns": -9}
FREQUENCY = {"Hz": 0, "kHz": 3, "MHz": 6, "GHz": 9}
ENERGY_EV = {"eV": 0, "keV": 3, "MeV": 6, "GeV": 9, "meV": -3, "ueV": -6, "neV": -9}
MASS = {"kg": 0, "g": -3, "amu": CONSTANTS.amu}
VELOCITY = {"m/s": 0, "mm/s": -3, "um/s": -6, "nm/s": -9}
ACCELERATION = {"m/s2": 0, "m/s^2": 0}

_QTY_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+))(?:[eE]([+-]?\d+))?\s*(\S+)\s*$")


def parse_quantity(raw, units: dict, key: str) -> float:
    """Parse '<number><unit>' into SI, naming the offending key on failure."""
    if not isinstance(raw, str):
        raise UnitError(
            f"field {key!r} must be a string with a unit suffix "
            f"(e.g. \"20um\"), got bare {raw!r}"
        )
    m = _QTY_RE.match(raw)
    if not m:
        raise UnitError(f"field {key!r}: cannot parse quantity {raw!r}")
    mantissa, exponent, suffix = m.groups()
    if suffix not in units:
        known = ", ".join(sorted(units))
        raise UnitError(f"field {key!r}: unknown unit {suffix!r} (expected one of: {known})")
    scale = units[suffix]
    if isinstance(scale, int):
        return float(f"{mantissa}e{int(exponent or 0) + scale}")
    return float(f"{mantissa}e{exponent or 0}") * scale


def _format_quantity(value: float, base_unit: str) -> str:
    return f"{value!r}{base_unit}"


def _check_keys(table: dict, allowed, section: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown key(s) in [{section}]: {', '.join(unknown)} "
            f"(allowed: {', '.join(sorted(allowed))})"
        )


def _get_str(table: dict, key: str, section: str, default=None, choices=None):
    if key not in table:
        return default
    v = table[key]
    if not isinstance(v, str):
        raise ConfigError(f"[{section}] {key} must be a string, got {v!r}")
    if choices and v not in choices:
        raise ConfigError(f"[{section}] {key} must be one of {choices}, got {v!r}")
    return v


def _get_number(table: dict, key: str, section: str, default=None):
    if key not in table:
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {v!r}")
    return float(v)


def _get_int(table: dict, key: str, section: str, default=None):
    if key not in table:
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"[{section}] {key} must be an integer, got {v!r}")
    return v


def _get_bool(table: dict, key: str, section: str, default=None):
    if key not in table:
        return default
    v = table[key]
    if not isinstance(v, bool):
        raise ConfigError(f"[{section}] {key} must be true or false, got {v!r}")
    return v


@dataclass(frozen=True)
class ScenarioConfig:
    species: str = "electron"
    wavelength: float = 1e-9
    slit_width: float = 20e-6
    distance: float = 1.0
    source: str = "wide"          # "wide" | "fine"
    beam_fwhm: float | None = None
    beam_offset: float = 0.0
    kernel: str = "auto"
    grid_n: int = 2 ** 16
    grid_spacing: float | None = None


@dataclass(frozen=True)
class ModelConfig:
    gain: float = 1.0
    width_factor: float = 1.0
    sign: int = -1
    mask: bool = True


@dataclass(frozen=True)
class SamplingConfig:
    n: int = 100_000
    seed: int = 0
    checkpoints: tuple[int, ...] = (10, 100, 1000, 10000)
    bins: int = 64


@dataclass(frozen=True)
class OnsetConfig:
    fresnel_min: float = 0.01
    fresnel_max: float = 10.0
    steps: int = 13


@dataclass(frozen=True)
class SweepConfig:
    steps: int = 9


@dataclass(frozen=True)
class DropConfig:
    species: str = "Ca+"
    drop_height: float = 1e-2
    slit_width: float = 200e-9
    radial_freq: float = 1.39e6
    axial_freq: float = 134e3
    beam_window: float = 2e-6
    lens_offset_max: float = 50e-6
    margin_factor: float = 100.0
    assumed_beam_width: float = 2e-9
    wavelength_margin: float = 10.0
    drift_budget: float = 2e-9


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json", "svg")


@dataclass(frozen=True)
class RunConfig:
    command: str | None = None
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    onset: OnsetConfig = field(default_factory=OnsetConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    drop: DropConfig = field(default_factory=DropConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    species_extra: tuple[tuple[str, float], ...] = ()  # (name, mass in kg)
    gravity: float = CONSTANTS.grav_g
    applied_defaults: tuple[str, ...] = field(default=(), compare=False)


_SCENARIO_KEYS = ("species", "wavelength", "slit_width", "distance", "source",
                  "beam_fwhm", "beam_offset", "kernel", "grid_n", "grid_spacing")
_MODEL_KEYS = ("gain", "width_factor", "sign", "mask")
_SAMPLING_KEYS = ("n", "seed", "checkpoints", "bins")
_ONSET_KEYS = ("fresnel_min", "fresnel_max", "steps")
_SWEEP_KEYS = ("steps",)
_DROP_KEYS = ("species", "drop_height", "slit_width", "radial_freq", "axial_freq",
              "beam_window", "lens_offset_max", "margin_factor",
              "assumed_beam_width", "wavelength_margin", "drift_budget")
_OUTPUT_KEYS = ("directory", "formats")
_TOP_KEYS = ("command", "scenario", "model", "sampling", "onset", "sweep",
             "drop", "output", "species", "constants")


def _record_defaults(section: str, table: dict, cfg, out: list[str]) -> None:
    for f in fields(cfg):
        if f.name not in table:
            out.append(f"{section}.{f.name}={getattr(cfg, f.name)!r}")


def _parse_scenario(table: dict, defaults: list[str]) -> ScenarioConfig:
    _check_keys(table, _SCENARIO_KEYS, "scenario")
    source = _get_str(table, "source", "scenario", default="wide",
                      choices=("wide", "fine"))
    beam_fwhm = None
    if "beam_fwhm" in table:
        beam_fwhm = parse_quantity(table["beam_fwhm"], LENGTH, "scenario.beam_fwhm")
    if source == "fine" and beam_fwhm is None:
        raise ConfigError("[scenario] fine source requires beam_fwhm")
    grid_spacing = None
    if "grid_spacing" in table:
        grid_spacing = parse_quantity(table["grid_spacing"], LENGTH, "scenario.grid_spacing")
    grid_n = _get_int(table, "grid_n", "scenario", default=ScenarioConfig.grid_n)
    if grid_n < 16 or (grid_n & (grid_n - 1)) != 0:
        raise ConfigError(f"[scenario] grid_n must be a power of two >= 16, got {grid_n}")
    cfg = ScenarioConfig(
        species=_get_str(table, "species", "scenario", default="electron"),
        wavelength=parse_quantity(table["wavelength"], LENGTH, "scenario.wavelength")
        if "wavelength" in table else ScenarioConfig.wavelength,
        slit_width=parse_quantity(table["slit_width"], LENGTH, "scenario.slit_width")
        if "slit_width" in table else ScenarioConfig.slit_width,
        distance=parse_quantity(table["distance"], LENGTH, "scenario.distance")
        if "distance" in table else ScenarioConfig.distance,
        source=source,
        beam_fwhm=beam_fwhm,
        beam_offset=parse_quantity(table["beam_offset"], LENGTH, "scenario.beam_offset")
        if "beam_offset" in table else 0.0,
        kernel=_get_str(table, "kernel", "scenario", default="auto",
                        choices=("auto", "paraxial", "exact")),
        grid_n=grid_n,
        grid_spacing=grid_spacing,
    )
    _record_defaults("scenario", table, cfg, defaults)
    return cfg


def _parse_model(table: dict, defaults: list[str]) -> ModelConfig:
    _check_keys(table, _MODEL_KEYS, "model")
    cfg = ModelConfig(
        gain=_get_number(table, "gain", "model", default=ModelConfig.gain),
        width_factor=_get_number(table, "width_factor", "model",
                                 default=ModelConfig.width_factor),
        sign=_get_int(table, "sign", "model", default=ModelConfig.sign),
        mask=_get_bool(table, "mask", "model", default=ModelConfig.mask),
    )
    if cfg.sign not in (-1, 1):
        raise ConfigError(f"[model] sign must be -1 or +1, got {cfg.sign}")
    _record_defaults("model", table, cfg, defaults)
    return cfg


def _parse_sampling(table: dict, defaults: list[str]) -> SamplingConfig:
    _check_keys(table, _SAMPLING_KEYS, "sampling")
    checkpoints = SamplingConfig.checkpoints
    if "checkpoints" in table:
        raw = table["checkpoints"]
        if (not isinstance(raw, list) or not raw
                or any(isinstance(c, bool) or not isinstance(c, int) for c in raw)):
            raise ConfigError("[sampling] checkpoints must be a nonempty integer array")
        checkpoints = tuple(raw)
    cfg = SamplingConfig(
        n=_get_int(table, "n", "sampling", default=SamplingConfig.n),
        seed=_get_int(table, "seed", "sampling", default=SamplingConfig.seed),
        checkpoints=checkpoints,
        bins=_get_int(table, "bins", "sampling", default=SamplingConfig.bins),
    )
    if cfg.seed < 0:
        raise ConfigError(f"[sampling] seed must be a nonnegative integer, got {cfg.seed}")
    if cfg.n < 0:
        raise ConfigError(f"[sampling] n must be nonnegative, got {cfg.n}")
    _record_defaults("sampling", table, cfg, defaults)
    return cfg


def _parse_onset(table: dict, defaults: list[str]) -> OnsetConfig:
    _check_keys(table, _ONSET_KEYS, "onset")
    cfg = OnsetConfig(
        fresnel_min=_get_number(table, "fresnel_min", "onset", default=OnsetConfig.fresnel_min),
        fresnel_max=_get_number(table, "fresnel_max", "onset", default=OnsetConfig.fresnel_max),
        steps=_get_int(table, "steps", "onset", default=OnsetConfig.steps),
    )
    if not (0 < cfg.fresnel_min <= 0.01):
        raise ConfigError("[onset] fresnel_min must lie in (0, 0.01]")
    if cfg.fresnel_max < 10.0:
        raise ConfigError("[onset] fresnel_max must be >= 10")
    if cfg.steps < 3:
        raise ConfigError("[onset] steps must be >= 3")
    _record_defaults("onset", table, cfg, defaults)
    return cfg


def _parse_sweep(table: dict, defaults: list[str]) -> SweepConfig:
    _check_keys(table, _SWEEP_KEYS, "sweep")
    cfg = SweepConfig(steps=_get_int(table, "steps", "sweep", default=SweepConfig.steps))
    if cfg.steps < 3:
        raise ConfigError("[sweep] steps must be >= 3")
    _record_defaults("sweep", table, cfg, defaults)
    return cfg


def _parse_drop(table: dict, defaults: list[str]) -> DropConfig:
    _check_keys(table, _DROP_KEYS, "drop")

    def qty(key, units, fallback):
        if key in table:
            return parse_quantity(table[key], units, f"drop.{key}")
        return fallback

    cfg = DropConfig(
        species=_get_str(table, "species", "drop", default=DropConfig.species),
        drop_height=qty("drop_height", LENGTH, DropConfig.drop_height),
        slit_width=qty("slit_width", LENGTH, DropConfig.slit_width),
        radial_freq=qty("radial_freq", FREQUENCY, DropConfig.radial_freq),
        axial_freq=qty("axial_freq", FREQUENCY, DropConfig.axial_freq),
        beam_window=qty("beam_window", LENGTH, DropConfig.beam_window),
        lens_offset_max=qty("lens_offset_max", LENGTH, DropConfig.lens_offset_max),
        margin_factor=_get_number(table, "margin_factor", "drop",
                                  default=DropConfig.margin_factor),
        assumed_beam_width=qty("assumed_beam_width", LENGTH, DropConfig.assumed_beam_width),
        wavelength_margin=_get_number(table, "wavelength_margin", "drop",
                                      default=DropConfig.wavelength_margin),
        drift_budget=qty("drift_budget", LENGTH, DropConfig.drift_budget),
    )
    _record_defaults("drop", table, cfg, defaults)
    return cfg


def _parse_output(table: dict, defaults: list[str]) -> OutputConfig:
    _check_keys(table, _OUTPUT_KEYS, "output")
    formats = OutputConfig.formats
    if "formats" in table:
        raw = table["formats"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("[output] formats must be a nonempty string array")
        bad = [f for f in raw if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"[output] unknown format(s): {bad}")
        formats = tuple(raw)
    cfg = OutputConfig(
        directory=_get_str(table, "directory", "output", default=OutputConfig.directory),
        formats=formats,
    )
    _record_defaults("output", table, cfg, defaults)
    return cfg


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a configuration document.

    Parameters
    ----------
    text : str
        TOML-subset source (tables, strings, numbers, arrays).
    command : str, optional
        Command selected on the command line; must agree with the document's
        own ``command`` key when both are present.

    Raises
    ------
    ConfigError
        Malformed document (with line/column from the parser), unknown key,
        or invalid value.
    UnitError
        Dimensioned field without a valid unit suffix.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    _check_keys(doc, _TOP_KEYS, "top level")
    doc_command = _get_str(doc, "command", "top level", default=None, choices=COMMANDS)
    if command is not None and doc_command is not None and command != doc_command:
        raise ConfigError(
            f"config declares command {doc_command!r} but {command!r} was requested"
        )
    effective = command or doc_command

    defaults: list[str] = []
    scenario = _parse_scenario(doc.get("scenario", {}), defaults)
    model = _parse_model(doc.get("model", {}), defaults)
    sampling = _parse_sampling(doc.get("sampling", {}), defaults)
    onset = _parse_onset(doc.get("onset", {}), defaults)
    sweep = _parse_sweep(doc.get("sweep", {}), defaults)
    drop = _parse_drop(doc.get("drop", {}), defaults)
    output = _parse_output(doc.get("output", {}), defaults)

    extra = []
    for name, raw in doc.get("species", {}).items():
        extra.append((name, parse_quantity(raw, MASS, f"species.{name}")))

    gravity = CONSTANTS.grav_g
    if "constants" in doc:
        _check_keys(doc["constants"], ("gravity",), "constants")
        if "gravity" in doc["constants"]:
            gravity = parse_quantity(doc["constants"]["gravity"], ACCELERATION,
                                     "constants.gravity")

    cfg = RunConfig(command=effective, scenario=scenario, model=model,
                    sampling=sampling, onset=onset, sweep=sweep, drop=drop,
                    output=output, species_extra=tuple(extra), gravity=gravity,
                    applied_defaults=tuple(sorted(defaults)))
    if effective is not None:
        validate_for_command(cfg)
    return cfg


def validate_for_command(config: RunConfig) -> None:
    """Cross-field requirements that depend on the selected command."""
    cmd = config.command
    if cmd is None:
        raise ConfigError("no command selected")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    if cmd in ("sweep-xb", "compare") and config.scenario.source != "fine":
        raise ConfigError(f"command {cmd!r} requires a fine source "
                          "(set [scenario] source = \"fine\" and beam_fwhm)")


def serialize_config(config: RunConfig) -> str:
    """Canonical document for digesting and round-tripping.

    All fields are written explicitly in fixed order with SI-unit suffixes,
    so re-parsing reproduces an equal RunConfig.
    """
    s, m, sa, on, sw, d, o = (config.scenario, config.model, config.sampling,
                              config.onset, config.sweep, config.drop, config.output)
    lines = []
    if config.command is not None:
        lines.append(f'command = "{config.command}"')
        lines.append("")
    lines += [
        "[scenario]",
        f'species = "{s.species}"',
        f'wavelength = "{_format_quantity(s.wavelength, "m")}"',
        f'slit_width = "{_format_quantity(s.slit_width, "m")}"',
        f'distance = "{_format_quantity(s.distance, "m")}"',
        f'source = "{s.source}"',
    ]
    if s.beam_fwhm is not None:
        lines.append(f'beam_fwhm = "{_format_quantity(s.beam_fwhm, "m")}"')
    lines += [
        f'beam_offset = "{_format_quantity(s.beam_offset, "m")}"',
        f'kernel = "{s.kernel}"',
        f"grid_n = {s.grid_n}",
    ]
    if s.grid_spacing is not None:
        lines.append(f'grid_spacing = "{_format_quantity(s.grid_spacing, "m")}"')
    lines += [
        "",
        "[model]",
        f"gain = {m.gain!r}",
        f"width_factor = {m.width_factor!r}",
        f"sign = {m.sign}",
        f"mask = {'true' if m.mask else 'false'}",
        "",
        "[sampling]",
        f"n = {sa.n}",
        f"seed = {sa.seed}",
        f"checkpoints = [{', '.join(str(c) for c in sa.checkpoints)}]",
        f"bins = {sa.bins}",
        "",
        "[onset]",
        f"fresnel_min = {on.fresnel_min!r}",
        f"fresnel_max = {on.fresnel_max!r}",
        f"steps = {on.steps}",
        "",
        "[sweep]",
        f"steps = {sw.steps}",
        "",
        "[drop]",
        f'species = "{d.species}"',
        f'drop_height = "{_format_quantity(d.drop_height, "m")}"',
        f'slit_width = "{_format_quantity(d.slit_width, "m")}"',
        f'radial_freq = "{_format_quantity(d.radial_freq, "Hz")}"',
        f'axial_freq = "{_format_quantity(d.axial_freq, "Hz")}"',
        f'beam_window = "{_format_quantity(d.beam_window, "m")}"',
        f'lens_offset_max = "{_format_quantity(d.lens_offset_max, "m")}"',
        f"margin_factor = {d.margin_factor!r}",
        f'assumed_beam_width = "{_format_quantity(d.assumed_beam_width, "m")}"',
        f"wavelength_margin = {d.wavelength_margin!r}",
        f'drift_budget = "{_format_quantity(d.drift_budget, "m")}"',
        "",
        "[output]",
        f'directory = "{o.directory}"',
        f"formats = [{', '.join(repr(f) for f in o.formats)}]".replace("'", '"'),
        "",
        "[constants]",
        f'gravity = "{_format_quantity(config.gravity, "m/s2")}"',
    ]
    if config.species_extra:
        lines += ["", "[species]"]
        for name, mass in config.species_extra:
            lines.append(f'"{name}" = "{_format_quantity(mass, "kg")}"')
    return "\n".join(lines) + "\n"


def config_digest(config: RunConfig) -> str:
    """sha256 over the canonical serialization."""
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()
