"""Screen-density predictions under two competing models, plus diagnostics.

H0 is standard scalar wave propagation through the slit. H1 is a parametric
deterministic-deflection family: a beam entering at offset x_b exits toward
a single screen coordinate x_p via an odd, strictly monotone linear map,
with a line width d proportional to the beam FWHM, multiplied by the fringe
mask of the wide-beam pattern so the density vanishes at every interference
minimum. The family's gain, width factor and sign are explicit parameters;
the defaults map the slit edges onto the first secondary maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelBoundError, NotApplicableError, ResolutionError
from .patterns import (
    IntensityProfile,
    PatternFeatures,
    _interior_extrema,
    envelope,
    find_extrema,
    fringe_mask,
    visibility,
)
from .quantities import CONSTANTS, Species, species_lookup
from .wavefield import (
    FINE,
    Grid1D,
    SourceSpec,
    design_grid,
    fraunhofer_profile,
    intensity_of,
    make_slit_field,
    propagate,
    validate_grid,
)

# Endpoint of the default deflection map, in fringe periods: x_b = +-slit/2
# lands on the first secondary maximum of sinc^2 at -+1.43 * lambda*L/slit.
SECONDARY_MAX_PERIODS = 1.43
_MAP_SLOPE = 2.0 * SECONDARY_MAX_PERIODS  # 2.86

_FWHM_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class Scenario:
    """Experiment geometry: species, wavelength, slit, screen distance, source.

    ``grid`` may be None, in which case propagation designs one on demand
    (``grid_n`` samples, sizing rule applied).
    """

    species: Species = field(default_factory=lambda: species_lookup("electron"))
    wavelength: float = 1e-9
    slit_width: float = 20e-6
    distance: float = 1.0
    source: SourceSpec = field(default_factory=SourceSpec)
    grid: Grid1D | None = None
    kernel: str = "auto"
    grid_n: int = 2 ** 16

    def __post_init__(self):
        for name, v in (("wavelength", self.wavelength), ("slit_width", self.slit_width),
                        ("distance", self.distance)):
            if v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.kernel not in ("auto", "paraxial", "exact"):
            raise ValueError(f"kernel must be auto, paraxial or exact, got {self.kernel!r}")

    @property
    def fresnel_number(self) -> float:
        return self.slit_width ** 2 / (4.0 * self.wavelength * self.distance)

    @property
    def momentum(self) -> float:
        """|p| = h/lambda, unchanged by the slit passage."""
        return CONSTANTS.planck_h / self.wavelength

    @property
    def fringe_period(self) -> float:
        return self.wavelength * self.distance / self.slit_width

    def resolved_kernel(self) -> str:
        if self.kernel != "auto":
            return self.kernel
        return "exact" if self.source.is_fine else "paraxial"


@dataclass(frozen=True)
class DeflectionModel:
    """Parameters of the deterministic-deflection family.

    gain scales the odd linear map x_b -> x_p (gain=1 puts the slit edge on
    the first secondary maximum); width_factor scales the line width
    d = width_factor * |map slope| * b; sign picks the deflection direction;
    mask_enabled multiplies in the wide-beam fringe mask.
    """

    gain: float = 1.0
    width_factor: float = 1.0
    sign: int = -1
    mask_enabled: bool = True

    def __post_init__(self):
        if self.gain == 0:
            raise ValueError("gain must be nonzero (map must stay strictly monotone)")
        if self.width_factor < 0:
            raise ValueError("width_factor must be nonnegative")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class Prediction:
    """A predicted screen density with its extracted features and provenance."""

    profile: IntensityProfile
    features: PatternFeatures
    model_id: str  # "H0" | "H1"
    x_p: float | None = None
    d: float | None = None
    warnings: tuple = ()


def deflection_map(scenario: Scenario, model: DeflectionModel, x_b: float) -> float:
    """Screen coordinate x_p for beam offset x_b: odd, strictly monotone."""
    slope = model.sign * model.gain * _MAP_SLOPE * scenario.wavelength * scenario.distance \
        / scenario.slit_width ** 2
    return slope * x_b


def line_width(scenario: Scenario, model: DeflectionModel, b: float) -> float:
    """Predicted line FWHM d: zero at b = 0, non-decreasing in b."""
    slope = abs(_MAP_SLOPE * model.gain * scenario.wavelength * scenario.distance
                / scenario.slit_width ** 2)
    return model.width_factor * slope * b


def h1_screen_grid(scenario: Scenario, periods: int = 8, per_period: int = 64) -> Grid1D:
    """Screen grid aligned so every fringe zero z_k falls on a sample."""
    spacing = scenario.fringe_period / per_period
    n = 16
    while n < periods * per_period:
        n *= 2
    return Grid1D(n_samples=n, spacing=spacing)


def _h1_mask(scenario: Scenario, grid: Grid1D) -> np.ndarray:
    curve_a = fraunhofer_profile(scenario.slit_width, scenario.wavelength,
                                 scenario.distance, grid)
    env = envelope(curve_a, scenario.fringe_period)
    return fringe_mask(curve_a, env)


def predict_H1(scenario: Scenario, model: DeflectionModel,
               grid: Grid1D | None = None) -> Prediction:
    """Deflection-model density: Gaussian line at x_p, fringe-masked.

    Requires a fine source. The candidate width d must stay below one fringe
    period lambda*L/slit (the narrow-line bound); wider candidates are a
    model violation, not a numerical issue.
    """
    if not scenario.source.is_fine:
        raise NotApplicableError("deflection model applies to fine sources only")
    b = float(scenario.source.b)
    x_b = float(scenario.source.x_b)

    x_p = deflection_map(scenario, model, x_b)
    d = line_width(scenario, model, b)
    period = scenario.fringe_period
    if d >= period:
        raise ModelBoundError(
            f"line width d={d:.3g} m reaches the fringe width {period:.3g} m; "
            "the model family requires d < lambda*L/slit"
        )

    grid = grid or h1_screen_grid(scenario)
    x = grid.coordinates()
    warnings: tuple = ()
    d_eff = d
    floor = 2.0 * grid.spacing
    if d_eff < floor:
        d_eff = floor
        warnings += (f"line width {d:.3g} m below resolution; rendered at {floor:.3g} m",)

    sigma = d_eff / _FWHM_SIGMA
    density = np.exp(-((x - x_p) ** 2) / (2.0 * sigma ** 2))
    if model.mask_enabled:
        density = density * _h1_mask(scenario, grid)
    profile = IntensityProfile(x, density).normalize()
    features = find_extrema(profile)
    return Prediction(profile=profile, features=features, model_id="H1",
                      x_p=x_p, d=d, warnings=warnings)


def predict_H0(scenario: Scenario) -> Prediction:
    """Standard wave prediction: slit field, free-space propagation, intensity.

    Wide sources in the far field reproduce the fringed sinc^2 pattern; fine
    sources give the broad single-hump pattern of width ~2*lambda*L/b that
    standard theory predicts (and that the deflection model contradicts).
    """
    beam = scenario.source.b if scenario.source.is_fine else None
    grid = scenario.grid or design_grid(scenario.slit_width, scenario.wavelength,
                                        scenario.distance, beam_fwhm=beam,
                                        n_samples=scenario.grid_n)
    validate_grid(grid, scenario.slit_width, scenario.wavelength, scenario.distance, beam)

    fld = make_slit_field(scenario.source, scenario.slit_width, grid, scenario.wavelength)
    fld = propagate(fld, scenario.distance, kernel=scenario.resolved_kernel())
    profile = intensity_of(fld)
    features = find_extrema(profile)

    vis_map = dict(features.visibility)
    if features.width is not None:
        p = scenario.fringe_period
        try:
            vis_map["first_fringe"] = visibility(profile, (-0.05 * p, 1.15 * p))
        except (NotApplicableError, ResolutionError):
            pass
    features = PatternFeatures(minima=features.minima, maxima=features.maxima,
                               width=features.width, fringe_period=scenario.fringe_period,
                               visibility=vis_map)
    return Prediction(profile=profile, features=features, model_id="H0",
                      warnings=fld.warnings)


def mode_count(profile: IntensityProfile, rel_threshold: float = 0.1) -> int:
    """Number of local maxima above ``rel_threshold`` of the global peak."""
    _, max_idx = _interior_extrema(profile.values)
    peak = profile.values.max()
    return int(sum(profile.values[i] > rel_threshold * peak for i in max_idx))


@dataclass(frozen=True)
class SweepStep:
    x_b: float
    prediction: Prediction
    modes: int


def sweep_xb(scenario: Scenario, model: DeflectionModel, steps: int) -> list[SweepStep]:
    """Deflection-model predictions for x_b swept uniformly over [0, slit/2].

    Step metadata records the mode count (maxima above 10% of peak); for the
    default model the sequence reads single peak, split at the crossing of
    the first minimum, single peak at the secondary maximum.
    """
    if steps < 3:
        raise ValueError(f"sweep needs at least 3 steps, got {steps}")
    grid = h1_screen_grid(scenario)
    out = []
    for x_b in np.linspace(0.0, scenario.slit_width / 2.0, steps):
        scen = Scenario(species=scenario.species, wavelength=scenario.wavelength,
                        slit_width=scenario.slit_width, distance=scenario.distance,
                        source=SourceSpec(kind=FINE, b=scenario.source.b, x_b=float(x_b)),
                        grid=scenario.grid, kernel=scenario.kernel, grid_n=scenario.grid_n)
        pred = predict_H1(scen, model, grid=grid)
        out.append(SweepStep(x_b=float(x_b), prediction=pred,
                             modes=mode_count(pred.profile)))
    return out


def uncertainty_product(prediction: Prediction, scenario: Scenario) -> float:
    """(slit_width * delta_p) / h with delta_p = p * half_width / L.

    The half width is W/2 for fringed wide-beam patterns and d/2 for the
    deflection model; algebraically the ratio reduces to W_measured/W_eq2
    for H0 and to d/W for H1.
    """
    if prediction.model_id == "H1":
        if prediction.d is None:
            raise NotApplicableError("H1 prediction carries no line width")
        half = prediction.d / 2.0
    else:
        if prediction.features.width is None:
            raise NotApplicableError("no measurable width W on this prediction")
        half = prediction.features.width / 2.0
    delta_p = scenario.momentum * half / scenario.distance
    return scenario.slit_width * delta_p / CONSTANTS.planck_h


@dataclass(frozen=True)
class OnsetRow:
    distance: float
    fresnel_number: float
    visibility: float | None
    flagged: bool
    error: str | None = None


def fringe_onset_sweep(scenario: Scenario, L_values, onset_threshold: float = 0.5,
                       grid_n_max: int = 2 ** 18) -> list[OnsetRow]:
    """Wide-beam visibility versus screen distance, far field to near field.

    ``L_values`` must decrease strictly and span Fresnel numbers from <= 0.01
    up to >= 10. Rows where the first-fringe visibility drops below the onset
    threshold are flagged; per-row failures are recorded and the sweep
    continues.
    """
    L_values = [float(L) for L in L_values]
    if any(b >= a for a, b in zip(L_values, L_values[1:])):
        raise ValueError("L values must be strictly decreasing")
    dx, lam = scenario.slit_width, scenario.wavelength
    nf = [dx ** 2 / (4.0 * lam * L) for L in L_values]
    if nf[0] > 0.01 * (1 + 1e-9) or nf[-1] < 10.0 * (1 - 1e-9):
        raise ValueError(
            f"sweep must span N_F from <= 0.01 to >= 10, got [{nf[0]:.3g}, {nf[-1]:.3g}]"
        )

    rows = []
    for L, n_f in zip(L_values, nf):
        try:
            # near-field ripples live on the sqrt(lambda*L) scale; resolve them
            spacing = min(dx / 64.0, math.sqrt(lam * L) / 8.0)
            required = max(8.0 * dx, 4.0 * 2.0 * lam * L / dx, 256 * spacing)
            n = 256
            while n * spacing < required and n < grid_n_max:
                n *= 2
            grid = Grid1D(n_samples=n, spacing=spacing)
            fld = make_slit_field(SourceSpec(kind="wide-plane-wave"), dx, grid, lam)
            fld = propagate(fld, L, kernel="exact")
            profile = intensity_of(fld)
            if not np.all(np.isfinite(profile.values)):
                raise FloatingPointError("non-finite intensity")
            p = lam * L / dx
            try:
                vis = visibility(profile, (-0.05 * p, 1.15 * p))
            except NotApplicableError:
                vis = 0.0  # no structure left in the fringe region: fringes gone
            rows.append(OnsetRow(distance=L, fresnel_number=n_f, visibility=vis,
                                 flagged=vis < onset_threshold))
        except Exception as exc:  # row-level failure; sweep continues
            rows.append(OnsetRow(distance=L, fresnel_number=n_f, visibility=None,
                                 flagged=True, error=f"{type(exc).__name__}: {exc}"))
    return rows


def ensemble_consistency(scenario: Scenario, model: DeflectionModel, steps: int) -> float:
    """Relative L2 distance between the x_b-averaged H1 density and the
    H0 wide-beam profile, over the H1 screen window. Reported, not asserted:
    a mixture of deflection lines need not reproduce the wave pattern."""
    if steps < 16:
        raise ValueError(f"ensemble average needs at least 16 steps, got {steps}")
    grid = h1_screen_grid(scenario)
    x = grid.coordinates()
    acc = np.zeros_like(x)
    for x_b in np.linspace(-scenario.slit_width / 2.0, scenario.slit_width / 2.0, steps):
        scen = Scenario(species=scenario.species, wavelength=scenario.wavelength,
                        slit_width=scenario.slit_width, distance=scenario.distance,
                        source=SourceSpec(kind=FINE, b=scenario.source.b, x_b=float(x_b)),
                        kernel=scenario.kernel, grid_n=scenario.grid_n)
        acc += predict_H1(scen, model, grid=grid).profile.values
    mixture = IntensityProfile(x, acc).normalize()

    wide = Scenario(species=scenario.species, wavelength=scenario.wavelength,
                    slit_width=scenario.slit_width, distance=scenario.distance,
                    source=SourceSpec(kind="wide-plane-wave"), kernel="paraxial",
                    grid_n=scenario.grid_n)
    h0 = predict_H0(wide)
    h0_vals = np.interp(x, h0.profile.x, h0.profile.values)
    h0_win = IntensityProfile(x, np.maximum(h0_vals, 0.0)).normalize()

    num = np.linalg.norm(mixture.values - h0_win.values)
    den = np.linalg.norm(h0_win.values)
    return float(num / den)
