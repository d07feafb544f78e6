"""1-D complex wave amplitudes: slit/source construction and free-space propagation.

Propagation is the angular-spectrum (transfer-function) method on a fixed
uniform grid: the spatial spectrum is multiplied by either a paraxial
quadratic-phase kernel (unit modulus, exactly norm conserving) or the
non-paraxial kernel with evanescent components attenuated. Phases are
accumulated relative to the on-axis plane wave so that huge L/lambda
ratios do not lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import EmptyFieldError, GridTooSmallError
from .patterns import IntensityProfile, PatternFeatures

WIDE = "wide-plane-wave"
FINE = "fine-gaussian"

# Gaussian FWHM = _FWHM_SIGMA * (std of the intensity)
_FWHM_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class Grid1D:
    """Uniform sampling of the transverse axis.

    The middle sample (index n/2) sits exactly at ``center`` so symmetric
    apertures and symmetric coordinates stay exactly representable.
    """

    n_samples: int
    spacing: float
    center: float = 0.0

    def __post_init__(self):
        n = self.n_samples
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"n_samples must be a power of two >= 16, got {n}")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"spacing must be positive and finite, got {self.spacing}")
        if not math.isfinite(self.n_samples * self.spacing):
            raise ValueError("grid span overflows")

    @property
    def span(self) -> float:
        return self.n_samples * self.spacing

    def coordinates(self) -> np.ndarray:
        return (np.arange(self.n_samples) - self.n_samples // 2) * self.spacing + self.center


@dataclass(frozen=True)
class SourceSpec:
    """Incident beam: an effectively infinite plane wave, or a narrow
    Gaussian of intensity FWHM ``b`` centered at offset ``x_b``."""

    kind: str = WIDE
    b: float | None = None
    x_b: float = 0.0

    def __post_init__(self):
        if self.kind not in (WIDE, FINE):
            raise ValueError(f"source kind must be {WIDE!r} or {FINE!r}, got {self.kind!r}")
        if self.kind == FINE:
            if self.b is None or self.b <= 0:
                raise ValueError("fine source needs a positive FWHM b")

    @property
    def is_fine(self) -> bool:
        return self.kind == FINE


@dataclass(frozen=True)
class ComplexField:
    """Sampled complex amplitude with its wavelength and provenance metadata.

    ``feature_width`` is the narrowest transmitted structure (slit width or
    beam FWHM), used for paraxial-validity checks downstream;
    ``transmitted_fraction`` is the pre-normalization energy fraction that
    survived the aperture.
    """

    grid: Grid1D
    amplitudes: np.ndarray
    wavelength: float
    feature_width: float | None = None
    transmitted_fraction: float | None = None
    warnings: tuple = ()

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_samples,):
            raise ValueError("amplitudes length must match grid")
        if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.spacing)

    def normalize(self) -> "ComplexField":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise EmptyFieldError("field carries no energy")
        return replace(self, amplitudes=self.amplitudes / math.sqrt(n2))

    def with_warning(self, message: str) -> "ComplexField":
        return replace(self, warnings=self.warnings + (message,))


def pattern_extent(slit_width: float, wavelength: float, distance: float,
                   beam_fwhm: float | None = None) -> float:
    """Expected transverse extent of the diffracted pattern, 2*lambda*L/w_min.

    For sub-wavelength features the diffraction cone saturates near 90
    degrees, so the estimate is capped at 4L.
    """
    w_min = slit_width if beam_fwhm is None else min(slit_width, beam_fwhm)
    if distance == 0.0:
        return slit_width
    return min(2.0 * wavelength * distance / w_min, 4.0 * distance)


def validate_grid(grid: Grid1D, slit_width: float, wavelength: float, distance: float,
                  beam_fwhm: float | None = None) -> None:
    """Enforce the sizing rule: span >= max(8*slit, 4*pattern extent) and
    sampling <= w_min/16. Violations are errors, not silent aliasing."""
    w_min = slit_width if beam_fwhm is None else min(slit_width, beam_fwhm)
    required = max(8.0 * slit_width, 4.0 * pattern_extent(slit_width, wavelength, distance, beam_fwhm))
    if grid.span < required:
        raise GridTooSmallError(
            f"grid span {grid.span:.3g} m below required {required:.3g} m "
            f"(slit {slit_width:.3g} m, extent estimate at L={distance:.3g} m)"
        )
    if grid.spacing > w_min / 16.0:
        raise GridTooSmallError(
            f"grid spacing {grid.spacing:.3g} m exceeds w_min/16 = {w_min / 16:.3g} m"
        )


def design_grid(slit_width: float, wavelength: float, distance: float,
                beam_fwhm: float | None = None, n_samples: int = 2 ** 16) -> Grid1D:
    """Pick a spacing for ``n_samples`` that satisfies the sizing rule.

    Prefers w_min/64 sampling (empirically needed to keep hard-edge spectral
    aliasing below 1e-3) and falls back to coarser, still-legal sampling when
    the required span does not fit; raises when nothing legal fits.
    """
    w_min = slit_width if beam_fwhm is None else min(slit_width, beam_fwhm)
    required = max(8.0 * slit_width, 4.0 * pattern_extent(slit_width, wavelength, distance, beam_fwhm))
    spacing = max(required / n_samples, w_min / 64.0)
    grid = Grid1D(n_samples=n_samples, spacing=spacing)
    validate_grid(grid, slit_width, wavelength, distance, beam_fwhm)
    return grid


def _tophat(x: np.ndarray, spacing: float, width: float) -> np.ndarray:
    """Area-weighted top hat: interior samples 1, the single edge sample
    carries its fractional coverage, so the effective width is exact."""
    left = np.clip(x - spacing / 2.0, -width / 2.0, width / 2.0)
    right = np.clip(x + spacing / 2.0, -width / 2.0, width / 2.0)
    return (right - left) / spacing


def make_slit_field(source: SourceSpec, slit_width: float, grid: Grid1D,
                    wavelength: float, fine_factor: float = 10.0) -> ComplexField:
    """Incident beam times the top-hat slit transmission, normalized.

    Parameters
    ----------
    source : SourceSpec
        Wide plane wave or fine Gaussian (FWHM ``b``, offset ``x_b``).
    slit_width : float
        Aperture width in m, centered at x = 0.
    grid : Grid1D
        Sampling; the slit must fit within span/8.
    wavelength : float
        de Broglie wavelength in m.
    fine_factor : float
        Operational factor for "significantly smaller": a fine beam gets a
        warning (never an error) unless b <= slit/factor and b <= lambda/factor.

    Raises
    ------
    GridTooSmallError
        Slit wider than span/8.
    EmptyFieldError
        Fine beam aimed entirely outside the aperture.
    """
    if slit_width <= 0:
        raise ValueError(f"slit width must be positive, got {slit_width}")
    if slit_width > grid.span / 8.0:
        raise GridTooSmallError(
            f"slit {slit_width:.3g} m exceeds span/8 = {grid.span / 8:.3g} m"
        )
    x = grid.coordinates()
    transmission = _tophat(x, grid.spacing, slit_width)

    warnings: tuple = ()
    if source.is_fine:
        b = float(source.b)
        if abs(source.x_b) >= grid.span / 2.0:
            raise ValueError(f"beam offset {source.x_b:.3g} m lies outside the grid")
        if abs(source.x_b) > slit_width / 2.0 + 3.0 * b:
            raise EmptyFieldError(
                f"fine beam at x_b={source.x_b:.3g} m misses the {slit_width:.3g} m slit entirely"
            )
        if not (b <= slit_width / fine_factor and b <= wavelength / fine_factor):
            warnings += (
                f"fine beam b={b:.3g} m is not below min(slit, lambda)/{fine_factor:g}; "
                "sub-wavelength condition not met",
            )
        sigma = b / _FWHM_SIGMA
        incident = np.exp(-((x - source.x_b) ** 2) / (4.0 * sigma ** 2)).astype(complex)
        feature = min(slit_width, b)
    else:
        incident = np.ones_like(x, dtype=complex)
        feature = slit_width

    amplitudes = incident * transmission
    energy_in = float(np.sum(np.abs(incident) ** 2) * grid.spacing)
    energy_out = float(np.sum(np.abs(amplitudes) ** 2) * grid.spacing)
    if energy_out <= 0.0:
        raise EmptyFieldError("slit transmits no energy for this source")

    out = ComplexField(
        grid=grid,
        amplitudes=amplitudes,
        wavelength=wavelength,
        feature_width=feature,
        transmitted_fraction=energy_out / energy_in,
        warnings=warnings,
    )
    return out.normalize()


def _transfer_function(grid: Grid1D, wavelength: float, distance: float,
                       kernel: str) -> np.ndarray:
    f = np.fft.fftfreq(grid.n_samples, grid.spacing)
    if kernel == "paraxial":
        # exp(i(k_z - k)L) with k_z ~ k - pi*lambda*f^2; unit modulus
        return np.exp(-1j * math.pi * wavelength * distance * f ** 2)
    if kernel == "exact":
        k = 2.0 * math.pi / wavelength
        kx = 2.0 * math.pi * f
        arg = k * k - kx * kx
        propagating = arg >= 0.0
        kz = np.sqrt(np.where(propagating, arg, 0.0))
        # (k_z - k)L computed as -kx^2 L/(k_z + k): stable when kx << k
        phase = -(kx * kx) * distance / (kz + k)
        kappa = np.sqrt(np.where(propagating, 0.0, -arg))
        evanescent = np.exp(-kappa * distance) * np.exp(-1j * k * distance)
        return np.where(propagating, np.exp(1j * phase), evanescent)
    raise ValueError(f"kernel must be 'paraxial' or 'exact', got {kernel!r}")


def propagate(field: ComplexField, distance: float, kernel: str = "paraxial") -> ComplexField:
    """Free-space propagation over ``distance`` by spectral multiplication.

    The paraxial kernel conserves the norm exactly; the exact kernel never
    increases it (evanescent components decay). A paraxial-validity warning
    is attached when the predicted diffraction half-angle
    lambda/(2*feature_width) reaches 0.2 rad.
    """
    if distance < 0:
        raise ValueError(f"propagation distance must be nonnegative, got {distance}")
    out = field
    if kernel == "paraxial" and field.feature_width:
        half_angle = field.wavelength / (2.0 * field.feature_width)
        if half_angle >= 0.2:
            out = out.with_warning(
                f"paraxial kernel at half-angle {half_angle:.3g} rad (>= 0.2); "
                "consider the exact kernel"
            )
    transfer = _transfer_function(field.grid, field.wavelength, distance, kernel)
    spectrum = np.fft.fft(out.amplitudes)
    return replace(out, amplitudes=np.fft.ifft(spectrum * transfer))


def intensity_of(field: ComplexField) -> IntensityProfile:
    """Per-sample |a|^2 normalized to unit trapezoid integral."""
    values = np.abs(field.amplitudes) ** 2
    if not np.any(values > 0):
        raise EmptyFieldError("all-zero field has no intensity profile")
    return IntensityProfile(field.grid.coordinates(), values).normalize()


def fraunhofer_intensity(slit_width: float, wavelength: float, distance: float,
                         x) -> np.ndarray | float:
    """Closed-form far-field single-slit density, unit continuum integral.

    sinc^2(slit*x/(lambda*L)) scaled by slit/(lambda*L); zeros fall at
    x = k*lambda*L/slit for nonzero integer k.
    """
    for name, v in (("slit_width", slit_width), ("wavelength", wavelength),
                    ("distance", distance)):
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    u = np.asarray(x, dtype=float) * slit_width / (wavelength * distance)
    out = (slit_width / (wavelength * distance)) * np.sinc(u) ** 2
    return out if out.ndim else float(out)


def fraunhofer_profile(slit_width: float, wavelength: float, distance: float,
                       grid: Grid1D) -> IntensityProfile:
    """The analytic far-field pattern sampled on ``grid`` and renormalized."""
    x = grid.coordinates()
    return IntensityProfile(x, fraunhofer_intensity(slit_width, wavelength, distance, x)).normalize()


def _sinc_sq_maxima(orders: int) -> list[float]:
    """Positive roots of tan(u) = u in units of pi (secondary maxima of sinc^2)."""
    roots = []
    for k in range(1, orders + 1):
        lo = k * math.pi + 1e-9
        hi = (k + 0.5) * math.pi - 1e-9
        roots.append(brentq(lambda u: math.tan(u) - u, lo, hi) / math.pi)
    return roots


def fraunhofer_features(slit_width: float, wavelength: float, distance: float,
                        orders: int = 3) -> PatternFeatures:
    """Exact far-field features: z_k = k*p and the sinc^2 secondary maxima,
    with p = lambda*L/slit the fringe period. Width W is exactly 2p."""
    p = wavelength * distance / slit_width
    ks = np.arange(1, orders + 1, dtype=float)
    minima = np.concatenate([-ks[::-1], ks]) * p
    secondary = np.array(_sinc_sq_maxima(orders - 1)) * p if orders > 1 else np.array([])
    maxima = np.concatenate([-secondary[::-1], [0.0], secondary])
    return PatternFeatures(minima=minima, maxima=maxima, width=2.0 * p, fringe_period=p)
