"""Screen-pattern analysis: extrema, width W, envelope, fringe mask, visibility.

The conventions used throughout:

* minima coordinates ("z") are indexed ..., -2, -1, 1, 2, ... outward from
  the pattern center, maxima ("f") are indexed ..., -1, 0, 1, ...;
* W is the distance between the two first-order minima, z_1 - z_{-1};
* the fringeless envelope is the one-fringe-period moving average of the
  profile, which is exactly fringe-free for sinusoidal fringing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFieldError, NotApplicableError, ResolutionError


@dataclass(frozen=True)
class IntensityProfile:
    """Nonnegative screen intensity sampled on a uniform coordinate axis."""

    x: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or v.shape != x.shape:
            raise ValueError("x and values must be 1-D arrays of equal length")
        if x.size < 2:
            raise ValueError("profile needs at least two samples")
        if np.any(v < 0):
            raise ValueError("intensity values must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.x))

    def normalize(self) -> "IntensityProfile":
        total = self.integral()
        if total <= 0:
            raise EmptyFieldError("profile integrates to zero; cannot normalize")
        return IntensityProfile(self.x, self.values / total, normalized=True)

    def restricted(self, lo: float, hi: float) -> "IntensityProfile":
        sel = (self.x >= lo) & (self.x <= hi)
        if np.count_nonzero(sel) < 2:
            raise ResolutionError(f"region [{lo}, {hi}] selects fewer than 2 samples")
        return IntensityProfile(self.x[sel], self.values[sel], normalized=False)


@dataclass(frozen=True)
class PatternFeatures:
    """Extracted structure of a screen pattern.

    ``minima`` and ``maxima`` are sorted coordinate arrays; ``width`` is
    z_1 - z_{-1} and is None when no interior minima exist (fringeless
    profile). ``visibility`` maps region names to contrast values.
    """

    minima: np.ndarray
    maxima: np.ndarray
    width: float | None
    fringe_period: float | None = None
    visibility: dict = field(default_factory=dict)

    def minimum(self, k: int) -> float:
        """Coordinate z_k; k is nonzero, negative indices count leftward."""
        if k == 0:
            raise IndexError("minima are indexed ..., -2, -1, 1, 2, ...")
        neg = self.minima[self.minima < 0]
        pos = self.minima[self.minima >= 0]
        arr = pos if k > 0 else neg[::-1]
        i = abs(k) - 1
        if i >= arr.size:
            raise IndexError(f"minimum z_{k} not found (have {self.minima.size} minima)")
        return float(arr[i])

    def maximum(self, k: int) -> float:
        """Coordinate f_k; f_0 is the central maximum."""
        if self.maxima.size == 0:
            raise IndexError("no maxima found")
        center = int(np.argmin(np.abs(self.maxima)))
        i = center + k
        if not 0 <= i < self.maxima.size:
            raise IndexError(f"maximum f_{k} not found")
        return float(self.maxima[i])

    def to_json_dict(self) -> dict:
        return {
            "z": [float(v) for v in self.minima],
            "f": [float(v) for v in self.maxima],
            "W_m": None if self.width is None else float(self.width),
            "fringe_period_m": None if self.fringe_period is None else float(self.fringe_period),
            "visibility": {k: float(v) for k, v in self.visibility.items()},
        }


def _parabolic_refine(x: np.ndarray, v: np.ndarray, i: int) -> float:
    """Sub-sample extremum position from a 3-point parabola through i-1, i, i+1.

    Plateau extrema are left at the sample position (leftmost-sample rule).
    """
    if v[i - 1] == v[i] or v[i] == v[i + 1]:
        return float(x[i])
    denom = v[i - 1] - 2.0 * v[i] + v[i + 1]
    if denom == 0.0:
        return float(x[i])
    shift = 0.5 * (v[i - 1] - v[i + 1]) / denom
    shift = float(np.clip(shift, -0.5, 0.5))
    return float(x[i] + shift * (x[1] - x[0]))


def _interior_extrema(values: np.ndarray):
    """Indices of interior minima and maxima, plateau-aware.

    A plateau counts as one extremum only when strictly descended into and
    ascended out of (or vice versa); the leftmost plateau sample is kept,
    so monotone tails and flat borders produce nothing.
    """
    d = np.diff(values)
    nz = np.flatnonzero(d)
    mins, maxs = [], []
    if nz.size < 2:
        return mins, maxs
    signs = np.sign(d[nz])
    for k in np.flatnonzero(signs[:-1] != signs[1:]):
        pos = int(nz[k] + 1)
        if signs[k] < 0:
            mins.append(pos)
        else:
            maxs.append(pos)
    return mins, maxs


def find_extrema(profile: IntensityProfile, floor: float = 1e-12) -> PatternFeatures:
    """Locate fringe minima and maxima with parabolic sub-sample refinement.

    Returns features with empty arrays and ``width=None`` for fringeless
    profiles (no interior minima, e.g. a pure Gaussian). Extrema whose whole
    neighborhood sits below ``floor`` of the global peak are numerical noise
    (e.g. an FFT floor) and are skipped.
    """
    if profile.x.size < 64:
        raise ResolutionError("extrema search needs at least 64 samples")
    v = profile.values
    if np.all(v == v[0]):
        raise ResolutionError("profile is constant; no extrema exist")

    min_idx, max_idx = _interior_extrema(v)
    cut = floor * v.max()
    min_idx = [i for i in min_idx if max(v[i - 1], v[i], v[i + 1]) > cut]
    max_idx = [i for i in max_idx if v[i] > cut]
    minima = np.array(sorted(_parabolic_refine(profile.x, v, i) for i in min_idx))
    maxima = np.array(sorted(_parabolic_refine(profile.x, v, i) for i in max_idx))

    width = None
    if minima.size:
        neg = minima[minima < 0]
        pos = minima[minima >= 0]
        if neg.size and pos.size:
            width = float(pos.min() - neg.max())
    return PatternFeatures(minima=minima, maxima=maxima, width=width)


def check_eq2(features: PatternFeatures, slit_width: float, wavelength: float,
              distance: float) -> float:
    """Relative error of the measured W against 2*lambda*L/slit_width."""
    if features.width is None:
        raise NotApplicableError("no measured W: profile had no first-order minima")
    expected = 2.0 * wavelength * distance / slit_width
    return abs(features.width - expected) / expected


def envelope(profile: IntensityProfile, fringe_period: float) -> IntensityProfile:
    """Fringeless envelope: moving average over one fringe period, renormalized.

    This is the operational definition of the dispersion-only curve; for a
    pure sinusoidal fringe modulation the average over exactly one period
    removes the fringes entirely.
    """
    spacing = profile.spacing
    if fringe_period <= 2.0 * spacing:
        raise ResolutionError(
            f"fringe period {fringe_period:g} m must exceed twice the sampling {spacing:g} m"
        )
    window = int(round(fringe_period / spacing))
    if window < 3:
        raise ResolutionError(f"averaging window of {window} samples is below 3")
    kernel = np.ones(window)
    smooth = np.convolve(profile.values, kernel, mode="same")
    weight = np.convolve(np.ones_like(profile.values), kernel, mode="same")
    out = IntensityProfile(profile.x, smooth / weight)
    return out.normalize()


def central_lobe_mask(profile: IntensityProfile) -> np.ndarray:
    """Boolean mask of the central lobe: between the innermost minima when
    they exist, otherwise the region above half maximum."""
    try:
        feats = find_extrema(profile)
    except ResolutionError:
        feats = PatternFeatures(np.array([]), np.array([]), None)
    if feats.width is not None:
        lo = feats.minima[feats.minima < 0].max()
        hi = feats.minima[feats.minima >= 0].min()
        return (profile.x >= lo) & (profile.x <= hi)
    return profile.values >= 0.5 * profile.values.max()


def fringe_mask(profile: IntensityProfile, env: IntensityProfile,
                clip: float = 10.0) -> np.ndarray:
    """Ratio mask M = profile/envelope, zero where the envelope vanishes.

    M is clipped to [0, clip] to guard division blow-ups in the tails and
    rescaled so its mean over the central lobe equals 1.
    """
    if profile.x.shape != env.x.shape or not np.allclose(profile.x, env.x):
        raise ValueError("profile and envelope must share one grid")
    threshold = 1e-9 * env.values.max()
    bad = (env.values <= threshold) & (profile.values > 1e-9 * profile.values.max())
    if np.any(bad):
        raise ValueError("envelope vanishes where the profile is nonzero")
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(env.values > threshold, profile.values / env.values, 0.0)
    m = np.clip(m, 0.0, clip)
    lobe = central_lobe_mask(profile)
    mean = m[lobe].mean()
    if mean <= 0:
        raise EmptyFieldError("mask vanishes over the central lobe")
    return m / mean


def visibility(profile: IntensityProfile, region: tuple[float, float]) -> float:
    """Fringe contrast (I_max - I_min)/(I_max + I_min) over ``region``.

    A constant stretch returns 0; a non-constant stretch with no interior
    extremum pair (pure slope) has no meaningful contrast and raises.
    """
    sub = profile.restricted(region[0], region[1])
    vmax = float(sub.values.max())
    vmin = float(sub.values.min())
    if vmax == vmin:
        return 0.0
    min_idx, max_idx = _interior_extrema(sub.values)
    # boundary samples count as the pairing extremum when one side is interior
    has_pair = bool(min_idx) or bool(max_idx)
    if not has_pair:
        raise NotApplicableError("region contains no adjacent max/min pair")
    return (vmax - vmin) / (vmax + vmin)


def profile_fwhm(profile: IntensityProfile) -> float:
    """Full width at half maximum via linear interpolation at the crossings."""
    v = profile.values
    x = profile.x
    imax = int(np.argmax(v))
    half = v[imax] / 2.0
    above = v >= half
    left = int(np.argmax(above))
    right = int(len(v) - 1 - np.argmax(above[::-1]))
    if left == 0 or right == len(v) - 1:
        raise NotApplicableError("half-maximum crossings fall outside the sampled range")
    xl = x[left - 1] + (half - v[left - 1]) / (v[left] - v[left - 1]) * (x[left] - x[left - 1])
    xr = x[right] + (half - v[right]) / (v[right + 1] - v[right]) * (x[right + 1] - x[right])
    return float(xr - xl)
