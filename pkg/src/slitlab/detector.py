"""Single-particle detection sampling and pattern build-up histograms.

Events are drawn by inverting the cumulative distribution of the sampled
profile, treating the density as piecewise linear between samples (the
inversion is quadratic inside each bin and exact for such densities).
The random stream is a counter-based Philox generator keyed by the seed,
so the event sequence is a pure function of (profile, n, seed) and the
first n events of a longer run equal a shorter run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patterns import IntensityProfile


@dataclass(frozen=True)
class BuildUp:
    """Cumulative detection histograms at increasing event counts."""

    seed: int
    checkpoints: tuple[int, ...]
    bin_edges: np.ndarray
    histograms: np.ndarray  # shape (len(checkpoints), bins)

    def __post_init__(self):
        sums = self.histograms.sum(axis=1)
        if not np.array_equal(sums, np.asarray(self.checkpoints)):
            raise ValueError("histogram sums must equal their checkpoints")

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "checkpoints": list(self.checkpoints),
            "bin_edges_m": [float(e) for e in self.bin_edges],
            "histograms": [[int(c) for c in row] for row in self.histograms],
        }


def _node_cdf(profile: IntensityProfile) -> np.ndarray:
    """Trapezoid CDF at the profile's sample positions, normalized to [0, 1]."""
    masses = 0.5 * (profile.values[:-1] + profile.values[1:]) * profile.spacing
    cdf = np.concatenate([[0.0], np.cumsum(masses)])
    return cdf / cdf[-1]


def sample_hits(profile: IntensityProfile, n: int, seed: int,
                blur_sigma: float = 0.0) -> np.ndarray:
    """Draw ``n`` detection coordinates from the profile, deterministically.

    Parameters
    ----------
    profile : IntensityProfile
        Must be normalized (the screen density).
    n : int
        Number of events, >= 0.
    seed : int
        Stream key; identical (profile, n, seed) gives bit-identical output.
    blur_sigma : float
        Optional detector-resolution blur (Gaussian std in m, default off).
        Blur noise comes from a second stream keyed by the same seed, so the
        prefix property survives; blurred positions are clipped to the
        profile support.

    Returns
    -------
    ndarray
        Event positions in m, in detection order (index = sequence number).
    """
    if not profile.normalized:
        raise ValueError("profile must be normalized before sampling")
    if n < 0:
        raise ValueError(f"sample count must be nonnegative, got {n}")
    if blur_sigma < 0:
        raise ValueError(f"blur width must be nonnegative, got {blur_sigma}")
    if n == 0:
        return np.empty(0, dtype=float)

    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random(n)

    cdf = _node_cdf(profile)
    x = profile.x
    h = profile.spacing
    idx = np.searchsorted(cdf, u, side="right") - 1
    idx = np.clip(idx, 0, x.size - 2)

    # invert the quadratic CDF of the linear density segment d_lo -> d_hi
    total = float(np.trapezoid(profile.values, x))
    residual = (u - cdf[idx]) * total  # raw mass into the segment
    d_lo = profile.values[idx]
    d_hi = profile.values[idx + 1]
    delta = d_hi - d_lo
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = np.sqrt(np.maximum(d_lo ** 2 + 2.0 * delta * residual / h, 0.0))
        t_quad = (disc - d_lo) / delta
        t_lin = residual / (d_lo * h)
    t = np.where(delta != 0.0, t_quad, np.where(d_lo > 0.0, t_lin, 0.0))
    hits = x[idx] + np.clip(t, 0.0, 1.0) * h
    if blur_sigma > 0.0:
        noise_rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
        hits = hits + blur_sigma * noise_rng.standard_normal(n)
        hits = np.clip(hits, x[0], x[-1])
    return hits


def build_up(profile: IntensityProfile, checkpoints, bins: int, seed: int) -> BuildUp:
    """Cumulative histograms of one deterministic event stream.

    ``checkpoints`` must be strictly increasing; the histogram at checkpoint
    n always sums to exactly n and grows bin-wise with n.
    """
    checkpoints = tuple(int(c) for c in checkpoints)
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or not checkpoints:
        raise ValueError(f"checkpoints must be strictly increasing, got {checkpoints}")
    if checkpoints[0] < 0:
        raise ValueError("checkpoints must be nonnegative")
    if bins < 8:
        raise ValueError(f"need at least 8 bins, got {bins}")

    events = sample_hits(profile, checkpoints[-1], seed)
    edges = np.linspace(profile.x[0], profile.x[-1], bins + 1)
    rows = np.empty((len(checkpoints), bins), dtype=np.int64)
    for i, count in enumerate(checkpoints):
        rows[i], _ = np.histogram(events[:count], bins=edges)
    return BuildUp(seed=seed, checkpoints=checkpoints, bin_edges=edges, histograms=rows)
