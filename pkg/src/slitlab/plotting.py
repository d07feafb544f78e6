"""Figure rendering to SVG files alongside the delimited outputs.

All entry points return a warning string instead of raising: plotting
failures never fail a run. Output is deterministic (fixed hash salt, no
embedded dates) so repeated runs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "slitlab"

import matplotlib.pyplot as plt
import numpy as np

_PREFIXES = ((1.0, "m"), (1e-3, "mm"), (1e-6, "um"), (1e-9, "nm"), (1e-12, "pm"))


def _axis_scale(extent: float) -> tuple[float, str]:
    for scale, label in _PREFIXES:
        if extent >= 10.0 * scale:
            return scale, label
    return _PREFIXES[-1]


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _view_window(curves) -> tuple[float, float]:
    """x range holding essentially all probability mass, 10% padded."""
    lo, hi = np.inf, -np.inf
    for _, prof in curves:
        mass = np.cumsum(prof.values)
        mass = mass / mass[-1]
        lo = min(lo, float(np.interp(5e-4, mass, prof.x)))
        hi = max(hi, float(np.interp(1 - 5e-4, mass, prof.x)))
    pad = 0.1 * (hi - lo)
    return lo - pad, hi + pad


def plot_profiles(curves, path, features=None, title: str = "") -> str | None:
    """One panel with labelled intensity curves and optional feature markers.

    Parameters
    ----------
    curves : sequence of (label, IntensityProfile)
    path : output SVG path
    features : PatternFeatures, optional
        Minima/maxima markers (within view) and a W bracket when present.
    """
    try:
        if not curves:
            raise ValueError("nothing to plot")
        lo, hi = _view_window(curves)
        scale, unit = _axis_scale(hi - lo)
        fig, ax = plt.subplots(figsize=(7.2, 4.2))
        for label, prof in curves:
            ax.plot(prof.x / scale, prof.values * scale, lw=1.2, label=label)
        if features is not None:
            top = max(float(p.values.max()) * scale for _, p in curves)
            for z in features.minima:
                if lo <= z <= hi:
                    ax.axvline(z / scale, color="0.65", lw=0.7, ls=":")
            for f in features.maxima:
                if lo <= f <= hi:
                    ax.axvline(f / scale, color="0.85", lw=0.6, ls="--")
            if features.width is not None:
                half = features.width / 2.0 / scale
                y = 1.04 * top
                ax.annotate("", xy=(-half, y), xytext=(half, y),
                            arrowprops=dict(arrowstyle="<->", lw=0.9, color="0.2"))
                ax.text(0.0, 1.06 * top, f"W = {features.width / scale:.4g} {unit}",
                        ha="center", va="bottom", fontsize=9)
                ax.set_ylim(top=1.18 * top)
        ax.set_xlim(lo / scale, hi / scale)
        ax.set_xlabel(f"screen position [{unit}]")
        ax.set_ylabel(f"probability density [1/{unit}]")
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend(frameon=False, fontsize=9)
        fig.tight_layout()
        _save(fig, path)
        return None
    except Exception as exc:
        plt.close("all")
        return f"plotting failed for {path}: {type(exc).__name__}: {exc}"


def plot_sweep(steps, path, title: str = "") -> str | None:
    """Small-multiples layout, one panel per beam-offset step."""
    try:
        n = len(steps)
        if n == 0:
            raise ValueError("empty sweep")
        cols = min(3, n)
        rows = (n + cols - 1) // cols
        extent = max(float(np.max(np.abs(s.prediction.profile.x))) for s in steps)
        scale, unit = _axis_scale(2 * extent)
        fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.2 * rows),
                                 sharex=True, squeeze=False)
        for ax in axes.ravel()[n:]:
            ax.set_axis_off()
        for ax, step in zip(axes.ravel(), steps):
            prof = step.prediction.profile
            ax.plot(prof.x / scale, prof.values * scale, lw=1.0)
            ax.set_title(f"x_b = {step.x_b / scale:.3g} {unit}, modes = {step.modes}",
                         fontsize=8)
            ax.tick_params(labelsize=7)
        for ax in axes[-1]:
            ax.set_xlabel(f"screen position [{unit}]", fontsize=8)
        if title:
            fig.suptitle(title, fontsize=10)
        fig.tight_layout()
        _save(fig, path)
        return None
    except Exception as exc:
        plt.close("all")
        return f"plotting failed for {path}: {type(exc).__name__}: {exc}"


def plot_buildup_checkpoint(buildup, index: int, path) -> str | None:
    """Histogram strip chart for one checkpoint of a build-up run."""
    try:
        edges = np.asarray(buildup.bin_edges)
        counts = buildup.histograms[index]
        extent = float(max(abs(edges[0]), abs(edges[-1])))
        scale, unit = _axis_scale(2 * extent)
        fig, ax = plt.subplots(figsize=(7.2, 2.4))
        ax.bar(edges[:-1] / scale, counts, width=np.diff(edges) / scale,
               align="edge", color="0.3")
        ax.set_xlabel(f"screen position [{unit}]")
        ax.set_ylabel("counts")
        ax.set_title(f"n = {buildup.checkpoints[index]}", fontsize=9)
        fig.tight_layout()
        _save(fig, path)
        return None
    except Exception as exc:
        plt.close("all")
        return f"plotting failed for {path}: {type(exc).__name__}: {exc}"


def plot_onset(rows, path, threshold: float = 0.5) -> str | None:
    """Visibility versus Fresnel number for the fringe-onset sweep."""
    try:
        ok = [(r.fresnel_number, r.visibility) for r in rows if r.visibility is not None]
        if not ok:
            raise ValueError("no successful rows")
        nf, vis = zip(*ok)
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        ax.semilogx(nf, vis, "o-", lw=1.0, ms=4)
        ax.axhline(threshold, color="0.6", lw=0.8, ls="--")
        ax.set_xlabel("Fresnel number")
        ax.set_ylabel("first-fringe visibility")
        ax.set_ylim(-0.02, 1.05)
        fig.tight_layout()
        _save(fig, path)
        return None
    except Exception as exc:
        plt.close("all")
        return f"plotting failed for {path}: {type(exc).__name__}: {exc}"
