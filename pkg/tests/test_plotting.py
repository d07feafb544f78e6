import numpy as np

from slitlab.models import DeflectionModel, Scenario, predict_H0, sweep_xb
from slitlab.patterns import find_extrema
from slitlab.plotting import plot_profiles, plot_sweep
from slitlab.wavefield import FINE, SourceSpec


def test_plot_failures_return_warning_instead_of_raising(tmp_path):
    warning = plot_profiles([], tmp_path / "never.svg")
    assert warning is not None and "plotting failed" in warning
    assert not (tmp_path / "never.svg").exists()


def test_profile_plot_with_markers(tmp_path):
    pred = predict_H0(Scenario())
    path = tmp_path / "plot.svg"
    assert plot_profiles([("H0", pred.profile)], path, features=pred.features) is None
    text = path.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text
    # W bracket annotation rendered
    assert "W = " in text


def test_plain_curve_without_features(tmp_path):
    pred = predict_H0(Scenario())
    path = tmp_path / "plain.svg"
    assert plot_profiles([("H0", pred.profile)], path) is None
    assert path.stat().st_size > 1000


def test_sweep_small_multiples(tmp_path):
    scen = Scenario(source=SourceSpec(kind=FINE, b=2e-6))
    steps = sweep_xb(scen, DeflectionModel(), steps=5)
    path = tmp_path / "sweep.svg"
    assert plot_sweep(steps, path) is None
    assert path.exists()


def test_marker_positions_follow_found_extrema(tmp_path):
    pred = predict_H0(Scenario())
    feats = find_extrema(pred.profile)
    # the features drawn are the ones measured from the pattern
    assert feats.minimum(1) == pred.features.minimum(1)
    assert abs(feats.minimum(1) - 50e-6) < 0.5e-6
