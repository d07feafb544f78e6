import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitlab.errors import EmptyFieldError, GridTooSmallError
from slitlab.wavefield import (
    FINE,
    WIDE,
    ComplexField,
    Grid1D,
    SourceSpec,
    design_grid,
    fraunhofer_features,
    fraunhofer_intensity,
    fraunhofer_profile,
    intensity_of,
    make_slit_field,
    propagate,
    validate_grid,
)

from oracles import fresnel_quadrature, gaussian_overlap_fraction, relative_l2

LAM, DX, L = 1e-9, 20e-6, 1.0


def electron_grid(n=2 ** 16):
    return Grid1D(n_samples=n, spacing=DX / 64)


def slit_field(grid=None, **kwargs):
    grid = grid or electron_grid()
    return make_slit_field(SourceSpec(kind=WIDE), DX, grid, LAM, **kwargs)


class TestGrid:
    @pytest.mark.parametrize("n", [8, 12, 100, 2 ** 10 + 1])
    def test_rejects_bad_sample_counts(self, n):
        with pytest.raises(ValueError):
            Grid1D(n_samples=n, spacing=1e-6)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            Grid1D(n_samples=64, spacing=0.0)

    def test_center_sample_exact(self):
        g = Grid1D(n_samples=64, spacing=0.5e-6, center=1e-6)
        assert g.coordinates()[32] == 1e-6

    def test_design_grid_satisfies_rule(self):
        g = design_grid(DX, LAM, L)
        validate_grid(g, DX, LAM, L)
        assert g.spacing <= DX / 16

    def test_validate_rejects_short_span(self):
        g = Grid1D(n_samples=256, spacing=DX / 64)  # span = 4 slit widths
        with pytest.raises(GridTooSmallError):
            validate_grid(g, DX, LAM, L)

    def test_validate_rejects_coarse_sampling(self):
        g = Grid1D(n_samples=2 ** 20, spacing=DX / 8)
        with pytest.raises(GridTooSmallError):
            validate_grid(g, DX, LAM, L)


class TestMakeSlitField:
    def test_transmitted_energy_proportional_to_slit_width(self):
        grid = electron_grid(2 ** 14)
        f1 = make_slit_field(SourceSpec(kind=WIDE), DX, grid, LAM)
        f2 = make_slit_field(SourceSpec(kind=WIDE), 2 * DX, grid, LAM)
        assert f2.transmitted_fraction / f1.transmitted_fraction == pytest.approx(2.0, rel=0.01)

    def test_normalized_output(self):
        assert slit_field().norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_fine_beam_outside_slit_is_empty(self):
        grid = electron_grid(2 ** 14)
        src = SourceSpec(kind=FINE, b=DX / 100, x_b=DX)
        with pytest.raises(EmptyFieldError):
            make_slit_field(src, DX, grid, LAM)

    def test_fine_transmission_matches_overlap_quadrature(self):
        grid = electron_grid(2 ** 14)
        b = DX / 10
        fld = make_slit_field(SourceSpec(kind=FINE, b=b, x_b=0.0), DX, grid, LAM)
        oracle = gaussian_overlap_fraction(DX, b, 0.0, grid.spacing / 10)
        assert fld.transmitted_fraction == pytest.approx(oracle, abs=1e-4)

    def test_slit_wider_than_span_over_8_rejected(self):
        grid = Grid1D(n_samples=1024, spacing=DX / 64)
        with pytest.raises(GridTooSmallError):
            make_slit_field(SourceSpec(kind=WIDE), grid.span / 4, grid, LAM)

    def test_fine_beam_warns_outside_subwavelength_regime(self):
        grid = electron_grid(2 ** 14)
        fld = make_slit_field(SourceSpec(kind=FINE, b=DX / 10, x_b=0.0), DX, grid, LAM)
        assert any("sub-wavelength" in w for w in fld.warnings)

    def test_fine_beam_silent_when_condition_met(self):
        lam = 1e-6
        grid = Grid1D(n_samples=2 ** 14, spacing=1e-8 / 16)
        fld = make_slit_field(SourceSpec(kind=FINE, b=1e-8, x_b=0.0), 2e-7, grid, lam)
        assert fld.warnings == ()


class TestPropagate:
    def test_zero_distance_is_identity(self):
        fld = slit_field()
        out = propagate(fld, 0.0, kernel="paraxial")
        assert np.max(np.abs(out.amplitudes - fld.amplitudes)) < 1e-12

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            propagate(slit_field(), -1.0)

    def test_paraxial_conserves_norm(self):
        fld = slit_field()
        out = propagate(fld, L, kernel="paraxial")
        assert out.norm_squared() / fld.norm_squared() == pytest.approx(1.0, abs=1e-10)

    def test_exact_never_gains_norm(self):
        grid = Grid1D(n_samples=2 ** 12, spacing=2e-9 / 16)
        fld = make_slit_field(SourceSpec(kind=FINE, b=2e-9, x_b=0.0), 2e-8, grid, 2.1e-8)
        out = propagate(fld, 1e-7, kernel="exact")
        assert out.norm_squared() <= fld.norm_squared() * (1 + 1e-12)

    @pytest.mark.parametrize("kernel", ["paraxial", "exact"])
    def test_additivity(self, kernel):
        fld = slit_field(grid=electron_grid(2 ** 13))
        once = propagate(fld, 0.7, kernel=kernel)
        twice = propagate(propagate(fld, 0.3, kernel=kernel), 0.4, kernel=kernel)
        assert relative_l2(np.abs(twice.amplitudes), np.abs(once.amplitudes)) < 1e-8

    @pytest.mark.parametrize("kernel", ["paraxial", "exact"])
    def test_even_input_gives_even_intensity(self, kernel):
        fld = slit_field(grid=electron_grid(2 ** 13))
        prof = intensity_of(propagate(fld, L, kernel=kernel))
        v = prof.values
        mirrored = np.concatenate([v[:1], v[1:][::-1]])  # periodic mirror
        assert np.max(np.abs(v - mirrored)) < 1e-10 * v.max()

    def test_matches_direct_fresnel_quadrature(self):
        fld = slit_field()
        out = intensity_of(propagate(fld, L, kernel="paraxial"))
        period = LAM * L / DX
        window = np.abs(out.x) <= 2.5 * period
        xs = out.x[window][::16]
        oracle = fresnel_quadrature(xs, LAM, L, DX)
        sim = out.values[window][::16]
        assert relative_l2(sim / np.trapezoid(sim, xs),
                           oracle / np.trapezoid(oracle, xs)) < 1e-3

    def test_fraunhofer_convergence_at_small_fresnel_number(self):
        distance = 10.0  # N_F = 0.01
        grid = design_grid(DX, LAM, distance)
        fld = make_slit_field(SourceSpec(kind=WIDE), DX, grid, LAM)
        out = intensity_of(propagate(fld, distance, kernel="paraxial"))
        period = LAM * distance / DX
        window = np.abs(out.x) <= 3 * period
        analytic = fraunhofer_intensity(DX, LAM, distance, out.x[window])
        sim = out.values[window]
        assert relative_l2(sim / np.trapezoid(sim, out.x[window]),
                           analytic / np.trapezoid(analytic, out.x[window])) < 1e-2

    def test_paraxial_validity_warning(self):
        grid = Grid1D(n_samples=2 ** 12, spacing=2e-9 / 16)
        fld = make_slit_field(SourceSpec(kind=FINE, b=2e-9, x_b=0.0), 2e-8, grid, 2.1e-8)
        out = propagate(fld, 1e-7, kernel="paraxial")
        assert any("paraxial" in w for w in out.warnings)

    def test_unknown_kernel_rejected(self):
        with pytest.raises(ValueError):
            propagate(slit_field(grid=electron_grid(2 ** 13)), L, kernel="fancy")


class TestIntensity:
    def test_unit_integral(self):
        prof = intensity_of(slit_field(grid=electron_grid(2 ** 13)))
        assert prof.integral() == pytest.approx(1.0, abs=1e-10)

    def test_all_zero_field_rejected(self):
        grid = Grid1D(n_samples=64, spacing=1e-6)
        fld = ComplexField(grid, np.zeros(64, dtype=complex), wavelength=LAM)
        with pytest.raises(EmptyFieldError):
            intensity_of(fld)

    def test_propagated_slit_matches_analytic_sinc(self):
        grid = design_grid(DX, LAM, 10.0)
        fld = make_slit_field(SourceSpec(kind=WIDE), DX, grid, LAM)
        prof = intensity_of(propagate(fld, 10.0, kernel="paraxial"))
        period = LAM * 10.0 / DX
        win = np.abs(prof.x) <= 2 * period
        analytic = fraunhofer_intensity(DX, LAM, 10.0, prof.x[win])
        assert relative_l2(prof.values[win] / np.trapezoid(prof.values[win], prof.x[win]),
                           analytic / np.trapezoid(analytic, prof.x[win])) < 1e-2


class TestFraunhofer:
    def test_maximum_at_center(self):
        x = np.linspace(-1e-4, 1e-4, 1001)
        vals = fraunhofer_intensity(DX, LAM, L, x)
        assert np.argmax(vals) == 500

    def test_zero_at_first_order(self):
        peak = fraunhofer_intensity(DX, LAM, L, 0.0)
        assert fraunhofer_intensity(DX, LAM, L, LAM * L / DX) < 1e-12 * peak

    def test_electron_case_zeros_give_W_100um(self):
        z1 = LAM * L / DX
        assert z1 == pytest.approx(50e-6, rel=1e-12)
        grid = Grid1D(n_samples=2 ** 12, spacing=z1 / 64)
        prof = fraunhofer_profile(DX, LAM, L, grid)
        from slitlab.patterns import find_extrema
        feats = find_extrema(prof)
        assert feats.width == pytest.approx(100e-6, rel=0.01)

    def test_rejects_nonpositive_arguments(self):
        with pytest.raises(ValueError):
            fraunhofer_intensity(-DX, LAM, L, 0.0)

    def test_features_width_is_exactly_eq2(self):
        feats = fraunhofer_features(DX, LAM, L)
        assert feats.width == 2 * LAM * L / DX
        assert feats.minimum(1) == LAM * L / DX
        assert feats.maximum(1) == pytest.approx(1.4303 * LAM * L / DX, rel=1e-3)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95))
def test_propagation_additivity_random_split(frac):
    grid = Grid1D(n_samples=2 ** 12, spacing=DX / 32)
    fld = make_slit_field(SourceSpec(kind=WIDE), DX, grid, LAM)
    once = propagate(fld, 0.5, kernel="paraxial")
    split = propagate(propagate(fld, 0.5 * frac, kernel="paraxial"),
                      0.5 * (1 - frac), kernel="paraxial")
    assert relative_l2(np.abs(split.amplitudes), np.abs(once.amplitudes)) < 1e-8
