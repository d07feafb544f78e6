import math

import pytest

from slitlab.errors import MasslessSpeciesError, UnknownSpeciesError
from slitlab.quantities import (
    CONSTANTS,
    builtin_species,
    make_species,
    rest_energy_of,
    species_lookup,
)


def test_hbar_matches_h_over_two_pi():
    assert CONSTANTS.hbar == CONSTANTS.planck_h / (2.0 * math.pi)


def test_all_constants_positive():
    c = CONSTANTS
    for v in (c.planck_h, c.hbar, c.light_c, c.grav_g, c.boltzmann_kB,
              c.electron_mass, c.amu, c.electronvolt):
        assert v > 0


@pytest.mark.parametrize("name,mass,tol", [
    ("Ca+", 6.7e-26, 0.02),   # atom weight ~40
    ("Na", 3.8e-26, 0.02),
])
def test_builtin_masses_match_published_values(name, mass, tol):
    sp = species_lookup(name)
    assert abs(sp.mass - mass) / mass < tol


def test_electron_mass_is_the_constant_exactly():
    assert species_lookup("electron").mass == CONSTANTS.electron_mass


@pytest.mark.parametrize("name,rest_ev,tol", [
    ("Ca+", 38e9, 0.03),      # published rounded value
    ("Be+", 8.3946e9, 0.01),  # 9.012 amu * 931.494 MeV/amu, hand-checked
    ("electron", 511e3, 0.001),
])
def test_rest_energies(name, rest_ev, tol):
    assert abs(rest_energy_of(species_lookup(name)) - rest_ev) / rest_ev < tol


def test_rest_energy_field_consistent_with_mass():
    # rest_energy/(m c^2) within [0.98, 1.02] for every massive builtin
    for sp in builtin_species().values():
        if sp.is_massless:
            continue
        mc2 = sp.mass * CONSTANTS.light_c ** 2 / CONSTANTS.electronvolt
        assert 0.98 <= sp.rest_energy_ev / mc2 <= 1.02


def test_lookup_is_pure():
    assert species_lookup("Ca+") == species_lookup("Ca+")
    assert species_lookup("Ca+") is species_lookup("Ca+")


def test_unknown_species_names_the_label():
    with pytest.raises(UnknownSpeciesError, match="Xe\\+"):
        species_lookup("Xe+")


def test_photon_sentinel_rejected_for_rest_energy():
    photon = species_lookup("photon")
    assert photon.is_massless
    with pytest.raises(MasslessSpeciesError):
        rest_energy_of(photon)


def test_user_registered_species():
    extra = {"Mg+": make_species("Mg+", 24.305 * CONSTANTS.amu, "+1")}
    sp = species_lookup("Mg+", extra)
    assert sp.mass == pytest.approx(24.305 * CONSTANTS.amu)
    assert sp.rest_energy_ev > 0


def test_make_species_rejects_nonpositive_mass():
    with pytest.raises(ValueError):
        make_species("bogus", -1.0)


def test_gravity_override():
    alt = CONSTANTS.with_gravity(9.80665)
    assert alt.grav_g == 9.80665
    assert alt.planck_h == CONSTANTS.planck_h
    with pytest.raises(ValueError):
        CONSTANTS.with_gravity(0.0)
