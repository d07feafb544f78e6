"""Physical constants and particle species.

Single source of truth for every dimensioned symbol used by the other
modules. All internal computation is SI; eV and friends appear only at
I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import MasslessSpeciesError, UnknownSpeciesError


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants. ``grav_g`` is fixed at 9.81 m/s^2 by convention and may
    be overridden for sensitivity studies via :meth:`with_gravity`."""

    planck_h: float = 6.62607015e-34      # J s
    light_c: float = 299792458.0          # m/s
    grav_g: float = 9.81                  # m/s^2
    boltzmann_kB: float = 1.380649e-23    # J/K
    electron_mass: float = 9.1093837015e-31  # kg
    amu: float = 1.66053906660e-27        # kg
    electronvolt: float = 1.602176634e-19  # J

    @property
    def hbar(self) -> float:
        return self.planck_h / (2.0 * math.pi)

    def with_gravity(self, g: float) -> "PhysicalConstants":
        if g <= 0:
            raise ValueError(f"gravitational acceleration must be positive, got {g}")
        return replace(self, grav_g=g)


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class Species:
    """A particle type used by the feasibility and scenario math.

    ``rest_energy_ev`` is mass*c^2; the massless photon sentinel carries
    zero for both and is rejected by every operation needing kinematics.
    """

    name: str
    mass: float           # kg
    rest_energy_ev: float  # eV
    charge_label: str = "neutral"

    @property
    def is_massless(self) -> bool:
        return self.mass == 0.0


def _from_amu(name: str, weight_amu: float, charge_label: str,
              constants: PhysicalConstants = CONSTANTS) -> Species:
    mass = weight_amu * constants.amu
    rest = mass * constants.light_c ** 2 / constants.electronvolt
    return Species(name=name, mass=mass, rest_energy_ev=rest, charge_label=charge_label)


def make_species(name: str, mass: float, charge_label: str = "neutral",
                 constants: PhysicalConstants = CONSTANTS) -> Species:
    """Build a species record from a mass in kg (user registration path)."""
    if mass <= 0:
        raise ValueError(f"species mass must be positive, got {mass}")
    rest = mass * constants.light_c ** 2 / constants.electronvolt
    return Species(name=name, mass=mass, rest_energy_ev=rest, charge_label=charge_label)


# Atomic weights: Ca 40.08, Be 9.012, Na 22.99 amu. Ion masses ignore the
# electron-mass deficit (<0.01%, below every tolerance used downstream).
_ELECTRON = Species(
    name="electron",
    mass=CONSTANTS.electron_mass,
    rest_energy_ev=CONSTANTS.electron_mass * CONSTANTS.light_c ** 2 / CONSTANTS.electronvolt,
    charge_label="-1",
)

_BUILTIN = {
    "Ca+": _from_amu("Ca+", 40.08, "+1"),
    "Ca": _from_amu("Ca", 40.08, "neutral"),
    "Be+": _from_amu("Be+", 9.012, "+1"),
    "Na": _from_amu("Na", 22.99, "neutral"),
    "electron": _ELECTRON,
    "neutron": Species(
        name="neutron",
        mass=1.67492749804e-27,
        rest_energy_ev=1.67492749804e-27 * CONSTANTS.light_c ** 2 / CONSTANTS.electronvolt,
        charge_label="neutral",
    ),
    # Massless sentinel: lookup succeeds, kinematic operations reject it.
    "photon": Species(name="photon", mass=0.0, rest_energy_ev=0.0, charge_label="neutral"),
}


def builtin_species() -> dict[str, Species]:
    """Copy of the built-in species table (safe to extend)."""
    return dict(_BUILTIN)


def species_lookup(name: str, extra: dict[str, Species] | None = None) -> Species:
    """Look up a species by label.

    Parameters
    ----------
    name : str
        One of the built-in labels (Ca+, Ca, Be+, Na, electron, neutron,
        photon) or a key of ``extra``.
    extra : dict, optional
        User-registered species (typically parsed from the run config).

    Raises
    ------
    UnknownSpeciesError
        If the label is in neither table.
    """
    if extra and name in extra:
        return extra[name]
    try:
        return _BUILTIN[name]
    except KeyError:
        known = sorted(set(_BUILTIN) | set(extra or ()))
        raise UnknownSpeciesError(
            f"unknown species {name!r}; known: {', '.join(known)}"
        ) from None


def rest_energy_of(species: Species, constants: PhysicalConstants = CONSTANTS) -> float:
    """Rest energy mass*c^2 in eV; rejects the massless sentinel."""
    if species.is_massless:
        raise MasslessSpeciesError(
            f"species {species.name!r} is massless; photon kinematics not supported here"
        )
    return species.mass * constants.light_c ** 2 / constants.electronvolt
