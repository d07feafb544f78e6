"""Drop-experiment design calculators and pass/fail feasibility reports.

Covers the full chain for a trapped ion/atom released above a slit: free
fall, de Broglie wavelength, trap zero-point energies and wavelengths,
ground-state width, the transverse momentum budget h/slit, temperature and
trap-frequency equivalents, lens drift budgets, and knockout-selection
timing. All arithmetic is SI internally; report fields carry explicit
units in their names.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import MasslessSpeciesError
from .quantities import CONSTANTS, PhysicalConstants, Species


def _require_massive(species: Species) -> None:
    if species.is_massless:
        raise MasslessSpeciesError(
            f"species {species.name!r} is massless; drop-experiment kinematics need a mass"
        )


def free_fall(drop_height: float, species: Species,
              constants: PhysicalConstants = CONSTANTS) -> tuple[float, float, float]:
    """Fall time, impact speed and kinetic energy for a free drop.

    Returns
    -------
    (t, v, E_k) : seconds, m/s, eV
        t = sqrt(2h/g), v = g t, E_k = m g h.
    """
    _require_massive(species)
    if drop_height < 0:
        raise ValueError(f"drop height must be nonnegative, got {drop_height}")
    g = constants.grav_g
    t = math.sqrt(2.0 * drop_height / g)
    v = g * t
    e_k = species.mass * g * drop_height / constants.electronvolt
    return t, v, e_k


def de_broglie(E_k_ev: float, species: Species,
               constants: PhysicalConstants = CONSTANTS) -> float:
    """Matter wavelength h*c/sqrt(2*E_k*E_o) for kinetic energy in eV.

    Valid for E_k << E_o; in that regime it coincides with the
    nonrelativistic form to well below 0.1% (see :func:`de_broglie_nonrel`).
    """
    _require_massive(species)
    if E_k_ev <= 0:
        raise ValueError(f"kinetic energy must be positive, got {E_k_ev} eV")
    e_o = species.rest_energy_ev
    if E_k_ev / e_o >= 1e-3:
        warnings.warn(
            f"E_k/E_o = {E_k_ev / e_o:.3g} is not small; the approximate "
            "wavelength relation degrades here", stacklevel=2)
    hc_ev_m = constants.planck_h * constants.light_c / constants.electronvolt
    return hc_ev_m / math.sqrt(2.0 * E_k_ev * e_o)


def de_broglie_nonrel(E_k_ev: float, species: Species,
                      constants: PhysicalConstants = CONSTANTS) -> float:
    """Cross-check form h/sqrt(2 m E_k)."""
    _require_massive(species)
    if E_k_ev <= 0:
        raise ValueError(f"kinetic energy must be positive, got {E_k_ev} eV")
    e_j = E_k_ev * constants.electronvolt
    return constants.planck_h / math.sqrt(2.0 * species.mass * e_j)


def zero_point(freq: float, species: Species,
               constants: PhysicalConstants = CONSTANTS) -> tuple[float, float, float]:
    """Harmonic ground-state energy, wavelength and momentum at trap frequency ``freq``.

    Returns
    -------
    (E, lambda, p) : eV, m, N s
        E = h*nu/2, p = sqrt(2mE), lambda = h/p.
    """
    _require_massive(species)
    if freq <= 0:
        raise ValueError(f"trap frequency must be positive, got {freq}")
    e_j = constants.planck_h * freq / 2.0
    p = math.sqrt(2.0 * species.mass * e_j)
    lam = constants.planck_h / p
    return e_j / constants.electronvolt, lam, p


def ground_state_fwhm(freq: float, species: Species,
                      constants: PhysicalConstants = CONSTANTS) -> float:
    """FWHM of the harmonic ground-state amplitude exp(-alpha x^2 / 2).

    alpha = m * 2*pi*nu / hbar, FWHM = 2*sqrt(2 ln 2 / alpha).
    """
    _require_massive(species)
    if freq <= 0:
        raise ValueError(f"trap frequency must be positive, got {freq}")
    alpha = species.mass * (2.0 * math.pi * freq) / constants.hbar
    return 2.0 * math.sqrt(2.0 * math.log(2.0) / alpha)


def momentum_budget(slit_width: float, margin_factor: float = 100.0,
                    constants: PhysicalConstants = CONSTANTS) -> tuple[float, float]:
    """(p_limit, p_threshold): h/slit and its margin-divided working budget."""
    if slit_width <= 0:
        raise ValueError(f"slit width must be positive, got {slit_width}")
    if margin_factor < 1:
        raise ValueError(f"margin factor must be >= 1, got {margin_factor}")
    p_limit = constants.planck_h / slit_width
    return p_limit, p_limit / margin_factor


def energy_equivalents(p: float, species: Species,
                       constants: PhysicalConstants = CONSTANTS) -> tuple[float, float, float]:
    """Kinetic energy and its temperature/trap-frequency equivalents.

    Returns
    -------
    (E, T, nu) : J, K, Hz
        E = p^2/2m, T = 2E/k_B (from E = k_B T / 2), nu = 2E/h (from E = h nu / 2).
    """
    _require_massive(species)
    if p < 0:
        raise ValueError(f"momentum must be nonnegative, got {p}")
    e = p * p / (2.0 * species.mass)
    return e, 2.0 * e / constants.boltzmann_kB, 2.0 * e / constants.planck_h


def lens_shift_budget(offset: float, fall_time: float, species: Species) -> tuple[float, float]:
    """Transverse speed and momentum needed to center a beam offset by
    ``offset`` during ``fall_time``: v = offset/t, p = m v."""
    _require_massive(species)
    if fall_time <= 0:
        raise ValueError(f"fall time must be positive, got {fall_time}")
    v = offset / fall_time
    return v, species.mass * v


def knockout_duration(window: float, v_max: float) -> float:
    """How long atom removal must be sustained to select speeds <= v_max
    inside a spatial window: duration = window / v_max."""
    if window <= 0 or v_max <= 0:
        raise ValueError("window and v_max must be positive")
    return window / v_max


def drift(v: float, t: float) -> float:
    """Transverse displacement v*t accumulated during time t."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    return v * t


@dataclass(frozen=True)
class DropScenario:
    """Inputs for one drop-experiment design evaluation."""

    species: Species
    drop_height: float          # m
    slit_width: float           # m
    radial_freq: float          # Hz
    axial_freq: float           # Hz
    beam_window: float = 2e-6   # m, knockout selection window
    lens_offset_max: float = 50e-6  # m
    margin_factor: float = 100.0
    assumed_beam_width: float = 2e-9  # m, confined beam FWHM at the slit
    wavelength_margin: float = 10.0   # lambda must exceed margin * beam width
    drift_budget: float = 2e-9        # m, tolerated lateral drift during the fall

    def __post_init__(self):
        for name in ("drop_height", "slit_width", "radial_freq", "axial_freq",
                     "beam_window", "lens_offset_max", "assumed_beam_width",
                     "drift_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.margin_factor < 1:
            raise ValueError("margin_factor must be >= 1")


@dataclass(frozen=True)
class FeasibilityCheck:
    name: str
    quantity: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">="
    passed: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "quantity": self.quantity,
            "value": self.value,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    """Every computed quantity for a drop scenario plus named verdicts."""

    species: str
    t_fall_s: float
    v_impact_m_s: float
    E_k_ev: float
    lambda_dB_m: float
    E_r_ev: float
    E_z_ev: float
    lambda_r_m: float
    lambda_z_m: float
    p_zero_Ns: float
    fwhm_ground_m: float
    p_limit_Ns: float
    p_threshold_Ns: float
    knockout_duration_s: float
    lens_v_x_m_s: float
    lens_p_x_Ns: float
    checks: tuple[FeasibilityCheck, ...] = field(default_factory=tuple)

    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        out = {
            "species": self.species,
            "t_fall_s": self.t_fall_s,
            "v_impact_m_s": self.v_impact_m_s,
            "E_k_ev": self.E_k_ev,
            "lambda_dB_m": self.lambda_dB_m,
            "zero_point": {"E_r_ev": self.E_r_ev, "E_z_ev": self.E_z_ev,
                           "lambda_r_m": self.lambda_r_m, "lambda_z_m": self.lambda_z_m},
            "p_zero_Ns": self.p_zero_Ns,
            "fwhm_ground_m": self.fwhm_ground_m,
            "p_limit_Ns": self.p_limit_Ns,
            "p_threshold_Ns": self.p_threshold_Ns,
            "knockout_duration_s": self.knockout_duration_s,
            "lens": {"v_x_m_s": self.lens_v_x_m_s, "p_x_Ns": self.lens_p_x_Ns},
            "checks": [c.to_json_dict() for c in self.checks],
            "all_checks_passed": self.passed(),
        }
        return out


def evaluate_scenario(scenario: DropScenario,
                      constants: PhysicalConstants = CONSTANTS) -> FeasibilityReport:
    """Run every calculator on a drop scenario and collect pass/fail checks.

    Checks: (1) the radial zero-point momentum respects the margin-divided
    budget h/slit/margin; (2) the de Broglie wavelength exceeds
    wavelength_margin times the confined beam width; (3) knockout selection
    keeps the fall-time drift within the budget with the post-selection
    transverse momentum still under the threshold.
    """
    sp = scenario.species
    t, v, e_k = free_fall(scenario.drop_height, sp, constants)
    lam = de_broglie(e_k, sp, constants)
    e_r, lam_r, p_r = zero_point(scenario.radial_freq, sp, constants)
    e_z, lam_z, _ = zero_point(scenario.axial_freq, sp, constants)
    fwhm = ground_state_fwhm(scenario.radial_freq, sp, constants)
    p_limit, p_threshold = momentum_budget(scenario.slit_width, scenario.margin_factor,
                                           constants)
    lens_v, lens_p = lens_shift_budget(scenario.lens_offset_max, t, sp)

    # knockout selection targets the drift budget over the fall time
    v_selected = scenario.drift_budget / t
    duration = knockout_duration(scenario.beam_window, v_selected)
    drift_post = drift(v_selected, t)
    p_post = sp.mass * v_selected

    e_threshold = p_threshold ** 2 / (2.0 * sp.mass)
    e_r_joule = e_r * constants.electronvolt
    checks = (
        FeasibilityCheck(
            name="zero_point_momentum_within_budget",
            quantity="radial zero-point momentum [N s]",
            value=p_r, threshold=p_threshold, comparison="<=",
            passed=p_r <= p_threshold,
            note=(f"zero-point energy {e_r_joule:.3g} J vs critical "
                  f"{e_threshold:.3g} J ({e_r_joule / e_threshold:.2g}x)"),
        ),
        FeasibilityCheck(
            name="wavelength_exceeds_beam_width",
            quantity="de Broglie wavelength [m]",
            value=lam, threshold=scenario.wavelength_margin * scenario.assumed_beam_width,
            comparison=">=",
            passed=lam >= scenario.wavelength_margin * scenario.assumed_beam_width,
            note=f"beam width {scenario.assumed_beam_width:.3g} m, margin {scenario.wavelength_margin:g}",
        ),
        FeasibilityCheck(
            name="knockout_drift_within_budget",
            quantity="post-selection drift over the fall [m]",
            value=drift_post, threshold=scenario.drift_budget, comparison="<=",
            passed=(drift_post <= scenario.drift_budget * (1 + 1e-12))
                   and (p_post <= p_threshold),
            note=(f"selection v_max {v_selected:.3g} m/s sustained {duration:.3g} s; "
                  f"post-selection p_x {p_post:.3g} N s vs threshold {p_threshold:.3g}"),
        ),
    )
    return FeasibilityReport(
        species=sp.name,
        t_fall_s=t, v_impact_m_s=v, E_k_ev=e_k, lambda_dB_m=lam,
        E_r_ev=e_r, E_z_ev=e_z, lambda_r_m=lam_r, lambda_z_m=lam_z,
        p_zero_Ns=p_r, fwhm_ground_m=fwhm,
        p_limit_Ns=p_limit, p_threshold_Ns=p_threshold,
        knockout_duration_s=duration,
        lens_v_x_m_s=lens_v, lens_p_x_Ns=lens_p,
        checks=checks,
    )


_SI_PREFIXES = (
    (1.0, ""), (1e-3, "m"), (1e-6, "u"), (1e-9, "n"), (1e-12, "p"), (1e-15, "f"),
)


def format_si(value: float, unit: str, digits: int = 3) -> str:
    """Human-readable value with an SI prefix (neV, nm, pK and friends)."""
    if value == 0:
        return f"0 {unit}"
    mag = abs(value)
    for scale, prefix in _SI_PREFIXES:
        if mag >= scale:
            return f"{value / scale:.{digits}g} {prefix}{unit}"
    scale, prefix = _SI_PREFIXES[-1]
    return f"{value / scale:.{digits}g} {prefix}{unit}"


def render_report(report: FeasibilityReport) -> str:
    """Fixed-width human-readable table for a feasibility report."""
    rows = [
        ("species", report.species),
        ("fall time", format_si(report.t_fall_s, "s")),
        ("impact speed", format_si(report.v_impact_m_s, "m/s")),
        ("kinetic energy", format_si(report.E_k_ev, "eV")),
        ("de Broglie wavelength", format_si(report.lambda_dB_m, "m")),
        ("zero-point E_r", format_si(report.E_r_ev, "eV")),
        ("zero-point E_z", format_si(report.E_z_ev, "eV")),
        ("zero-point lambda_r", format_si(report.lambda_r_m, "m")),
        ("zero-point lambda_z", format_si(report.lambda_z_m, "m")),
        ("zero-point momentum", f"{report.p_zero_Ns:.3g} N s"),
        ("ground-state FWHM", format_si(report.fwhm_ground_m, "m")),
        ("momentum limit h/slit", f"{report.p_limit_Ns:.3g} N s"),
        ("momentum threshold", f"{report.p_threshold_Ns:.3g} N s"),
        ("knockout duration", format_si(report.knockout_duration_s, "s")),
        ("lens shift v_x", format_si(report.lens_v_x_m_s, "m/s")),
        ("lens shift p_x", f"{report.lens_p_x_Ns:.3g} N s"),
    ]
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    lines.append("")
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"[{status}] {c.name}: {c.quantity} = {c.value:.3g} "
                     f"{c.comparison} {c.threshold:.3g}")
        if c.note:
            lines.append(f"       {c.note}")
    return "\n".join(lines) + "\n"
