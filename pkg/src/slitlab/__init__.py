"""Single-slit matter-wave diffraction workbench.

Simulates the wide-beam single-slit experiment and a sub-wavelength
fine-beam variant under two competing predictive models, reproduces the
quantitative feasibility calculations for implementing the experiment with
trapped ions and atoms, and drives everything from a deterministic CLI.
"""

__version__ = "0.1.0"

from .quantities import CONSTANTS, PhysicalConstants, Species, rest_energy_of, species_lookup
from .patterns import IntensityProfile, PatternFeatures, check_eq2, envelope, find_extrema, fringe_mask, visibility
from .wavefield import ComplexField, Grid1D, SourceSpec, fraunhofer_intensity, intensity_of, make_slit_field, propagate
from .detector import BuildUp, build_up, sample_hits
from .models import DeflectionModel, Prediction, Scenario, predict_H0, predict_H1, sweep_xb, uncertainty_product
from .feasibility import DropScenario, FeasibilityReport, evaluate_scenario

__all__ = [
    "CONSTANTS", "PhysicalConstants", "Species", "species_lookup", "rest_energy_of",
    "IntensityProfile", "PatternFeatures", "find_extrema", "check_eq2", "envelope",
    "fringe_mask", "visibility",
    "ComplexField", "Grid1D", "SourceSpec", "make_slit_field", "propagate",
    "intensity_of", "fraunhofer_intensity",
    "BuildUp", "sample_hits", "build_up",
    "Scenario", "DeflectionModel", "Prediction", "predict_H0", "predict_H1",
    "sweep_xb", "uncertainty_product",
    "DropScenario", "FeasibilityReport", "evaluate_scenario",
    "__version__",
]
