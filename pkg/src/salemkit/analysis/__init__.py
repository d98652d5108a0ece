"""Estimators, verification suites and sharpness experiments over built measures."""
from .experiments import (conv_sharpness_geometric, conv_sharpness_nongeometric, non_increasing_within,
                          restriction_experiment, strictly_increasing)
from .fits import frostman_fit, lower_mass_check
from .fourier import fourier_decay_profile, increment_concentration
from .regions import ExponentRegion
from .report import ExperimentReport, report_from_dict
from .resonance import bohr_points, resonance_check, wn_vn_energy
from .sparsity import sparsity_certificate
from .suites import SUITES, run_suite

__all__ = [
    "ExperimentReport", "ExponentRegion", "SUITES", "bohr_points", "conv_sharpness_geometric",
    "conv_sharpness_nongeometric", "fourier_decay_profile", "frostman_fit", "increment_concentration",
    "lower_mass_check", "non_increasing_within", "report_from_dict", "resonance_check",
    "restriction_experiment", "run_suite", "sparsity_certificate", "strictly_increasing", "wn_vn_energy",
]
