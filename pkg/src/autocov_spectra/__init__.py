"""Spectra of large-dimensional lag-tau sample autocovariance matrices."""

__version__ = "0.1.0"

from .autocov import AutocovSet, apply_shift, gamma_x, lag_autocov
from .datagen import Dist, Panel, PanelSpec, Truncation, generate_panel, read_panel_csv, standardize_panel
from .empirics import (
    EsdSample,
    FitReport,
    empirical_stieltjes,
    esd_cdf,
    ks_distance,
    lemma_diagnostics,
    run_experiment,
)
from .factor import FactorModelSpec, estimate_num_factors, simulate_factor_panel
from .linalg import NumericalError, Spectrum, complex_resolvent_trace, sym_eigvals
from .lsd import Law, LsdModel, cdf, density, density_curve, moments, solve_stieltjes, support_endpoints

__all__ = [
    "__version__",
    "AutocovSet",
    "apply_shift",
    "gamma_x",
    "lag_autocov",
    "Dist",
    "Panel",
    "PanelSpec",
    "Truncation",
    "generate_panel",
    "read_panel_csv",
    "standardize_panel",
    "EsdSample",
    "FitReport",
    "empirical_stieltjes",
    "esd_cdf",
    "ks_distance",
    "lemma_diagnostics",
    "run_experiment",
    "FactorModelSpec",
    "estimate_num_factors",
    "simulate_factor_panel",
    "NumericalError",
    "Spectrum",
    "complex_resolvent_trace",
    "sym_eigvals",
    "Law",
    "LsdModel",
    "cdf",
    "density",
    "density_curve",
    "moments",
    "solve_stieltjes",
    "support_endpoints",
]
