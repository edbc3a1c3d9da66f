"""Spin-noise spectra, RF response and sensitivity of alkali optically pumped magnetometers."""

from .drift import DriftSystem, RateSet, StabilityWarning, assemble_system
from .equilibrium import SpinTempState, equal_time_covariance, solve_beta, transverse_variances
from .operators import cartesian_projection, multipole_layout
from .optics import ProbeSpec, probe_couplings, species
from .sensing import DriveSpec, coherent_response, lockin_statistics, snr_and_sensitivity, sql_limit
from .spectra import measured_psd, noise_dip, qrt_spectrum, resonance_frequency

__version__ = "0.1.0"

__all__ = [
    "DriftSystem",
    "RateSet",
    "StabilityWarning",
    "assemble_system",
    "SpinTempState",
    "equal_time_covariance",
    "solve_beta",
    "transverse_variances",
    "cartesian_projection",
    "multipole_layout",
    "ProbeSpec",
    "probe_couplings",
    "species",
    "DriveSpec",
    "coherent_response",
    "lockin_statistics",
    "snr_and_sensitivity",
    "sql_limit",
    "measured_psd",
    "noise_dip",
    "qrt_spectrum",
    "resonance_frequency",
]
