"""Shaped-pulse photon generation for a donor in a cavity and a trapped ion, and the heralded entanglement metrics built on their photon overlap."""

__version__ = "0.1.0"

from .cavity import CavityDesign, cavity_rates, classify_region, cooperativity, region_map
from .dynamics import AmplitudeTrajectory, DonorParams, IonParams, TimeGrid, default_grid, integrate, integrate_donor, integrate_ion
from .errors import ConfigError, InfeasibleError, NoPhotonError, NumericalError, OptimizationError
from .optimizer import OptimizationResult, OptimizationSpec, optimize_pulse
from .photonics import PhotonWavefunction, donor_photon, ion_photon, overlap, photon_wavefunction
from .protocol import ProtocolParams, evaluate
from .pulse import PulseShape, envelope_at, ghz, mhz

__all__ = [
    "AmplitudeTrajectory", "CavityDesign", "ConfigError", "DonorParams", "InfeasibleError", "IonParams",
    "NoPhotonError", "NumericalError", "OptimizationError", "OptimizationResult", "OptimizationSpec",
    "PhotonWavefunction", "ProtocolParams", "PulseShape", "TimeGrid", "cavity_rates", "classify_region",
    "cooperativity", "default_grid", "donor_photon", "envelope_at", "evaluate", "ghz", "integrate",
    "integrate_donor", "integrate_ion", "ion_photon", "mhz", "optimize_pulse", "overlap", "photon_wavefunction",
    "region_map",
]
