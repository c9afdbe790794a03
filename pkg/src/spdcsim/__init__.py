"""spdcsim: coincidence spectra of pulsed collinear type-II down-conversion.

A numpy/scipy library plus a small CLI for simulating the joint and
conditional spectral densities of photon pairs from a pulsed type-II
source, locating the symmetrization-induced double peak, scanning its
pulse-duration boundary and fitting the crystal axis angle to measured
coincidence spectra.
"""

__version__ = "0.1.0"

from .analysis import (
    BracketError,
    DataFormatError,
    ExperimentalSpectrum,
    FitConvergenceError,
    FitResult,
    Peak,
    PeakSet,
    SpectrumStructureError,
    ZeroVarianceError,
    cod_r2,
    doubling_threshold,
    find_spectral_peaks,
    fit_axis_angle,
    model_density,
    peak_separation_vs_detuning,
    read_experimental_csv,
    write_experimental_csv,
)
from .config import ConfigError, RunConfig, load_run_config
from .dispersion import (
    BUILTIN_SETS,
    C_NM_PER_FS,
    C_UM_PER_FS,
    DispersionError,
    PhaseMatchingError,
    SellmeierSet,
    WavelengthRangeError,
    extraordinary_index,
    get_sellmeier,
    mismatch_12,
    mismatch_21,
    omega_to_wavelength,
    ordinary_index,
    principal_extraordinary_index,
    sellmeier_from_dict,
    solve_phase_matching_angle,
    wavelength_to_omega,
)
from .spectra import (
    CrystalConfig,
    JointSpectralMap,
    Polarization,
    PumpPulse,
    Spectrum,
    conditional_density_polarized,
    conditional_spectrum,
    joint_density,
    joint_density_map,
    pump_amplitude_factor,
    pump_intensity_factor,
    read_map_csv,
    read_spectrum_csv,
    sinc,
    wavelength_grid,
    write_map_csv,
    write_spectrum_csv,
)
