from .model import (
    EmitterModel,
    PleScanConfig,
    PleScan,
    emitter_from_config,
    scan_from_config,
    read_scan,
    write_scan,
)
from .simulate import power_broadened_width, lineshape, simulate_ple_scan, expected_single_window_profile
from .fitting import GaussianLineFit, fit_line_gaussian, voigt_fwhm_oracle, olivero_fwhm, gauss, FWHM_PER_SIGMA

__all__ = [
    'EmitterModel',
    'PleScanConfig',
    'PleScan',
    'emitter_from_config',
    'scan_from_config',
    'read_scan',
    'write_scan',
    'power_broadened_width',
    'lineshape',
    'simulate_ple_scan',
    'expected_single_window_profile',
    'GaussianLineFit',
    'fit_line_gaussian',
    'voigt_fwhm_oracle',
    'olivero_fwhm',
    'gauss',
    'FWHM_PER_SIGMA',
]
