from .etalon import (
    RefractiveIndex,
    EtalonModel,
    slab_modulation,
    fresnel_reflectivity,
    fringe_visibility,
    fringe_spacing,
    DEFAULT_INDEX,
)
from .spectrum import Spectrum, synthesize_psb_spectrum, psb_envelope, read_spectrum, write_spectrum
from .fit import ThicknessFit, fit_thickness, periodogram

__all__ = [
    'RefractiveIndex',
    'EtalonModel',
    'slab_modulation',
    'fresnel_reflectivity',
    'fringe_visibility',
    'fringe_spacing',
    'DEFAULT_INDEX',
    'Spectrum',
    'synthesize_psb_spectrum',
    'psb_envelope',
    'read_spectrum',
    'write_spectrum',
    'ThicknessFit',
    'fit_thickness',
    'periodogram',
]
