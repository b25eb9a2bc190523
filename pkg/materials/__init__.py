from .model import Element, TargetMaterial, IonBeam, atomic_density, AVOGADRO
from .presets import (
    C12,
    N15,
    N14,
    C,
    diamond,
    species,
    fig1b_beam,
    sample_beam,
    target_from_config,
    beam_from_config,
)

__all__ = [
    'Element',
    'TargetMaterial',
    'IonBeam',
    'atomic_density',
    'AVOGADRO',
    'C12',
    'N15',
    'N14',
    'C',
    'diamond',
    'species',
    'fig1b_beam',
    'sample_beam',
    'target_from_config',
    'beam_from_config',
]
