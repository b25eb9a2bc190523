from .scattering import (
    zbl_screening,
    screening_length,
    reduced_energy,
    rutherford_angle,
    scattering_angle_quadrature,
    scattering_angle_magic,
)
from .stopping import electronic_stopping, stopping_coefficient, robinson_damage_energy, nrt_displacements
from .rng import RngStream, child_id
from .records import CollisionEvent, CascadeRecord, DamageMode, ImplantationResult, Terminal
from .engine import transport_ion, run_implantation, IONS_PER_CHUNK

__all__ = [
    'zbl_screening',
    'screening_length',
    'reduced_energy',
    'rutherford_angle',
    'scattering_angle_quadrature',
    'scattering_angle_magic',
    'electronic_stopping',
    'stopping_coefficient',
    'robinson_damage_energy',
    'nrt_displacements',
    'RngStream',
    'child_id',
    'CollisionEvent',
    'CascadeRecord',
    'DamageMode',
    'ImplantationResult',
    'Terminal',
    'transport_ion',
    'run_implantation',
    'IONS_PER_CHUNK',
]
