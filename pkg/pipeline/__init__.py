from .core import FigureReproducer, REPRODUCE_SEED, DEFAULT_IONS
from .targets import Target

__all__ = [
    'FigureReproducer',
    'REPRODUCE_SEED',
    'DEFAULT_IONS',
    'Target',
]
