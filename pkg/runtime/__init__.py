from .config import logger, set_run_id, resolve_threads, load_config, merge_overrides, TOOL_VERSION
from .errors import (
    NvForgeError,
    UsageError,
    ConfigurationError,
    PhysicsError,
    ScatteringError,
    FitError,
    IndeterminateThicknessError,
    EmptyHistogramError,
    DepthMismatchError,
    InsufficientSamplesError,
    UnreachableTargetError,
    LinewidthBelowLifetimeError,
)
from .manifest import RunManifest, config_hash

__all__ = [
    'logger',
    'set_run_id',
    'resolve_threads',
    'load_config',
    'merge_overrides',
    'TOOL_VERSION',
    'NvForgeError',
    'UsageError',
    'ConfigurationError',
    'PhysicsError',
    'ScatteringError',
    'FitError',
    'IndeterminateThicknessError',
    'EmptyHistogramError',
    'DepthMismatchError',
    'InsufficientSamplesError',
    'UnreachableTargetError',
    'LinewidthBelowLifetimeError',
    'RunManifest',
    'config_hash',
]
