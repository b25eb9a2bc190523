from .stats import (
    LinewidthSample,
    LognormalFit,
    EcdfBand,
    lognormal_mle,
    ecdf_with_band,
    dkw_epsilon,
    fraction_below,
    median_by_thickness,
    threshold_report,
    samples_from_frame,
    samples_to_frame,
)
from .reference import (
    load_reference,
    population_parameters,
    reference_population,
    sigma_from_mean_median,
    load_linewidths,
    export_region_table,
)

__all__ = [
    'LinewidthSample',
    'LognormalFit',
    'EcdfBand',
    'lognormal_mle',
    'ecdf_with_band',
    'dkw_epsilon',
    'fraction_below',
    'median_by_thickness',
    'threshold_report',
    'samples_from_frame',
    'samples_to_frame',
    'load_reference',
    'population_parameters',
    'reference_population',
    'sigma_from_mean_median',
    'load_linewidths',
    'export_region_table',
]
