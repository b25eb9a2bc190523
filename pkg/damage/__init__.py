from .histograms import (
    DepthHistogram,
    DepthSummary,
    build_depth_histograms,
    peak_depth,
    depth_delta,
    vacancy_yield,
    nv_density_profile,
    summarize,
    comparison_report,
    default_bin_width,
)
from .results import ResultsFile, results_payload, write_results, read_results, parse_results

__all__ = [
    'DepthHistogram',
    'DepthSummary',
    'build_depth_histograms',
    'peak_depth',
    'depth_delta',
    'vacancy_yield',
    'nv_density_profile',
    'summarize',
    'comparison_report',
    'default_bin_width',
    'ResultsFile',
    'results_payload',
    'write_results',
    'read_results',
    'parse_results',
]
