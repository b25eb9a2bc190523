from .interference import (
    PhotonSource,
    FilterWindow,
    lifetime_limited_fwhm,
    hom_visibility,
    hom_visibility_monte_carlo,
    max_linewidth_for_visibility,
    visibility_curve,
    barrett_kok_gain,
)

__all__ = [
    'PhotonSource',
    'FilterWindow',
    'lifetime_limited_fwhm',
    'hom_visibility',
    'hom_visibility_monte_carlo',
    'max_linewidth_for_visibility',
    'visibility_curve',
    'barrett_kok_gain',
]
