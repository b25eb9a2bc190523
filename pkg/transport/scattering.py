"""ZBL universal potential and the two scattering-angle kernels.

Reduced units throughout: distances in screening lengths `a`, energies as the
reduced center-of-mass energy `epsilon = a E_cm / (Z1 Z2 e^2)`. With
V(R) = phi(R) / R the radial equation reads 1 - V(R)/epsilon - b^2/R^2 = 0.

`scattering_angle_magic` is the production kernel: the vectorised closed form
plus a residual table, built once per process from the quadrature, that removes
the closed form's few-percent error near epsilon ~ 0.1.
`scattering_angle_quadrature` evaluates the classical scattering integral and
serves as its oracle.
"""

import math
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq

from runtime.config import logger
from runtime.errors import ScatteringError

ArrayLike = Union[float, np.ndarray]

BOHR_RADIUS_NM = 0.0529177210903
E2_EV_NM = 1.439964547  # e^2 / (4 pi eps0)

ZBL_C = np.array([0.18175, 0.50986, 0.28022, 0.02817])
ZBL_D = np.array([3.1998, 0.94229, 0.4029, 0.20162])

# Biersack-Haggmark constants fitted to the ZBL potential
MAGIC_C1 = 0.99229
MAGIC_C2 = 0.011615
MAGIC_C3 = 0.0071222
MAGIC_C4 = 14.813
MAGIC_C5 = 9.3066

QUADRATURE_NODES = 64

# residual table: log10(epsilon) rows, sqrt(b / b_max) columns
TABLE_LOG_EPS = (-5.0, 3.0)
TABLE_EPS_POINTS = 97
TABLE_B_MAX = 12.0
TABLE_B_POINTS = 97
_NEWTON_MAX_ITER = 60


def screening_length(z1: int, z2: int) -> float:
    """Universal screening length in nm."""
    return 0.88534 * BOHR_RADIUS_NM / (z1 ** 0.23 + z2 ** 0.23)


def reduced_energy(energy_ev: ArrayLike, z1: int, m1: float, z2: int, m2: float) -> ArrayLike:
    """Lab energy (eV) of the projectile -> reduced center-of-mass energy."""
    a = screening_length(z1, z2)
    return a * np.asarray(energy_ev) * m2 / ((m1 + m2) * z1 * z2 * E2_EV_NM)


def zbl_screening(x: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    value = np.tensordot(ZBL_C, np.exp(-np.multiply.outer(ZBL_D, x)), axes=1)
    return float(value) if value.ndim == 0 else value


def zbl_screening_derivative(x: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    value = -np.tensordot(ZBL_C * ZBL_D, np.exp(-np.multiply.outer(ZBL_D, x)), axes=1)
    return float(value) if value.ndim == 0 else value


def rutherford_angle(epsilon: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Unscreened Coulomb center-of-mass angle in reduced units."""
    return 2.0 * np.arctan2(1.0, 2.0 * np.asarray(epsilon) * np.asarray(b))


def _reduced_potential(r: ArrayLike) -> ArrayLike:
    return zbl_screening(r) / r


def _closest_approach_scalar(epsilon: float, b: float) -> float:
    def radial(r: float) -> float:
        return r * r - r * zbl_screening(r) / epsilon - b * b

    upper = 0.5 / epsilon + math.sqrt(0.25 / epsilon ** 2 + b * b)
    upper = upper * (1.0 + 1e-12) + 1e-300
    try:
        root, info = brentq(radial, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                            maxiter=500, full_output=True)
    except (ValueError, RuntimeError) as e:
        raise ScatteringError(f"closest-approach root find failed: {e}", epsilon, b)
    if not info.converged or not root > 0:
        raise ScatteringError("closest-approach root find did not converge", epsilon, b)
    return root


def _gauss_mehler(epsilon: np.ndarray, b: np.ndarray, r0: np.ndarray, nodes: int) -> np.ndarray:
    """Scattering integral for arrays of (epsilon, b, R0); b must be positive."""
    j = np.arange(1, nodes // 2 + 1)
    u = np.cos((2 * j - 1) * np.pi / (2 * nodes))
    one_minus_u2 = (1.0 - u) * (1.0 + u)
    eps = epsilon[..., None]
    rr = r0[..., None]
    f = (b[..., None] / rr) ** 2 * one_minus_u2 + (_reduced_potential(rr) - _reduced_potential(rr / u)) / eps
    h = np.sqrt(one_minus_u2 / f)
    return np.pi - (2.0 * b / r0) * (np.pi / nodes) * np.sum(h, axis=-1)


def scattering_angle_quadrature(epsilon: float, b: float, nodes: int = QUADRATURE_NODES) -> float:
    """Center-of-mass angle from the scattering integral (Gauss-Mehler quadrature).

    Substituting u = R0 / r gives theta = pi - (2 b / R0) * int_0^1 du / sqrt(F),
    evaluated with Chebyshev nodes on the even extension of the integrand.
    F is written as (b/R0)^2 (1 - u^2) + (V(R0) - V(R0/u)) / epsilon so that
    nothing cancels near the turning point.
    """
    if not epsilon > 0:
        raise ScatteringError("reduced energy must be positive", epsilon, b)
    if b < 0:
        raise ScatteringError("impact parameter must be non-negative", epsilon, b)
    if nodes < 32 or nodes % 2:
        raise ValueError("quadrature needs an even number of nodes, at least 32")
    if b == 0.0:
        return math.pi

    r0 = _closest_approach_scalar(epsilon, b)
    theta = float(_gauss_mehler(np.array([epsilon]), np.array([b]), np.array([r0]), nodes)[0])
    if not np.isfinite(theta):
        raise ScatteringError("scattering integral is not finite", epsilon, b)
    return min(max(theta, 0.0), math.pi)


def closest_approach(epsilon: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorised distance of closest approach by safeguarded Newton iteration.

    g(R) = R^2 - R phi(R)/epsilon - b^2 is negative below the root and positive
    at the unscreened turning point, which brackets the search.
    """
    epsilon = np.asarray(epsilon, dtype=float)
    b = np.asarray(b, dtype=float)
    hi = 0.5 / epsilon + np.sqrt(0.25 / epsilon ** 2 + b * b)
    lo = np.zeros_like(hi)
    r = hi.copy()
    b2 = b * b
    for _ in range(_NEWTON_MAX_ITER):
        phi = zbl_screening(r)
        dphi = zbl_screening_derivative(r)
        g = r * r - r * phi / epsilon - b2
        dg = 2.0 * r - (phi + r * dphi) / epsilon
        positive = g > 0
        hi = np.where(positive, r, hi)
        lo = np.where(positive, lo, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r - g / dg
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        r_new = np.where(bad, 0.5 * (lo + hi), step)
        done = np.abs(r_new - r) <= 1e-12 * np.maximum(r, 1e-300)
        r = r_new
        if np.all(done):
            break
    return r


def _magic_cos_half(epsilon: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Biersack-Haggmark cos(theta/2), before the residual correction."""
    r0 = closest_approach(epsilon, b)
    phi = zbl_screening(r0)
    dphi = zbl_screening_derivative(r0)
    v = phi / r0
    dv = dphi / r0 - phi / (r0 * r0)

    sqrt_eps = np.sqrt(epsilon)
    alpha = 1.0 + MAGIC_C1 / sqrt_eps
    beta = (MAGIC_C2 + sqrt_eps) / (MAGIC_C3 + sqrt_eps)
    gamma = (MAGIC_C4 + epsilon) / (MAGIC_C5 + epsilon)
    a_term = 2.0 * alpha * epsilon * np.power(b, beta)
    # gamma / (sqrt(1 + A^2) - A) without the cancellation at large A
    g_term = gamma * (np.sqrt(1.0 + a_term * a_term) + a_term)
    rho = -2.0 * (epsilon - v) / dv
    delta = a_term * (r0 - b) / (1.0 + g_term)
    return (b + rho + delta) / (r0 + rho)


@lru_cache(maxsize=1)
def magic_residual_table() -> RegularGridInterpolator:
    """Quadrature minus closed-form cos(theta/2) on a (log10 epsilon, sqrt(b/b_max)) grid."""
    log_eps = np.linspace(TABLE_LOG_EPS[0], TABLE_LOG_EPS[1], TABLE_EPS_POINTS)
    t = np.linspace(0.0, 1.0, TABLE_B_POINTS)
    ee, tt = np.meshgrid(10.0 ** log_eps, t, indexing="ij")
    bb = TABLE_B_MAX * tt * tt
    residual = np.zeros_like(ee)
    inner = bb > 0
    eps, b = ee[inner], bb[inner]
    exact = _gauss_mehler(eps, b, closest_approach(eps, b), QUADRATURE_NODES)
    residual[inner] = np.cos(np.clip(exact, 0.0, np.pi) / 2.0) - _magic_cos_half(eps, b)
    bad = ~np.isfinite(residual)
    if bad.any():
        logger.warning(f"⚠️ {int(bad.sum())} MAGIC residual entries are not finite; using the bare closed form there")
        residual[bad] = 0.0
    return RegularGridInterpolator((log_eps, t), residual, method="linear")


def scattering_angle_magic(epsilon: ArrayLike, b: ArrayLike, corrected: bool = True) -> ArrayLike:
    """Biersack-Haggmark closed-form center-of-mass scattering angle.

    With `corrected` the tabulated quadrature residual is added to cos(theta/2);
    queries outside the table use the nearest edge, and beyond `TABLE_B_MAX`
    the closed form is used as is.
    """
    scalar = np.ndim(epsilon) == 0 and np.ndim(b) == 0
    epsilon, b = np.broadcast_arrays(np.asarray(epsilon, dtype=float), np.asarray(b, dtype=float))
    epsilon = np.atleast_1d(epsilon).astype(float)
    b = np.atleast_1d(b).astype(float)

    cos_half = _magic_cos_half(epsilon, b)
    if corrected and cos_half.size:
        log_eps = np.clip(np.log10(epsilon), *TABLE_LOG_EPS)
        t = np.sqrt(np.clip(b / TABLE_B_MAX, 0.0, 1.0))
        points = np.stack([log_eps.ravel(), t.ravel()], axis=-1)
        residual = magic_residual_table()(points).reshape(cos_half.shape)
        cos_half = cos_half + np.where(b <= TABLE_B_MAX, residual, 0.0)
    cos_half = np.clip(cos_half, 0.0, 1.0)
    theta = np.where(b == 0.0, np.pi, 2.0 * np.arccos(cos_half))
    return float(theta[0]) if scalar else theta
