"""Line-profile kernels with a compiled core and a NumPy fallback.

At import time the Cython extension `g4vspec._kernels` is preferred; if it
is missing (or G4VSPEC_PURE_PYTHON is set to a non-empty value) the
pure-NumPy implementation is used instead.  `BACKEND` records the choice.
"""
import os

import numpy as np

if os.environ.get("G4VSPEC_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"


def _as_vec(x):
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a 1-D array")
    return a


def lorentzian_sum(centers, weights, fwhm: float, grid, out=None):
    """Sum of unit-area Lorentzians, weight[i] at centers[i], FWHM fwhm."""
    if fwhm <= 0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    centers = _as_vec(centers)
    weights = _as_vec(weights)
    grid = _as_vec(grid)
    if centers.shape != weights.shape:
        raise ValueError("centers and weights must have the same length")
    if out is None:
        out = np.zeros_like(grid)
    _impl.lorentzian_sum(centers, weights, float(fwhm), grid, out)
    return out


def gaussian_sum(centers, weights, sigma: float, grid, out=None):
    """Sum of unit-area Gaussians, weight[i] at centers[i], std dev sigma."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    centers = _as_vec(centers)
    weights = _as_vec(weights)
    grid = _as_vec(grid)
    if centers.shape != weights.shape:
        raise ValueError("centers and weights must have the same length")
    if out is None:
        out = np.zeros_like(grid)
    _impl.gaussian_sum(centers, weights, float(sigma), grid, out)
    return out
