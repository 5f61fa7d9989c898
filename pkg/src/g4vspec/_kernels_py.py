"""Pure-NumPy twin of the compiled `_kernels` extension.

Same signatures, same semantics; used when the extension is not built or
when G4VSPEC_PURE_PYTHON is set.  Lines are processed in chunks so the
broadcast temporary stays small.
"""
import numpy as np

_CHUNK = 128


def lorentzian_sum(centers, weights, fwhm, grid, out):
    hw = 0.5 * fwhm
    pref = hw / np.pi
    for k in range(0, len(centers), _CHUNK):
        c = centers[k : k + _CHUNK, None]
        w = weights[k : k + _CHUNK, None]
        out += (w * pref / ((grid[None, :] - c) ** 2 + hw * hw)).sum(axis=0)


def gaussian_sum(centers, weights, sigma, grid, out):
    pref = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    for k in range(0, len(centers), _CHUNK):
        c = centers[k : k + _CHUNK, None]
        w = weights[k : k + _CHUNK, None]
        out += (w * pref * np.exp(-((grid[None, :] - c) ** 2) * inv2s2)).sum(axis=0)
