# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled accumulation loops for line-profile synthesis.

These are the hot kernels of spectrum synthesis and of every model
evaluation inside the least-squares fitters: a comb of a few hundred
lines accumulated onto a grid of up to ~1e4 points, thousands of times
per fit.  The pure-Python twin lives in `_kernels_py`.
"""
from libc.math cimport exp, M_PI


def lorentzian_sum(const double[::1] centers, const double[::1] weights,
                   double fwhm, const double[::1] grid, double[::1] out):
    """Accumulate unit-area Lorentzians (FWHM `fwhm`) into `out`."""
    cdef Py_ssize_t i, j
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t m = grid.shape[0]
    cdef double hw = 0.5 * fwhm
    cdef double hw2 = hw * hw
    cdef double pref = hw / M_PI
    cdef double w, d
    for i in range(n):
        w = weights[i] * pref
        for j in range(m):
            d = grid[j] - centers[i]
            out[j] += w / (d * d + hw2)


def gaussian_sum(const double[::1] centers, const double[::1] weights,
                 double sigma, const double[::1] grid, double[::1] out):
    """Accumulate unit-area Gaussians (std dev `sigma`) into `out`."""
    cdef Py_ssize_t i, j
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t m = grid.shape[0]
    cdef double pref = 1.0 / (sigma * 2.5066282746310002)  # sqrt(2*pi)
    cdef double inv2s2 = 1.0 / (2.0 * sigma * sigma)
    cdef double w, d
    for i in range(n):
        w = weights[i] * pref
        for j in range(m):
            d = grid[j] - centers[i]
            out[j] += w * exp(-d * d * inv2s2)
