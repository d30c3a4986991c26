"""Compiled inner loops for the per-block risk objective.

A "window" is the mirror-padded image cut around a region: the region's
``h x w`` pixels plus a margin of ``side // 2`` on every side, so a valid
convolution over the window yields the filtered region.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def fill_gaussian_taps(sigma_x, sigma_y, theta, taps):
    side = taps.shape[0]
    r = side // 2
    c = math.cos(theta)
    s = math.sin(theta)
    ix = 0.5 / (sigma_x * sigma_x)
    iy = 0.5 / (sigma_y * sigma_y)
    total = 0.0
    for a in range(side):
        y = a - r
        for b in range(side):
            x = b - r
            xt = x * c + y * s
            yt = -x * s + y * c
            v = math.exp(-(xt * xt * ix + yt * yt * iy))
            taps[a, b] = v
            total += v
    for a in range(side):
        for b in range(side):
            taps[a, b] /= total


@njit(cache=True, nogil=True)
def filter_window(window, taps, out):
    h, w = out.shape
    side = taps.shape[0]
    e = side - 1
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(side):
                for b in range(side):
                    acc += taps[a, b] * window[i + e - a, j + e - b]
            out[i, j] = acc


@njit(cache=True, nogil=True)
def residual_energy(window, taps, h, w):
    """Sum over the region of (filtered - observed)^2."""
    side = taps.shape[0]
    e = side - 1
    r = side // 2
    total = 0.0
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(side):
                for b in range(side):
                    acc += taps[a, b] * window[i + e - a, j + e - b]
            d = acc - window[i + r, j + r]
            total += d * d
    return total


@njit(cache=True, nogil=True)
def residual_energy_symmetric(window, taps, h, w, scratch):
    """:func:`residual_energy` for point-symmetric taps.

    Opposite taps share a multiply, and the tap loop runs outermost so the
    inner loop streams along window rows. ``scratch`` needs ``h x w`` room.
    """
    side = taps.shape[0]
    e = side - 1
    r = side // 2
    t = taps[r, r]
    for i in range(h):
        for j in range(w):
            scratch[i, j] = (t - 1.0) * window[i + r, j + r]
    for a in range(r + 1):
        for b in range(side if a < r else r):
            t = taps[a, b]
            for i in range(h):
                for j in range(w):
                    scratch[i, j] += t * (window[i + e - a, j + e - b] + window[i + a, j + b])
    total = 0.0
    for i in range(h):
        for j in range(w):
            total += scratch[i, j] * scratch[i, j]
    return total


@njit(cache=True, nogil=True)
def divergence(taps, wr, wc):
    """Trace of the filter map over a region given per-tap self-read counts."""
    side = taps.shape[0]
    total = 0.0
    for a in range(side):
        if wr[a] != 0.0:
            for b in range(side):
                total += wr[a] * wc[b] * taps[a, b]
    return total


@njit(cache=True, nogil=True)
def gaussian_risk(window, h, w, sigma_x, sigma_y, theta, sigma2, taps, wr, wc, scratch):
    """Risk estimate of the oriented Gaussian over an ``h x w`` region.

    ``taps`` (side x side) and ``scratch`` (at least h x w) are work buffers.
    """
    fill_gaussian_taps(sigma_x, sigma_y, theta, taps)
    n = h * w
    resid = residual_energy_symmetric(window, taps, h, w, scratch)
    return resid + 2.0 * sigma2 * divergence(taps, wr, wc) - n * sigma2


def warmup(side=3):
    win = np.zeros((side + 1, side + 1))
    taps = np.empty((side, side))
    ones = np.ones(side)
    gaussian_risk(win, 2, 2, 1.0, 1.0, 0.0, 1.0, taps, ones, ones, np.empty((2, 2)))
    filter_window(win, taps, np.empty((2, 2)))
