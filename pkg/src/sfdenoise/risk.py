"""Unbiased MSE estimation for linear filters.

For ``y = x + w`` with zero-mean, uncorrelated noise of variance sigma**2
and a linear filter ``H``,

    ||H y - y||^2 + 2 sigma^2 tr(H) - N sigma^2

is an unbiased estimate of ``E ||x - H y||^2`` whatever the noise law.
For a shift-invariant filter every diagonal entry of ``H`` is the kernel's
origin tap ``h0``, so the trace is ``N h0``. That holds exactly under
periodic extension. Under mirror extension, pixels within ``side // 2`` of
the image border also read themselves through the reflection, and the
exact trace is used instead. Over a sub-region the sums run over the
region's pixels only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sfdenoise.imagecore import DEFAULT_BOUNDARY, Region, as_image, check_boundary, convolve

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class RiskEstimate:
    """Risk estimate split into its terms; ``value`` may be negative."""

    residual_energy: float
    penalty: float
    offset: float
    n_pixels: int

    @property
    def value(self) -> float:
        return self.residual_energy + self.penalty + self.offset

    @classmethod
    def from_terms(cls, residual_energy: float, divergence: float, sigma: float, n_pixels: int):
        s2 = sigma * sigma
        return cls(
            residual_energy=float(residual_energy),
            penalty=2.0 * s2 * divergence,
            offset=-n_pixels * s2,
            n_pixels=n_pixels,
        )


def _taps(kernel) -> np.ndarray:
    return np.asarray(getattr(kernel, "taps", kernel), dtype=np.float64)


def center_tap(kernel) -> float:
    taps = _taps(kernel)
    c = taps.shape[0] // 2
    return float(taps[c, c])


def lsi_divergence(kernel, n_pixels: int) -> float:
    """Divergence of a shift-invariant filter map on ``n_pixels`` pixels: ``n_pixels * h0``."""
    return n_pixels * center_tap(kernel)


def self_weights(start: int, length: int, extent: int, side: int, boundary: str = DEFAULT_BOUNDARY) -> np.ndarray:
    """Per tap index, how many of the rows ``start .. start+length-1`` read themselves through it.

    Rows (or columns) live on an axis of ``extent`` pixels. Tap index ``a``
    reads offset ``side // 2 - a`` from the output pixel.
    """
    r = side // 2
    weights = np.zeros(side)
    weights[r] = length
    if check_boundary(boundary) == "mirror":
        for p in range(start, start + length):
            # p + o reflects onto p when p + o == -p or p + o == 2 (extent - 1) - p
            if 1 <= p and 2 * p <= r:
                weights[r + 2 * p] += 1
            q = extent - 1 - p
            if 1 <= q and 2 * q <= r:
                weights[r - 2 * q] += 1
    return weights


def filter_divergence(kernel, shape: tuple[int, int], region: Region | None = None,
                      boundary: str = DEFAULT_BOUNDARY) -> float:
    """Exact sum of the filter map's diagonal Jacobian entries over ``region``."""
    taps = _taps(kernel)
    region = region or Region(0, 0, shape[1], shape[0])
    wr = self_weights(region.y0, region.h, shape[0], taps.shape[0], boundary)
    wc = self_weights(region.x0, region.w, shape[1], taps.shape[0], boundary)
    return float(wr @ taps @ wc)


def stein_free_risk(
    noisy: np.ndarray,
    region: Region | None,
    kernel,
    sigma: float,
    *,
    boundary: str = DEFAULT_BOUNDARY,
    allow_unnormalized: bool = False,
) -> RiskEstimate:
    """Estimate the squared error of ``convolve(noisy, kernel)`` over ``region``.

    Filtering reads the whole image, extended at its borders, not just the
    region. ``region=None`` means the full image.
    """
    noisy = as_image(noisy)
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    region = region or Region.full(noisy)
    region.check_inside(noisy.shape)
    taps = _taps(kernel)
    if not allow_unnormalized and abs(taps.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"kernel taps sum to {taps.sum()!r}, expected 1")
    filtered = convolve(noisy, taps, boundary)
    d = filtered[region.slices] - noisy[region.slices]
    divergence = filter_divergence(taps, noisy.shape, region, boundary)
    return RiskEstimate.from_terms(float(np.sum(d * d)), divergence, sigma, region.n_pixels)


def oracle_mse(clean: np.ndarray, noisy: np.ndarray, kernel, region: Region | None = None,
               boundary: str = DEFAULT_BOUNDARY) -> float:
    """Actual squared error of the filtered noisy image against the clean one."""
    clean = as_image(clean)
    noisy = as_image(noisy)
    if clean.shape != noisy.shape:
        raise ValueError(f"dimension mismatch: {clean.shape} vs {noisy.shape}")
    region = region or Region.full(clean)
    region.check_inside(clean.shape)
    d = clean[region.slices] - convolve(noisy, kernel, boundary)[region.slices]
    return float(np.sum(d * d))
