"""Synthetic additive noise and single-image noise-level estimation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from sfdenoise.imagecore import PEAK, as_image, convolve


class Distribution(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


# median(|highpass|) divisors
MEDIAN_DIVISOR = {
    Distribution.GAUSSIAN: 0.6745,
    Distribution.LAPLACIAN: 0.4901,
}

HIGHPASS = np.array(
    [[-1.0, -1.0, -1.0],
     [-1.0, 8.0, -1.0],
     [-1.0, -1.0, -1.0]]
) / 9.0


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean i.i.d. noise with standard deviation ``sigma`` (gray levels).

    Samples come from numpy's PCG64 bit generator seeded with ``seed``.
    """

    distribution: Distribution
    sigma: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


def _open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    # (k + 1/2) / 2**53 never hits 0 or 1, so the log below stays finite
    k = rng.integers(0, 1 << 53, size=shape, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * 2.0**-53


def sample_noise(spec: NoiseSpec, shape) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if spec.distribution is Distribution.GAUSSIAN:
        return spec.sigma * rng.standard_normal(shape)
    # Laplace inverse CDF; scale sigma / sqrt(2) gives variance sigma**2
    b = spec.sigma / math.sqrt(2.0)
    u = _open_uniform(rng, shape) - 0.5
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def corrupt(img: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Return ``img + noise``, unclamped; deterministic for a fixed spec."""
    img = as_image(img)
    return img + sample_noise(spec, img.shape)


def estimate_sigma(img: np.ndarray, distribution=Distribution.GAUSSIAN) -> float:
    """Noise standard deviation from the median absolute highpass response.

    The 3x3 highpass runs with mirror boundary and every pixel, border
    included, enters the median; an even count averages the two middle values.
    """
    img = as_image(img)
    if min(img.shape) < 3:
        raise ValueError(f"image must be at least 3x3 for noise estimation, got {img.shape}")
    divisor = MEDIAN_DIVISOR[Distribution(distribution)]
    response = convolve(img, HIGHPASS, boundary="mirror")
    return float(np.median(np.abs(response))) / divisor


def sigma_for_psnr(target_psnr: float) -> float:
    """Noise standard deviation whose nominal input PSNR is ``target_psnr`` dB."""
    if not math.isfinite(target_psnr):
        raise ValueError(f"target PSNR must be finite, got {target_psnr}")
    return PEAK / 10.0 ** (target_psnr / 20.0)
