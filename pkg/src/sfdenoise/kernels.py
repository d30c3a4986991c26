"""Truncated, oriented, normalized Gaussian smoothing kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIGMA_MIN = 0.3


def sigma_bounds(side: int) -> tuple[float, float]:
    """Admissible spread range ``[0.3, side / 2]`` for a kernel of the given side."""
    return SIGMA_MIN, side / 2.0


@dataclass(frozen=True)
class KernelParams:
    """Spreads along the rotated axes and the rotation angle (radians).

    ``sigma_x`` acts along the direction at angle ``theta`` from the column
    axis (rows grow downward), ``sigma_y`` across it.
    """

    sigma_x: float
    sigma_y: float
    theta: float = 0.0

    def check(self, side: int) -> None:
        lo, hi = sigma_bounds(side)
        for name, value in (("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)):
            if not (lo <= value <= hi):
                raise ValueError(f"{name}={value} outside [{lo}, {hi}] for side {side}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")


@dataclass(frozen=True, eq=False)
class Kernel:
    """Square odd-sided filter mask; ``center_tap`` is the weight at the origin."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
            raise ValueError(f"kernel taps must be square with odd side, got {taps.shape}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def side(self) -> int:
        return self.taps.shape[0]

    @property
    def center_tap(self) -> float:
        c = self.side // 2
        return float(self.taps[c, c])

    @classmethod
    def delta(cls, side: int = 1) -> "Kernel":
        taps = np.zeros((side, side))
        taps[side // 2, side // 2] = 1.0
        return cls(taps)


def gaussian_taps(sigma_x: float, sigma_y: float, theta: float, side: int) -> np.ndarray:
    """Normalized taps; row index is the y offset, column index the x offset."""
    r = side // 2
    offs = np.arange(-r, r + 1, dtype=np.float64)
    y, x = np.meshgrid(offs, offs, indexing="ij")
    c, s = math.cos(theta), math.sin(theta)
    xt = x * c + y * s
    yt = -x * s + y * c
    g = np.exp(-0.5 * (xt * xt / (sigma_x * sigma_x) + yt * yt / (sigma_y * sigma_y)))
    return g / g.sum()


def make_kernel(params: KernelParams, side: int = 9) -> Kernel:
    if side <= 0 or side % 2 == 0:
        raise ValueError(f"kernel side must be a positive odd integer, got {side}")
    params.check(side)
    return Kernel(gaussian_taps(params.sigma_x, params.sigma_y, params.theta, side))
