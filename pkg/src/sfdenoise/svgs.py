"""Spatially-varying Gaussian smoothing driven by per-block risk minimization.

The image is cut into ``block x block`` tiles. For each tile the kernel
orientation comes from the structure tensor of the tile plus its apron,
then the two spreads are chosen by minimizing the unbiased risk estimate
over that same apron-extended window. Only the tile's own pixels are
written to the output.
"""

from __future__ import annotations

import csv
import logging
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from sfdenoise import _fastblock
from sfdenoise.imagecore import DEFAULT_BOUNDARY, Region, as_image, check_boundary, extend, mirror_pad
from sfdenoise.kernels import KernelParams, sigma_bounds
from sfdenoise.noise import Distribution, estimate_sigma
from sfdenoise.optimizer import OptimizerSettings, minimize
from sfdenoise.risk import RiskEstimate, self_weights

log = logging.getLogger(__name__)

MIN_IMAGE_SIDE = 16
FLAT_TRACE_TOL = 1e-9


@dataclass(frozen=True)
class BlockLayout:
    block: int
    apron: int
    shape: tuple[int, int]
    blocks: tuple[tuple[Region, Region], ...]


def block_layout(shape: tuple[int, int], block: int = 8, apron: int = 4) -> BlockLayout:
    """Tile ``shape`` (rows, cols) row-major; edge tiles may be smaller than ``block``."""
    if block < 1 or apron < 0:
        raise ValueError(f"need block >= 1 and apron >= 0, got {block}, {apron}")
    height, width = shape
    blocks = []
    for y0 in range(0, height, block):
        for x0 in range(0, width, block):
            h = min(block, height - y0)
            w = min(block, width - x0)
            ex0, ey0 = max(0, x0 - apron), max(0, y0 - apron)
            ex1, ey1 = min(width, x0 + w + apron), min(height, y0 + h + apron)
            blocks.append((Region(x0, y0, w, h), Region(ex0, ey0, ex1 - ex0, ey1 - ey0)))
    return BlockLayout(block, apron, (height, width), tuple(blocks))


@dataclass(frozen=True)
class DenoiseConfig:
    kernel_side: int = 9
    block: int = 8
    apron: int = 4
    sigma: float | None = None
    noise_dist: Distribution = Distribution.GAUSSIAN
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    workers: int = 1
    boundary: str = DEFAULT_BOUNDARY

    def __post_init__(self):
        object.__setattr__(self, "noise_dist", Distribution(self.noise_dist))
        check_boundary(self.boundary)
        if self.kernel_side < 1 or self.kernel_side % 2 == 0:
            raise ValueError(f"kernel_side must be odd, got {self.kernel_side}")
        if self.block < 1 or self.apron < 0:
            raise ValueError("block must be >= 1 and apron >= 0")
        if self.sigma is not None and not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class BlockRecord:
    region: Region
    params: KernelParams
    risk: float
    iterations: int


CSV_FIELDS = ("block_x0", "block_y0", "w", "h", "sigma_x", "sigma_y", "theta", "risk", "iterations")


@dataclass
class BlockParamMap:
    records: list[BlockRecord]
    sigma: float

    def __len__(self):
        return len(self.records)

    def rows(self):
        for r in self.records:
            yield (r.region.x0, r.region.y0, r.region.w, r.region.h,
                   r.params.sigma_x, r.params.sigma_y, r.params.theta, r.risk, r.iterations)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for row in self.rows():
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])

    def grid(self, attr: str) -> np.ndarray:
        """Per-block values of a :class:`KernelParams` field arranged as a 2-D array."""
        ys = sorted({r.region.y0 for r in self.records})
        xs = sorted({r.region.x0 for r in self.records})
        out = np.empty((len(ys), len(xs)))
        yi = {y: i for i, y in enumerate(ys)}
        xi = {x: i for i, x in enumerate(xs)}
        for r in self.records:
            out[yi[r.region.y0], xi[r.region.x0]] = getattr(r.params, attr)
        return out


# -- orientation -----------------------------------------------------------

def _central_gradients(padded: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column and row central differences of an image padded by one pixel."""
    gx = 0.5 * (padded[1:-1, 2:] - padded[1:-1, :-2])
    gy = 0.5 * (padded[2:, 1:-1] - padded[:-2, 1:-1])
    return gx, gy


def orientation_from_tensor(jxx: float, jyy: float, jxy: float, n_pixels: int) -> float:
    """Kernel angle in [-pi/2, pi/2) whose long axis runs along the local edge."""
    if jxx + jyy < FLAT_TRACE_TOL * n_pixels:
        return 0.0
    phi = 0.5 * math.atan2(2.0 * jxy, jxx - jyy)
    theta = phi + 0.5 * math.pi
    return (theta + 0.5 * math.pi) % math.pi - 0.5 * math.pi


def estimate_orientation(noisy: np.ndarray, region: Region) -> float:
    noisy = as_image(noisy)
    region.check_inside(noisy.shape)
    if region.w < 3 or region.h < 3:
        raise ValueError(f"orientation needs a region of at least 3x3, got {region}")
    padded = mirror_pad(noisy, 1)
    window = padded[region.y0:region.y0 + region.h + 2, region.x0:region.x0 + region.w + 2]
    gx, gy = _central_gradients(window)
    return orientation_from_tensor(
        float(np.sum(gx * gx)), float(np.sum(gy * gy)), float(np.sum(gx * gy)), region.n_pixels
    )


# -- per-block optimization -------------------------------------------------

def _window(padded: np.ndarray, region: Region, radius: int) -> np.ndarray:
    return np.ascontiguousarray(
        padded[region.y0:region.y0 + region.h + 2 * radius, region.x0:region.x0 + region.w + 2 * radius]
    )


def _weights(region: Region, shape, side: int, boundary: str):
    return (self_weights(region.y0, region.h, shape[0], side, boundary),
            self_weights(region.x0, region.w, shape[1], side, boundary))


def _optimize_window(window, h, w, sigma, theta, side, settings, wr, wc):
    taps = np.empty((side, side))
    scratch = np.empty((h, w))
    s2 = sigma * sigma

    def objective(sx, sy):
        return _fastblock.gaussian_risk(window, h, w, sx, sy, theta, s2, taps, wr, wc, scratch)

    res = minimize(objective, sigma_bounds(side), settings)
    return res.x[0], res.x[1], res.fun, res.nit


def optimize_block(
    noisy: np.ndarray,
    extended: Region,
    sigma: float,
    theta: float,
    settings: OptimizerSettings | None = None,
    kernel_side: int = 9,
    boundary: str = DEFAULT_BOUNDARY,
) -> tuple[KernelParams, RiskEstimate]:
    """Pick the Gaussian spreads minimizing the risk estimate over ``extended``; ``theta`` stays fixed."""
    noisy = as_image(noisy)
    extended.check_inside(noisy.shape)
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    r = kernel_side // 2
    window = _window(extend(noisy, r, boundary), extended, r)
    wr, wc = _weights(extended, noisy.shape, kernel_side, boundary)
    sx, sy, _, _ = _optimize_window(
        window, extended.h, extended.w, sigma, theta, kernel_side, settings or OptimizerSettings(), wr, wc
    )
    taps = np.empty((kernel_side, kernel_side))
    _fastblock.fill_gaussian_taps(sx, sy, theta, taps)
    resid = _fastblock.residual_energy(window, taps, extended.h, extended.w)
    div = _fastblock.divergence(taps, wr, wc)
    return KernelParams(sx, sy, theta), RiskEstimate.from_terms(resid, div, sigma, extended.n_pixels)


# -- whole-image pipeline ---------------------------------------------------

_SHARED: dict = {}


def _set_shared(padded, gx, gy, layout, sigma, side, settings, boundary):
    _SHARED.update(padded=padded, gx=gx, gy=gy, layout=layout, sigma=sigma, side=side,
                   settings=settings, boundary=boundary)


def _process_blocks(indices):
    padded = _SHARED["padded"]
    gx, gy = _SHARED["gx"], _SHARED["gy"]
    layout = _SHARED["layout"]
    sigma, side, settings = _SHARED["sigma"], _SHARED["side"], _SHARED["settings"]
    boundary = _SHARED["boundary"]
    r = side // 2
    taps = np.empty((side, side))
    out = []
    for idx in indices:
        interior, ext = layout.blocks[idx]
        sl = ext.slices
        bx, by = gx[sl], gy[sl]
        theta = orientation_from_tensor(
            float(np.sum(bx * bx)), float(np.sum(by * by)), float(np.sum(bx * by)), ext.n_pixels
        )
        window = _window(padded, ext, r)
        wr, wc = _weights(ext, layout.shape, side, boundary)
        sx, sy, risk, nit = _optimize_window(window, ext.h, ext.w, sigma, theta, side, settings, wr, wc)
        _fastblock.fill_gaussian_taps(sx, sy, theta, taps)
        filtered = np.empty((interior.h, interior.w))
        _fastblock.filter_window(_window(padded, interior, r), taps, filtered)
        out.append((idx, sx, sy, theta, risk, nit, filtered))
    return out


def _chunks(n: int, parts: int) -> list[list[int]]:
    bounds = np.linspace(0, n, parts + 1).round().astype(int)
    return [list(range(a, b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def denoise(noisy: np.ndarray, cfg: DenoiseConfig | None = None) -> tuple[np.ndarray, BlockParamMap]:
    """Denoise ``noisy`` block by block; output does not depend on ``cfg.workers``."""
    cfg = cfg or DenoiseConfig()
    noisy = as_image(noisy)
    if min(noisy.shape) < max(MIN_IMAGE_SIDE, cfg.kernel_side):
        raise ValueError(f"image must be at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, got {noisy.shape}")
    sigma = cfg.sigma if cfg.sigma is not None else estimate_sigma(noisy, cfg.noise_dist)
    if not sigma > 0:
        raise ValueError("estimated noise level is zero; pass sigma explicitly")
    layout = block_layout(noisy.shape, cfg.block, cfg.apron)
    r = cfg.kernel_side // 2
    padded = extend(noisy, r, cfg.boundary)
    gx, gy = _central_gradients(mirror_pad(noisy, 1))
    _fastblock.warmup()

    n = len(layout.blocks)
    shared = (padded, gx, gy, layout, sigma, cfg.kernel_side, cfg.optimizer, cfg.boundary)
    if cfg.workers == 1:
        _set_shared(*shared)
        results = _process_blocks(range(n))
    else:
        ctx = multiprocessing.get_context("fork")
        chunks = _chunks(n, cfg.workers * 8)
        with ProcessPoolExecutor(cfg.workers, mp_context=ctx, initializer=_set_shared, initargs=shared) as pool:
            results = [item for part in pool.map(_process_blocks, chunks) for item in part]
    _SHARED.clear()

    out = np.empty_like(noisy)
    records = [None] * n
    for idx, sx, sy, theta, risk, nit, filtered in results:
        interior = layout.blocks[idx][0]
        out[interior.slices] = filtered
        records[idx] = BlockRecord(interior, KernelParams(sx, sy, theta), risk, nit)
    log.debug("denoised %dx%d image in %d blocks, sigma=%.3f", noisy.shape[1], noisy.shape[0], n, sigma)
    return out, BlockParamMap(records, sigma)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
