"""Grayscale raster helpers: binary PGM I/O, boundary-extended convolution, fidelity metrics.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, column]``.
Samples nominally live in [0, 255] but are never clamped until they are
written to disk.

Two boundary extensions are supported. The default ``"mirror"`` reflects
about the border pixel without repeating it (``dcb|abcd|cba``); pixels
within ``side // 2`` of the border then also read themselves through the
reflection. ``"periodic"`` wraps around, which keeps convolution circulant
(strictly shift-invariant) so every pixel sees the origin tap exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

PEAK = 255.0

BOUNDARIES = ("periodic", "mirror")
DEFAULT_BOUNDARY = "mirror"
_PAD_MODE = {"periodic": "wrap", "mirror": "reflect"}
_NDIMAGE_MODE = {"periodic": "wrap", "mirror": "mirror"}


class PGMError(ValueError):
    """Base class for unreadable PGM files."""


class MalformedHeaderError(PGMError):
    pass


class UnsupportedVariantError(PGMError):
    pass


class MaxvalError(PGMError):
    pass


class TruncatedDataError(PGMError):
    pass


@dataclass(frozen=True)
class Region:
    """Axis-aligned pixel window: top-left corner ``(x0, y0)`` and extent ``w`` x ``h``."""

    x0: int
    y0: int
    w: int
    h: int

    @property
    def n_pixels(self) -> int:
        return self.w * self.h

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.y0, self.y0 + self.h), slice(self.x0, self.x0 + self.w)

    def check_inside(self, shape: tuple[int, int]) -> None:
        height, width = shape
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"empty region {self}")
        if self.x0 < 0 or self.y0 < 0 or self.x0 + self.w > width or self.y0 + self.h > height:
            raise ValueError(f"region {self} exceeds image of size {width}x{height}")

    @classmethod
    def full(cls, img: np.ndarray) -> "Region":
        return cls(0, 0, img.shape[1], img.shape[0])


def as_image(data) -> np.ndarray:
    """Return ``data`` as a finite, non-empty 2-D float64 array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    return img


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                end = data.find(b"\n", pos)
                if end < 0:
                    raise MalformedHeaderError("unterminated comment in PGM header")
                pos = end + 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeaderError("PGM header ended early")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise MalformedHeaderError("missing whitespace after PGM header")
    return tokens, pos + 1


def load_pgm(path) -> np.ndarray:
    """Read an 8-bit binary (P5) PGM file into a float64 image."""
    data = Path(path).read_bytes()
    if len(data) < 2:
        raise MalformedHeaderError(f"{path}: file too short for a PGM header")
    magic = data[:2]
    if magic != b"P5":
        if magic[:1] == b"P" and magic[1:2].isdigit():
            raise UnsupportedVariantError(f"{path}: unsupported PGM variant {magic.decode()!r}")
        raise MalformedHeaderError(f"{path}: not a PGM file")
    tokens, offset = _header_tokens(data[2:], 3)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeaderError(f"{path}: non-numeric PGM header field") from None
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise MaxvalError(f"{path}: maxval {maxval} unsupported (need 255)")
    raster = data[offset:offset + width * height]
    if len(raster) < width * height:
        raise TruncatedDataError(
            f"{path}: expected {width * height} bytes of pixel data, found {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).astype(np.float64)


def quantize(img: np.ndarray) -> np.ndarray:
    """Round half away from zero, then clamp to the 8-bit range."""
    img = np.asarray(img, dtype=np.float64)
    rounded = np.sign(img) * np.floor(np.abs(img) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def save_pgm(img: np.ndarray, path) -> None:
    """Write ``img`` as a binary P5 PGM with maxval 255."""
    pixels = quantize(as_image(img))
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(pixels.tobytes())


def check_boundary(boundary: str) -> str:
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}, expected one of {BOUNDARIES}")
    return boundary


def mirror_pad(img: np.ndarray, pad: int) -> np.ndarray:
    """Reflect about the border pixels without repeating them (``dcb|abcd|cba``)."""
    return extend(img, pad, "mirror")


def extend(img: np.ndarray, pad: int, boundary: str = DEFAULT_BOUNDARY) -> np.ndarray:
    """Pad by ``pad`` pixels on every side using the given boundary rule."""
    if pad == 0:
        return img
    return np.pad(img, pad, mode=_PAD_MODE[check_boundary(boundary)])


def convolve(img: np.ndarray, kernel, boundary: str = DEFAULT_BOUNDARY) -> np.ndarray:
    """2-D convolution (impulse response = kernel); output has the input's shape.

    ``kernel`` is a :class:`~sfdenoise.kernels.Kernel` or a square array of odd side.
    """
    img = as_image(img)
    taps = np.asarray(getattr(kernel, "taps", kernel), dtype=np.float64)
    if taps.ndim != 2 or taps.shape[0] != taps.shape[1]:
        raise ValueError(f"kernel must be square, got shape {taps.shape}")
    side = taps.shape[0]
    if side % 2 == 0:
        raise ValueError(f"kernel side must be odd, got {side}")
    if side > min(img.shape):
        raise ValueError(f"kernel side {side} exceeds image size {img.shape}")
    return ndimage.convolve(img, taps, mode=_NDIMAGE_MODE[check_boundary(boundary)])


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Total (not mean) squared error between two equally-sized images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d * d))


def psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """Peak SNR in dB for 8-bit images; ``inf`` when the images are identical."""
    err = mse(reference, test)
    if err == 0.0:
        return math.inf
    rmse = math.sqrt(err / np.asarray(reference).size)
    return 20.0 * math.log10(PEAK / rmse)
