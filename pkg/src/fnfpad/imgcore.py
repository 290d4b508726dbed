"""Image representation, block tiling, gradients and spectral helpers.

Images are plain numpy arrays of float64 intensities in [0, 1]: ``(H, W)`` for
grayscale and ``(H, W, 3)`` for RGB, row-major with interleaved channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageError(ValueError):
    """Raised for images that violate size or range preconditions."""


def as_image(data, *, copy: bool = False) -> np.ndarray:
    """Validate ``data`` as a raster image and return it as float64.

    8-bit input is divided by 255. Float input must already lie in [0, 1].
    A trailing singleton channel axis is dropped.
    """
    arr = np.asarray(data)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float64) / 255.0
    else:
        arr = np.array(arr, dtype=np.float64, copy=copy)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        pass
    elif arr.ndim == 3 and arr.shape[2] == 3:
        pass
    else:
        raise ImageError(f"expected (H, W) or (H, W, 3) image, got shape {arr.shape}")
    if arr.size == 0:
        raise ImageError("empty image")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageError("intensities must be finite and within [0, 1]")
    return arr


def n_channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def require_rgb(img: np.ndarray) -> np.ndarray:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageError("operation requires a 3-channel image")
    return img


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luminance. Single-channel images are returned unchanged."""
    if img.ndim == 2:
        return img
    require_rgb(img)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    # algebraically 0.299R + 0.587G + 0.114B, arranged so R = G = B maps exactly to itself
    gray = g + LUMA_WEIGHTS[0] * (r - g) + LUMA_WEIGHTS[2] * (b - g)
    return np.clip(gray, 0.0, 1.0)


def _check_min_size(img: np.ndarray, minimum: int = 3) -> None:
    h, w = img.shape[-2:]
    if h < minimum or w < minimum:
        raise ImageError(f"image {w}x{h} too small, need at least {minimum}x{minimum}")


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel responses with replicate padding.

    Works on the last two axes, so a stack of blocks ``(N, B, B)`` is
    processed block by block with each block padded on its own.
    ``gx`` is positive for intensity increasing to the right, ``gy`` for
    intensity increasing downward.
    """
    _check_min_size(img)
    pad = [(0, 0)] * (img.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(img, pad, mode="edge")
    # row-smoothed differences: [1 2 1]^T x [-1 0 1]
    dx = p[..., :, 2:] - p[..., :, :-2]
    gx = dx[..., :-2, :] + 2.0 * dx[..., 1:-1, :] + dx[..., 2:, :]
    dy = p[..., 2:, :] - p[..., :-2, :]
    gy = dy[..., :, :-2] + 2.0 * dy[..., :, 1:-1] + dy[..., :, 2:]
    return gx, gy


def laplacian(img: np.ndarray) -> np.ndarray:
    """4-neighbour Laplacian ``[0 1 0; 1 -4 1; 0 1 0]`` with replicate padding."""
    _check_min_size(img)
    p = np.pad(img, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * p[1:-1, 1:-1]


@dataclass(frozen=True)
class BlockGrid:
    """Per-block scalar map over a non-overlapping tiling.

    ``values`` has shape ``(rows, cols)``; ``valid`` marks blocks whose value
    is meaningful (e.g. not flat).
    """

    block_size: int
    rows: int
    cols: int
    values: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(self.rows, self.cols)
        object.__setattr__(self, "values", values)
        valid = self.valid
        if valid is None:
            valid = np.ones_like(values, dtype=bool)
        object.__setattr__(self, "valid", np.asarray(valid, dtype=bool).reshape(self.rows, self.cols))

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def valid_mean(self) -> float:
        if self.n_valid == 0:
            return 0.0
        return float(self.values[self.valid].mean())

    def cells(self) -> Iterator[tuple[int, int, float, bool]]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield r, c, float(self.values[r, c]), bool(self.valid[r, c])


def grid_shape(shape: tuple[int, int], block_size: int) -> tuple[int, int]:
    if block_size < 8:
        raise ImageError(f"block size must be >= 8, got {block_size}")
    h, w = shape
    rows, cols = h // block_size, w // block_size
    if rows < 1 or cols < 1:
        raise ImageError(f"block size {block_size} larger than image {w}x{h}")
    return rows, cols


def block_partition(img: np.ndarray, block_size: int) -> np.ndarray:
    """Tile a grayscale image into non-overlapping square blocks.

    Returns a view of shape ``(rows, cols, block_size, block_size)``.
    Trailing partial rows/columns are dropped.
    """
    if img.ndim != 2:
        raise ImageError("block_partition expects a grayscale image")
    rows, cols = grid_shape(img.shape, block_size)
    b = block_size
    cropped = img[: rows * b, : cols * b]
    return cropped.reshape(rows, b, cols, b).swapaxes(1, 2)


def fft2_logmag(img: np.ndarray) -> np.ndarray:
    """``log(1 + |F|)`` of the mean-subtracted image, DC shifted to the centre."""
    if img.ndim != 2:
        raise ImageError("fft2_logmag expects a grayscale image")
    shifted = img - img.flat[0]  # exact zeros for constant images
    spectrum = np.fft.fft2(shifted - shifted.mean())
    return np.log1p(np.abs(np.fft.fftshift(spectrum)))


def radial_spectrum(field_: np.ndarray, n_bins: int = 16) -> np.ndarray:
    """Radially averaged profile around the centre ``(H//2, W//2)``.

    Pixels are assigned their rounded distance from the centre; distances
    0..min(H, W)/2 are split into ``n_bins`` equal-width bins. Empty bins are 0.
    """
    if n_bins < 4:
        raise ValueError("n_bins must be >= 4")
    h, w = field_.shape
    yy, xx = np.indices((h, w))
    r_int = np.rint(np.hypot(yy - h // 2, xx - w // 2))
    r_max = min(h, w) / 2.0
    keep = r_int <= r_max
    idx = np.minimum((r_int[keep] * n_bins / r_max).astype(np.int64), n_bins - 1)
    sums = np.bincount(idx, weights=field_[keep], minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    profile = np.zeros(n_bins)
    nz = counts > 0
    profile[nz] = sums[nz] / counts[nz]
    return profile


def rotated_window(block: np.ndarray, angle: float) -> np.ndarray:
    """Nearest-neighbour resample of the central square of ``block``.

    The output axis 1 (columns) runs along direction ``angle`` (radians,
    measured from +x towards +y in image coordinates), so a pattern varying
    along ``angle`` varies along columns. The window side is
    ``floor(B / sqrt(2))``, small enough that the rotated window stays
    inside the block; samples are taken from the block itself (out-of-range
    indices clamp to the border) rather than from a padded copy. The window
    is anchored on the pixel grid, so ``angle = 0`` returns the exact central
    crop with consecutive rows and columns.
    """
    bh, bw = block.shape
    side = int(np.floor(min(bh, bw) / np.sqrt(2.0)))
    cy = (bh - side) // 2 + (side - 1) / 2.0
    cx = (bw - side) // 2 + (side - 1) / 2.0
    t = np.arange(side) - (side - 1) / 2.0
    v, u = np.meshgrid(t, t, indexing="ij")  # v: along ridges, u: across ridges
    c, s = np.cos(angle), np.sin(angle)
    src_x = np.rint(cx + u * c - v * s).astype(np.int64)
    src_y = np.rint(cy + u * s + v * c).astype(np.int64)
    np.clip(src_x, 0, bw - 1, out=src_x)
    np.clip(src_y, 0, bh - 1, out=src_y)
    return block[src_y, src_x]


GENUINE = "genuine"
SPOOF = "spoof"
PAI_TYPES = ("none", "print", "screen", "molded", "model3d")


@dataclass(frozen=True)
class CaptureLabel:
    pair_id: str
    subject_id: str = ""
    session: int = 1
    label: str = GENUINE
    pai_type: str = "none"

    def __post_init__(self):
        if self.label not in (GENUINE, SPOOF):
            raise ValueError(f"label must be 'genuine' or 'spoof', got {self.label!r}")
        if self.pai_type not in PAI_TYPES:
            raise ValueError(f"unknown pai_type {self.pai_type!r}; expected one of {PAI_TYPES}")
        if (self.label == GENUINE) != (self.pai_type == "none"):
            raise ValueError(f"{self.pair_id}: label {self.label!r} inconsistent with pai_type {self.pai_type!r}")

    @property
    def is_genuine(self) -> bool:
        return self.label == GENUINE


@dataclass(frozen=True)
class PairedCapture:
    flash: np.ndarray
    nonflash: np.ndarray
    label: CaptureLabel

    def __post_init__(self):
        flash = as_image(self.flash)
        nonflash = as_image(self.nonflash)
        if flash.shape != nonflash.shape:
            raise ImageError(f"flash {flash.shape} and non-flash {nonflash.shape} differ in shape")
        object.__setattr__(self, "flash", flash)
        object.__setattr__(self, "nonflash", nonflash)
