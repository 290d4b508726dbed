"""Ridge clarity and sharpness metrics: OCL, LCS, local contrast, edge
clarity and a variance-of-Laplacian sharpness proxy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import (
    BlockGrid,
    ImageError,
    block_partition,
    laplacian,
    rotated_window,
    sobel_gradients,
)

FLAT_EPS = 1e-8
OCL_BLOCK = 16
LCS_BLOCK = 32


@dataclass(frozen=True)
class QualityReport:
    ocl_map: BlockGrid
    ocl_mean: float
    lcs_map: BlockGrid
    lcs_mean: float
    local_contrast: float
    edge_clarity: float
    sharpness: float


def _structure_tensor(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gx, gy = sobel_gradients(blocks)
    return (gx * gx).sum(axis=(-2, -1)), (gy * gy).sum(axis=(-2, -1)), (gx * gy).sum(axis=(-2, -1))


def _ocl_from_tensor(sxx, syy, sxy, n_pixels):
    """OCL, validity flag and ridge-normal angle from summed gradient products."""
    trace = sxx + syy
    root = np.sqrt((sxx - syy) ** 2 + 4.0 * sxy**2)
    lam_max = 0.5 * (trace + root)
    lam_min = np.maximum(0.5 * (trace - root), 0.0)
    valid = trace >= FLAT_EPS * n_pixels
    with np.errstate(divide="ignore", invalid="ignore"):
        ocl = np.where(valid, 1.0 - lam_min / lam_max, 0.0)
    ocl = np.clip(ocl, 0.0, 1.0)
    angle = 0.5 * np.arctan2(2.0 * sxy, sxx - syy)
    return ocl, valid, angle


def ocl_block(block: np.ndarray) -> tuple[float, bool, float]:
    """Orientation certainty of one block.

    Returns ``(ocl, valid, angle)`` where ``angle`` is the direction of the
    dominant gradient eigenvector (the ridge normal). Flat blocks give
    ``(0.0, False, 0.0)``.
    """
    if block.ndim != 2 or min(block.shape) < 8:
        raise ImageError("OCL block must be at least 8x8")
    sxx, syy, sxy = _structure_tensor(block)
    ocl, valid, angle = _ocl_from_tensor(sxx, syy, sxy, block.size)
    if not valid:
        return 0.0, False, 0.0
    return float(ocl), True, float(angle)


def ocl_grid(img: np.ndarray, block_size: int = OCL_BLOCK) -> tuple[BlockGrid, np.ndarray]:
    """Blockwise OCL map plus the per-block ridge-normal angles."""
    blocks = block_partition(img, block_size)
    rows, cols = blocks.shape[:2]
    sxx, syy, sxy = _structure_tensor(blocks)
    ocl, valid, angle = _ocl_from_tensor(sxx, syy, sxy, block_size * block_size)
    angle = np.where(valid, angle, 0.0)
    return BlockGrid(block_size, rows, cols, ocl, valid), angle


def ocl_map(img: np.ndarray, block_size: int = OCL_BLOCK) -> BlockGrid:
    return ocl_grid(img, block_size)[0]


def ridge_profile(block: np.ndarray, orientation: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotate so ridges run vertically and return ``(window, column-mean profile)``."""
    window = rotated_window(block, orientation)
    return window, window.mean(axis=0)


def lcs_block(block: np.ndarray, orientation: float | None = None) -> float:
    """Local clarity score of one block, 1 for perfectly separated ridge/valley levels.

    ``orientation`` is the ridge-normal angle; when omitted it is taken from
    :func:`ocl_block`. Flat blocks score 0.
    """
    if block.ndim != 2 or min(block.shape) < 16:
        raise ImageError("LCS block must be at least 16x16")
    _, valid, angle = ocl_block(block)
    if not valid:
        return 0.0
    if orientation is None:
        orientation = angle
    window, profile = ridge_profile(block, orientation)
    threshold = 0.5 * (profile.min() + profile.max())
    ridge_cols = profile < threshold
    ridge_px = window[:, ridge_cols]
    valley_px = window[:, ~ridge_cols]
    alpha = float((ridge_px >= threshold).mean()) if ridge_px.size else 0.0
    beta = float((valley_px < threshold).mean()) if valley_px.size else 0.0
    return 1.0 - 0.5 * (alpha + beta)


def lcs_map(img: np.ndarray, block_size: int = LCS_BLOCK) -> BlockGrid:
    blocks = block_partition(img, block_size)
    rows, cols = blocks.shape[:2]
    values = np.zeros((rows, cols))
    valid = np.zeros((rows, cols), dtype=bool)
    for r in range(rows):
        for c in range(cols):
            _, ok, angle = ocl_block(blocks[r, c])
            valid[r, c] = ok
            if ok:
                values[r, c] = lcs_block(blocks[r, c], angle)
    return BlockGrid(block_size, rows, cols, values, valid)


def local_contrast(img: np.ndarray, patch_size: int = 16) -> float:
    """Mean over non-overlapping patches of the population std of intensities."""
    if img.ndim != 2:
        raise ImageError("local_contrast expects a single plane")
    h, w = img.shape
    rows, cols = h // patch_size, w // patch_size
    if patch_size < 1 or rows < 1 or cols < 1:
        raise ImageError(f"patch size {patch_size} larger than image {w}x{h}")
    p = img[: rows * patch_size, : cols * patch_size]
    patches = p.reshape(rows, patch_size, cols, patch_size).swapaxes(1, 2)
    # std is shift invariant; anchoring on one pixel makes flat patches exactly 0
    patches = patches - patches[..., :1, :1]
    return float(patches.std(axis=(-2, -1)).mean())


def gradient_magnitude(img: np.ndarray) -> np.ndarray:
    gx, gy = sobel_gradients(img)
    return np.hypot(gx, gy)


def edge_clarity(img: np.ndarray) -> float:
    """Mean Sobel magnitude over pixels above the image's 75th-percentile magnitude."""
    mag = gradient_magnitude(img)
    strong = mag[mag > np.percentile(mag, 75)]
    if strong.size == 0:
        return 0.0
    return float(strong.mean())


def sharpness(img: np.ndarray) -> float:
    return float(laplacian(img).var())


def quality_report(img: np.ndarray, ocl_block_size: int = OCL_BLOCK,
                   lcs_block_size: int = LCS_BLOCK, patch_size: int = 16) -> QualityReport:
    omap = ocl_map(img, ocl_block_size)
    lmap = lcs_map(img, lcs_block_size)
    return QualityReport(
        ocl_map=omap,
        ocl_mean=omap.valid_mean(),
        lcs_map=lmap,
        lcs_mean=lmap.valid_mean(),
        local_contrast=local_contrast(img, patch_size),
        edge_clarity=edge_clarity(img),
        sharpness=sharpness(img),
    )
