"""Flash minus non-flash differential imaging and the subsurface-scattering,
micro-geometry and surface-oil proxy metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .illumcues import SpecularReport
from .imgcore import BlockGrid, ImageError, block_partition, rotated_window
from .quality import OCL_BLOCK, ocl_grid

MIN_PEAK = 0.05


class AlignmentError(RuntimeError):
    pass


def phase_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalised cross-power surface; its peak sits at the shift taking ``a`` to ``b``."""
    fa = np.fft.fft2(a)
    fb = np.fft.fft2(b)
    cross = fb * np.conj(fa)
    mag = np.abs(cross)
    cross = np.where(mag > 1e-15, cross / np.where(mag > 1e-15, mag, 1.0), 0.0)
    return np.fft.ifft2(cross).real


def align_pair(flash: np.ndarray, nonflash: np.ndarray, max_shift: int = 16) -> tuple[int, int]:
    """Integer ``(dx, dy)`` with ``nonflash[y + dy, x + dx] ~ flash[y, x]``.

    Raises :class:`AlignmentError` when the correlation peak is below 0.05.
    """
    if flash.shape != nonflash.shape or flash.ndim != 2:
        raise ImageError("align_pair needs two grayscale images of the same size")
    surface = phase_correlation(flash - flash.mean(), nonflash - nonflash.mean())
    h, w = surface.shape
    best, best_shift = -np.inf, (0, 0)
    # scan in a fixed order; ties resolve to the smallest |shift| seen first
    shifts = sorted(
        ((dx, dy) for dy in range(-max_shift, max_shift + 1) for dx in range(-max_shift, max_shift + 1)
         if abs(dx) < w and abs(dy) < h),
        key=lambda s: (s[0] ** 2 + s[1] ** 2, s[1], s[0]),
    )
    for dx, dy in shifts:
        v = surface[dy % h, dx % w]
        if v > best:
            best, best_shift = v, (dx, dy)
    if best < MIN_PEAK:
        raise AlignmentError(f"alignment failed (peak {best:.3f} < {MIN_PEAK})")
    return best_shift


def overlap(flash: np.ndarray, nonflash: np.ndarray, shift: tuple[int, int]):
    """Crop both images to the region where the shifted non-flash overlaps the flash."""
    dx, dy = shift
    h, w = flash.shape[:2]
    r0, r1 = max(0, -dy), min(h, h - dy)
    c0, c1 = max(0, -dx), min(w, w - dx)
    if r1 <= r0 or c1 <= c0:
        raise ImageError(f"shift {shift} leaves no overlap")
    return flash[r0:r1, c0:c1], nonflash[r0 + dy : r1 + dy, c0 + dx : c1 + dx]


@dataclass(frozen=True)
class DifferentialImage:
    diff: np.ndarray
    gain: float
    diff_energy: float
    diff_structure: float


def differential_image(flash: np.ndarray, nonflash: np.ndarray, shift=(0, 0),
                       block_size: int = OCL_BLOCK) -> DifferentialImage:
    """Median gain-normalised difference ``flash - gain * nonflash`` over the overlap.

    ``diff_structure`` is the mean OCL of the valid blocks of ``|D|`` tiled
    over the overlap (0 when the overlap has no full valid block).
    """
    f, n = overlap(flash, nonflash, shift)
    med_n = float(np.median(n))
    gain = float(np.median(f)) / med_n if med_n > 0 else 1.0
    diff = f - gain * n
    structure = 0.0
    if min(diff.shape) >= block_size:
        grid, _ = ocl_grid(np.abs(diff), block_size)
        structure = grid.valid_mean()
    return DifferentialImage(diff, gain, float(np.mean(diff * diff)), structure)


def _valid_blocks(img: np.ndarray, ocl: BlockGrid, angles: np.ndarray | None):
    blocks = block_partition(img, ocl.block_size)
    for r, c, _, ok in ocl.cells():
        if ok:
            yield blocks[r, c], (0.0 if angles is None else float(angles[r, c]))


def sss_smoothness(img: np.ndarray, ocl: BlockGrid, angles: np.ndarray | None = None) -> float:
    """Mean |second difference| of intensity profiles across the ridges.

    Lower values mean smoother ridge-valley transitions. ``angles`` holds the
    ridge-normal angle per block, as returned by :func:`quality.ocl_grid`.
    """
    values = []
    for block, angle in _valid_blocks(img, ocl, angles):
        window = rotated_window(block, angle)
        if window.shape[1] < 3:
            continue
        values.append(np.abs(np.diff(window, n=2, axis=1)).mean())
    if not values:
        raise ValueError("no valid blocks for smoothness")
    return float(np.mean(values))


def block_amplitudes(img: np.ndarray, ocl: BlockGrid) -> np.ndarray:
    return np.array([
        np.percentile(block, 95) - np.percentile(block, 5)
        for block, _ in _valid_blocks(img, ocl, None)
    ])


def ridge_amplitude_cv(img: np.ndarray, ocl: BlockGrid) -> float:
    """Coefficient of variation of per-block ridge amplitude (95th - 5th percentile)."""
    amps = block_amplitudes(img, ocl)
    if amps.size < 4:
        raise ValueError(f"need at least 4 valid blocks, got {amps.size}")
    mean = amps.mean()
    return float(amps.std() / mean) if mean > 0 else 0.0


def highlight_irregularity(spec_flash: SpecularReport, spec_nonflash: SpecularReport) -> float:
    gained = max(0.0, spec_flash.shr - spec_nonflash.shr)
    return spec_flash.component_count * spec_flash.component_size_cv * gained


@dataclass(frozen=True)
class DifferentialReport:
    shift: tuple[int, int]
    aligned: bool
    diff_image: np.ndarray
    diff_energy: float
    diff_structure: float
    sss_smoothness: float
    ridge_amplitude_cv: float
    highlight_irregularity: float


def differential_report(flash_gray: np.ndarray, nonflash_gray: np.ndarray,
                        spec_flash: SpecularReport, spec_nonflash: SpecularReport,
                        max_shift: int = 16, block_size: int = OCL_BLOCK) -> DifferentialReport:
    """All differential scalars of one pair; proxies are computed on the flash image."""
    try:
        shift, aligned = align_pair(flash_gray, nonflash_gray, max_shift), True
    except AlignmentError:
        shift, aligned = (0, 0), False
    d = differential_image(flash_gray, nonflash_gray, shift, block_size)
    grid, angles = ocl_grid(flash_gray, block_size)
    return DifferentialReport(
        shift=shift,
        aligned=aligned,
        diff_image=d.diff,
        diff_energy=d.diff_energy,
        diff_structure=d.diff_structure,
        sss_smoothness=sss_smoothness(flash_gray, grid, angles),
        ridge_amplitude_cv=ridge_amplitude_cv(flash_gray, grid),
        highlight_irregularity=highlight_irregularity(spec_flash, spec_nonflash),
    )
