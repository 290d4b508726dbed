"""Texture descriptors (LBP, GLCM, Fourier realism) and flash/non-flash deltas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import ImageError, block_partition, fft2_logmag, radial_spectrum

# (row, col) neighbour offsets, east first then counter-clockwise
LBP_NEIGHBOURS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
GLCM_FEATURES = ("contrast", "homogeneity", "energy", "correlation")
DEFAULT_OFFSETS = ((1, 0), (0, 1))


def lbp_codes(img: np.ndarray) -> np.ndarray:
    """8-neighbour radius-1 LBP codes of interior pixels (neighbour >= centre sets the bit)."""
    if img.ndim != 2 or min(img.shape) < 3:
        raise ImageError("LBP needs a grayscale image of at least 3x3")
    h, w = img.shape
    centre = img[1:-1, 1:-1]
    codes = np.zeros(centre.shape, dtype=np.int64)
    for bit, (dr, dc) in enumerate(LBP_NEIGHBOURS):
        neighbour = img[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        codes |= (neighbour >= centre).astype(np.int64) << bit
    return codes


def lbp_histogram(img: np.ndarray) -> np.ndarray:
    codes = lbp_codes(img)
    hist = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
    return hist / hist.sum()


def glcm_matrix(q: np.ndarray, levels: int, offset: tuple[int, int]) -> np.ndarray:
    """Symmetric, normalised co-occurrence matrix for offset ``(dx, dy)``."""
    dx, dy = offset
    h, w = q.shape
    r0, r1 = max(0, -dy), min(h, h - dy)
    c0, c1 = max(0, -dx), min(w, w - dx)
    a = q[r0:r1, c0:c1]
    b = q[r0 + dy : r1 + dy, c0 + dx : c1 + dx]
    counts = np.bincount((a * levels + b).ravel(), minlength=levels * levels)
    mat = counts.reshape(levels, levels).astype(np.float64)
    mat = mat + mat.T
    total = mat.sum()
    if total == 0:
        raise ImageError(f"offset {offset} leaves no pixel pairs")
    return mat / total


def glcm_quantize(img: np.ndarray, levels: int) -> np.ndarray:
    return np.minimum((img * levels).astype(np.int64), levels - 1)


def haralick(p: np.ndarray) -> dict[str, float | None]:
    levels = p.shape[0]
    i, j = np.indices((levels, levels))
    mu = float((i * p).sum())
    var = float((((i - mu) ** 2) * p).sum())
    feats: dict[str, float | None] = {
        "contrast": float((p * (i - j) ** 2).sum()),
        "homogeneity": float((p / (1.0 + np.abs(i - j))).sum()),
        "energy": float((p * p).sum()),
        "correlation": None,
    }
    # matrix is symmetric so both marginals share mean and variance
    if var > 1e-12:
        feats["correlation"] = float((p * (i - mu) * (j - mu)).sum() / var)
    return feats


def glcm_features(img: np.ndarray, levels: int = 16,
                  offsets=DEFAULT_OFFSETS) -> dict[tuple[int, int], dict[str, float | None]]:
    """Haralick contrast/homogeneity/energy/correlation per offset.

    Correlation is ``None`` for single-level (degenerate) matrices.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if img.ndim != 2:
        raise ImageError("glcm_features expects a grayscale image")
    q = glcm_quantize(img, levels)
    return {tuple(off): haralick(glcm_matrix(q, levels, tuple(off))) for off in offsets}


def block_peak_flags(img: np.ndarray, block: int = 32, peak_factor: float = 4.0,
                     min_radius_frac: float = 0.25) -> np.ndarray:
    """Per-block dominant high-frequency peak flags.

    A block is flagged when its largest non-DC DFT magnitude exceeds
    ``peak_factor`` times the mean non-DC magnitude and that peak sits
    beyond ``min_radius_frac`` of the Nyquist radius.
    """
    blocks = block_partition(img, block)
    rows, cols = blocks.shape[:2]
    stack = blocks.reshape(rows * cols, block, block)
    stack = stack - stack.mean(axis=(1, 2), keepdims=True)
    mag = np.abs(np.fft.fft2(stack)).reshape(rows * cols, -1)
    mag[:, 0] = -np.inf
    peak_idx = np.argmax(mag, axis=1)
    peak = mag[np.arange(mag.shape[0]), peak_idx]
    mag[:, 0] = 0.0
    mean = mag.sum(axis=1) / (block * block - 1)
    freqs = np.fft.fftfreq(block) * block
    fy = freqs[peak_idx // block]
    fx = freqs[peak_idx % block]
    radius = np.hypot(fx, fy)
    nyquist = block / 2.0
    dominant = (peak > peak_factor * mean) & (radius > min_radius_frac * nyquist) & (mean > 0)
    return dominant.reshape(rows, cols)


def texture_realism_ratio(img: np.ndarray, block: int = 32, peak_factor: float = 4.0,
                          min_radius_frac: float = 0.25) -> float:
    """Fraction of blocks whose spectrum is dominated by a high-frequency peak."""
    return float(block_peak_flags(img, block, peak_factor, min_radius_frac).mean())


@dataclass(frozen=True)
class TextureConfig:
    glcm_levels: int = 16
    glcm_offsets: tuple[tuple[int, int], ...] = DEFAULT_OFFSETS
    realism_block: int = 32
    peak_factor: float = 4.0
    peak_min_radius_frac: float = 0.25
    radial_bins: int = 16


@dataclass(frozen=True)
class TextureDescriptors:
    lbp_hist: np.ndarray
    glcm: dict
    realism_ratio: float
    radial_profile: np.ndarray
    config: TextureConfig

    def glcm_vector(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated GLCM features and a mask of defined entries."""
        vals, ok = [], []
        for off in self.config.glcm_offsets:
            feats = self.glcm[tuple(off)]
            for name in GLCM_FEATURES:
                v = feats[name]
                vals.append(0.0 if v is None else v)
                ok.append(v is not None)
        return np.array(vals), np.array(ok)


def texture_descriptors(img: np.ndarray, config: TextureConfig = TextureConfig()) -> TextureDescriptors:
    return TextureDescriptors(
        lbp_hist=lbp_histogram(img),
        glcm=glcm_features(img, config.glcm_levels, config.glcm_offsets),
        realism_ratio=texture_realism_ratio(img, config.realism_block, config.peak_factor,
                                            config.peak_min_radius_frac),
        radial_profile=radial_spectrum(fft2_logmag(img), config.radial_bins),
        config=config,
    )


def chi_square(a: np.ndarray, b: np.ndarray) -> float:
    s = a + b
    nz = s > 0
    return float(np.sum((a[nz] - b[nz]) ** 2 / s[nz]))


def _unit_sum(v: np.ndarray) -> np.ndarray:
    total = v.sum()
    return v / total if total > 0 else v


def texture_delta(flash: TextureDescriptors, nonflash: TextureDescriptors) -> dict[str, float]:
    """Chi-square LBP distance, L2 GLCM distance and L2 radial-profile distance.

    GLCM entries undefined in either descriptor are left out of the distance.
    """
    if flash.config != nonflash.config:
        raise ValueError("texture descriptors computed with different configurations")
    gf, okf = flash.glcm_vector()
    gn, okn = nonflash.glcm_vector()
    both = okf & okn
    return {
        "lbp": chi_square(flash.lbp_hist, nonflash.lbp_hist),
        "glcm": float(np.linalg.norm(gf[both] - gn[both])),
        "fourier": float(np.linalg.norm(_unit_sum(flash.radial_profile) - _unit_sum(nonflash.radial_profile))),
    }
