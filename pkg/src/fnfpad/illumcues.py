"""Inter-channel correlation and specular highlight cues."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .imgcore import require_rgb, to_grayscale

CONSTANT_STD = 1e-9
_OFF_DIAG = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class ChannelCorrelation:
    pearson: np.ndarray
    pearson_defined: np.ndarray  # False where a constant channel makes corr undefined
    mutual_info: np.ndarray
    off_diag_mean_pearson: float | None
    off_diag_mean_mi: float


def pearson_matrix(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample Pearson correlation between the flattened R, G, B planes.

    Returns ``(matrix, defined)``. Rows/columns of constant channels are
    marked undefined and hold 0.
    """
    require_rgb(img)
    x = img.reshape(-1, 3)
    centered = x - x.mean(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    ok = std > CONSTANT_STD
    defined = np.outer(ok, ok)
    mat = np.zeros((3, 3))
    for i in range(3):
        for j in range(i, 3):
            if defined[i, j]:
                r = 1.0 if i == j else float(
                    np.mean(centered[:, i] * centered[:, j]) / (std[i] * std[j]))
                mat[i, j] = mat[j, i] = np.clip(r, -1.0, 1.0)
    return mat, defined


def quantize(values: np.ndarray, bins: int) -> np.ndarray:
    """Histogram bin index of intensities over [0, 1] with ``bins`` equal cells."""
    return np.minimum((np.asarray(values) * bins).astype(np.int64), bins - 1)


def mutual_information(x: np.ndarray, y: np.ndarray, bins: int = 32) -> float:
    """MI in bits from the joint ``bins x bins`` histogram over [0, 1]^2."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    qx = quantize(np.ravel(x), bins)
    qy = quantize(np.ravel(y), bins)
    joint = np.bincount(qx * bins + qy, minlength=bins * bins).reshape(bins, bins)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    ratio = p[nz] / np.outer(px, py)[nz]
    return float(max(np.sum(p[nz] * np.log2(ratio)), 0.0))


def entropy_bits(x: np.ndarray, bins: int = 32) -> float:
    counts = np.bincount(quantize(np.ravel(x), bins), minlength=bins)
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def mutual_info_matrix(img: np.ndarray, bins: int = 32) -> np.ndarray:
    require_rgb(img)
    mat = np.zeros((3, 3))
    for i in range(3):
        for j in range(i, 3):
            mat[i, j] = mat[j, i] = mutual_information(img[:, :, i], img[:, :, j], bins)
    return mat


def channel_correlation(img: np.ndarray, bins: int = 32) -> ChannelCorrelation:
    pearson, defined = pearson_matrix(img)
    mi = mutual_info_matrix(img, bins)
    pairs = [pearson[i, j] for i, j in _OFF_DIAG if defined[i, j]]
    return ChannelCorrelation(
        pearson=pearson,
        pearson_defined=defined,
        mutual_info=mi,
        off_diag_mean_pearson=float(np.mean(pairs)) if pairs else None,
        off_diag_mean_mi=float(np.mean([mi[i, j] for i, j in _OFF_DIAG])),
    )


def correlation_separation(genuine: Sequence[ChannelCorrelation],
                           spoof: Sequence[ChannelCorrelation]) -> tuple[float, float]:
    """Genuine minus spoof gap of the mean off-diagonal Pearson and MI statistics.

    Captures with an undefined Pearson mean are skipped for the Pearson gap.
    """
    if not genuine or not spoof:
        raise ValueError("both classes need at least one correlation report")

    def mean_of(items, attr):
        vals = [getattr(c, attr) for c in items if getattr(c, attr) is not None]
        if not vals:
            raise ValueError(f"no defined {attr} values in class")
        return float(np.mean(vals))

    d_pearson = mean_of(genuine, "off_diag_mean_pearson") - mean_of(spoof, "off_diag_mean_pearson")
    d_mi = mean_of(genuine, "off_diag_mean_mi") - mean_of(spoof, "off_diag_mean_mi")
    return d_pearson, d_mi


@dataclass(frozen=True)
class SpecularReport:
    shr: float
    highlight_mask: np.ndarray
    component_count: int
    component_size_cv: float


def local_std(gray: np.ndarray, window: int) -> np.ndarray:
    """Population std over a centred ``window x window`` neighbourhood, replicate borders."""
    half = window // 2
    padded = np.pad(gray, half, mode="edge")
    return sliding_window_view(padded, (window, window)).std(axis=(-2, -1))


def component_sizes(mask: np.ndarray) -> np.ndarray:
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    return np.bincount(labels.ravel(), minlength=count + 1)[1:]


def size_cv(sizes: np.ndarray) -> float:
    if sizes.size == 0:
        return 0.0
    return float(sizes.std() / sizes.mean())


def specular_highlight_ratio(img: np.ndarray, intensity_thresh: float = 0.9,
                             texture_window: int = 5,
                             texture_thresh: float = 0.02) -> SpecularReport:
    """Fraction of pixels bright in every channel and locally textureless."""
    require_rgb(img)
    if texture_window < 3 or texture_window % 2 == 0:
        raise ValueError("texture_window must be odd and >= 3")
    bright = img.min(axis=2) >= intensity_thresh
    flat = local_std(to_grayscale(img), texture_window) < texture_thresh
    mask = bright & flat
    sizes = component_sizes(mask)
    return SpecularReport(
        shr=float(mask.mean()),
        highlight_mask=mask,
        component_count=int(sizes.size),
        component_size_cv=size_cv(sizes),
    )
