"""Per-channel photometric statistics of RGB captures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import require_rgb, sobel_gradients
from .quality import local_contrast

CHANNELS = ("r", "g", "b")
SATURATION_THRESHOLD = 254.0 / 255.0
BLUE_EPS = 1e-6


class DegenerateChannelError(ValueError):
    pass


def _plane(img: np.ndarray, channel: int | str) -> np.ndarray:
    require_rgb(img)
    if isinstance(channel, str):
        channel = CHANNELS.index(channel.lower())
    return img[:, :, channel]


def channel_local_contrast(img: np.ndarray, channel, patch_size: int = 16) -> float:
    return local_contrast(_plane(img, channel), patch_size)


def channel_edge_energy(img: np.ndarray, channel) -> float:
    """Mean squared Sobel gradient magnitude of one channel plane."""
    gx, gy = sobel_gradients(_plane(img, channel))
    return float(np.mean(gx * gx + gy * gy))


def saturation_fraction(img: np.ndarray, channel, threshold: float = SATURATION_THRESHOLD) -> float:
    return float(np.mean(_plane(img, channel) >= threshold))


def color_temperature_ratio(img: np.ndarray) -> float:
    """mean(R) / mean(B); raises on a near-zero blue channel."""
    require_rgb(img)
    mean_b = float(img[:, :, 2].mean())
    if mean_b <= BLUE_EPS:
        raise DegenerateChannelError("degenerate blue channel")
    return float(img[:, :, 0].mean()) / mean_b


@dataclass(frozen=True)
class ChannelPhotometrics:
    local_contrast: tuple[float, float, float]
    edge_energy: tuple[float, float, float]
    saturation: tuple[float, float, float]
    color_temp_ratio: float | None


def channel_photometrics(img: np.ndarray, patch_size: int = 16,
                         threshold: float = SATURATION_THRESHOLD) -> ChannelPhotometrics:
    require_rgb(img)
    try:
        ratio = color_temperature_ratio(img)
    except DegenerateChannelError:
        ratio = None
    return ChannelPhotometrics(
        local_contrast=tuple(channel_local_contrast(img, c, patch_size) for c in range(3)),
        edge_energy=tuple(channel_edge_energy(img, c) for c in range(3)),
        saturation=tuple(saturation_fraction(img, c, threshold) for c in range(3)),
        color_temp_ratio=ratio,
    )
