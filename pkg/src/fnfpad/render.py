"""Self-contained SVG figures for block maps, profiles, heatmaps and spectra.

Rendering is presentational: every drawn element carries the exact value it
represents in a ``data-value`` attribute (shortest round-trip decimal), so
figures can be checked against report numbers.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .imgcore import BlockGrid

KINDS = ("ocl-map", "lcs-profile", "corr-heatmap", "radial-spectrum")
CELL = 24
PLOT_W, PLOT_H, MARGIN = 320, 160, 20


def _attr(text: str) -> str:
    return escape(text, {'"': "&quot;"})


def _gray(v: float) -> str:
    level = int(round(255 * min(max(v, 0.0), 1.0)))
    return f"rgb({level},{level},{level})"


def _doc(width: int, height: int, body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, f"<title>{escape(title)}</title>", *body, "</svg>"]) + "\n"


def ocl_map_svg(grid: BlockGrid, title: str = "OCL map") -> str:
    """One square per block, gray level = value; invalid blocks get a red outline."""
    body = []
    for r, c, v, ok in grid.cells():
        stroke = "none" if ok else "#c00"
        body.append(
            f'<rect class="cell" x="{c * CELL}" y="{r * CELL}" width="{CELL}" height="{CELL}" '
            f'fill="{_gray(v)}" stroke="{stroke}" data-row="{r}" data-col="{c}" '
            f'data-value="{v!r}" data-valid="{int(ok)}"/>'
        )
    return _doc(grid.cols * CELL, grid.rows * CELL, body, title)


def corr_heatmap_svg(matrix, labels: Sequence[str] = ("R", "G", "B"), title: str = "channel correlation") -> str:
    """Square heatmap; fill darkness follows |value| so strong correlations stand out."""
    m = np.asarray(matrix, dtype=np.float64)
    n = m.shape[0]
    if m.shape != (n, n) or len(labels) != n:
        raise ValueError("heatmap needs a square matrix and one label per row")
    off = CELL
    body = []
    for i, lab in enumerate(labels):
        body.append(f'<text x="{off + i * CELL + 8}" y="16" font-size="12">{escape(lab)}</text>')
        body.append(f'<text x="6" y="{off + i * CELL + 16}" font-size="12">{escape(lab)}</text>')
    for i in range(n):
        for j in range(n):
            v = float(m[i, j])
            body.append(
                f'<rect class="cell" x="{off + j * CELL}" y="{off + i * CELL}" width="{CELL}" '
                f'height="{CELL}" fill="{_gray(1.0 - abs(v))}" data-row="{i}" data-col="{j}" '
                f'data-value="{v!r}"/>'
            )
    side = off + n * CELL
    return _doc(side, side, body, title)


def _polyline(values, css: str, name: str, lo: float | None = None, hi: float | None = None) -> str:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("profile needs at least two samples")
    if lo is None or hi is None:
        lo, hi = min(float(v.min()), 0.0), float(v.max())
    span = hi - lo if hi > lo else 1.0
    xs = MARGIN + np.arange(v.size) * (PLOT_W - 2 * MARGIN) / (v.size - 1)
    ys = PLOT_H - MARGIN - (v - lo) / span * (PLOT_H - 2 * MARGIN)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    data = " ".join(repr(float(x)) for x in v)
    return (f'<polyline class="{css}" fill="none" stroke="#036" points="{pts}" '
            f'data-name="{_attr(name)}" data-values="{data}"/>')


def _axes() -> list[str]:
    base = PLOT_H - MARGIN
    return [f'<line class="axis" x1="{MARGIN}" y1="{base}" x2="{PLOT_W - MARGIN}" y2="{base}" stroke="#000"/>',
            f'<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{base}" stroke="#000"/>']


def profile_svg(profile, title: str = "ridge-valley profile") -> str:
    return _doc(PLOT_W, PLOT_H, _axes() + [_polyline(profile, "profile", title)], title)


def radial_spectrum_svg(profiles: dict[str, np.ndarray], title: str = "radial spectrum") -> str:
    """Overlay of radially averaged spectra; an all-zero profile lies on the baseline."""
    if not profiles:
        raise ValueError("no spectra to draw")
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in profiles.items()}
    lo = min(0.0, *(float(a.min()) for a in arrays.values()))
    hi = max(float(a.max()) for a in arrays.values())
    body = _axes() + [_polyline(a, "spectrum", name, lo, hi) for name, a in arrays.items()]
    return _doc(PLOT_W, PLOT_H, body, title)
