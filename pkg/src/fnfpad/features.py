"""Per-pair feature vector assembled from every metric module.

Canonical order is :data:`FEATURE_NAMES`. Names ending in ``_flash`` or
``_nonflash`` come from one illumination; all others combine both images.
Metrics that cannot be computed are stored as 0.0 and listed in
``FeatureVector.flags``; downstream training treats flagged entries as
missing and imputes them with the feature mean (0 in z-space).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import illumcues, photometry, quality, texture
from .differential import (
    AlignmentError,
    align_pair,
    differential_image,
    highlight_irregularity,
    ridge_amplitude_cv,
    sss_smoothness,
)
from .imgcore import PairedCapture, to_grayscale

ILLUMS = ("flash", "nonflash")
QUALITY_KEYS = ("ocl", "lcs", "contrast", "edge_clarity", "sharpness")


def _build_names() -> tuple[str, ...]:
    names = []
    for q in QUALITY_KEYS:
        names += [f"{q}_flash", f"{q}_nonflash", f"{q}_delta"]
    for il in ILLUMS:
        for metric in ("local_contrast", "edge_energy", "saturation"):
            names += [f"{metric}_{c}_{il}" for c in photometry.CHANNELS]
        names.append(f"rb_ratio_{il}")
    for metric in ("pearson_offdiag", "mi_offdiag", "shr", "realism"):
        names += [f"{metric}_{il}" for il in ILLUMS]
    names += ["delta_lbp", "delta_glcm", "delta_fourier", "diff_energy", "diff_structure"]
    names += ["sss_flash", "sss_nonflash", "ridge_cv_flash", "ridge_cv_nonflash", "highlight_irregularity"]
    return tuple(names)


FEATURE_NAMES = _build_names()


def illumination_of(name: str) -> str:
    if name.endswith("_nonflash"):
        return "nonflash"
    if name.endswith("_flash"):
        return "flash"
    return "paired"


@dataclass(frozen=True)
class FeatureConfig:
    ocl_block: int = quality.OCL_BLOCK
    lcs_block: int = quality.LCS_BLOCK
    patch_size: int = 16
    mi_bins: int = 32
    saturation_threshold: float = photometry.SATURATION_THRESHOLD
    shr_intensity: float = 0.9
    shr_window: int = 5
    shr_texture: float = 0.02
    max_shift: int = 16
    texture: texture.TextureConfig = field(default_factory=texture.TextureConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["texture"]["glcm_offsets"] = [list(o) for o in self.texture.glcm_offsets]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureConfig":
        data = dict(data)
        tex = dict(data.pop("texture", {}))
        if "glcm_offsets" in tex:
            tex["glcm_offsets"] = tuple(tuple(o) for o in tex["glcm_offsets"])
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown feature config keys: {sorted(unknown)}")
        return cls(texture=texture.TextureConfig(**tex), **data)


@dataclass(frozen=True)
class FeatureVector:
    pair_id: str
    label: str
    pai_type: str
    values: np.ndarray
    flags: dict[str, str]

    names = FEATURE_NAMES

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, (float(v) for v in self.values)))

    def masked(self) -> np.ndarray:
        """Values with flagged entries replaced by NaN."""
        out = self.values.copy()
        for name in self.flags:
            if name in _INDEX:
                out[_INDEX[name]] = np.nan
        return out


_INDEX = {n: i for i, n in enumerate(FEATURE_NAMES)}


def _per_image(img: np.ndarray, gray: np.ndarray, cfg: FeatureConfig, tag: str,
               out: dict, flags: dict) -> dict:
    """Single-illumination metrics; returns intermediate objects for paired cues."""
    qr = quality.quality_report(gray, cfg.ocl_block, cfg.lcs_block, cfg.patch_size)
    if qr.ocl_map.n_valid == 0:
        flags[f"ocl_{tag}"] = "no valid OCL blocks"
    if qr.lcs_map.n_valid == 0:
        flags[f"lcs_{tag}"] = "no valid LCS blocks"
    out[f"ocl_{tag}"] = qr.ocl_mean
    out[f"lcs_{tag}"] = qr.lcs_mean
    out[f"contrast_{tag}"] = qr.local_contrast
    out[f"edge_clarity_{tag}"] = qr.edge_clarity
    out[f"sharpness_{tag}"] = qr.sharpness

    ph = photometry.channel_photometrics(img, cfg.patch_size, cfg.saturation_threshold)
    for i, c in enumerate(photometry.CHANNELS):
        out[f"local_contrast_{c}_{tag}"] = ph.local_contrast[i]
        out[f"edge_energy_{c}_{tag}"] = ph.edge_energy[i]
        out[f"saturation_{c}_{tag}"] = ph.saturation[i]
    if ph.color_temp_ratio is None:
        flags[f"rb_ratio_{tag}"] = "degenerate blue channel"
        out[f"rb_ratio_{tag}"] = 0.0
    else:
        out[f"rb_ratio_{tag}"] = ph.color_temp_ratio

    cc = illumcues.channel_correlation(img, cfg.mi_bins)
    if cc.off_diag_mean_pearson is None:
        flags[f"pearson_offdiag_{tag}"] = "undefined correlation (constant channels)"
        out[f"pearson_offdiag_{tag}"] = 0.0
    else:
        out[f"pearson_offdiag_{tag}"] = cc.off_diag_mean_pearson
    out[f"mi_offdiag_{tag}"] = cc.off_diag_mean_mi

    spec = illumcues.specular_highlight_ratio(img, cfg.shr_intensity, cfg.shr_window, cfg.shr_texture)
    out[f"shr_{tag}"] = spec.shr

    desc = texture.texture_descriptors(gray, cfg.texture)
    out[f"realism_{tag}"] = desc.realism_ratio

    grid, angles = quality.ocl_grid(gray, cfg.ocl_block)
    try:
        out[f"sss_{tag}"] = sss_smoothness(gray, grid, angles)
    except ValueError as exc:
        flags[f"sss_{tag}"] = str(exc)
        out[f"sss_{tag}"] = 0.0
    try:
        out[f"ridge_cv_{tag}"] = ridge_amplitude_cv(gray, grid)
    except ValueError as exc:
        flags[f"ridge_cv_{tag}"] = str(exc)
        out[f"ridge_cv_{tag}"] = 0.0
    return {"spec": spec, "desc": desc}


def extract_features(pair: PairedCapture, config: FeatureConfig | None = None) -> FeatureVector:
    cfg = config or FeatureConfig()
    out: dict[str, float] = {}
    flags: dict[str, str] = {}
    gray = {}
    parts = {}
    for tag in ILLUMS:
        img = getattr(pair, tag)
        if img.ndim != 3:
            raise ValueError(f"{pair.label.pair_id}: {tag} image must be RGB")
        gray[tag] = to_grayscale(img)
        parts[tag] = _per_image(img, gray[tag], cfg, tag, out, flags)

    for q in QUALITY_KEYS:
        name = f"{q}_delta"
        if f"{q}_flash" in flags or f"{q}_nonflash" in flags:
            flags[name] = "depends on a flagged metric"
            out[name] = 0.0
        else:
            out[name] = out[f"{q}_flash"] - out[f"{q}_nonflash"]

    tdelta = texture.texture_delta(parts["flash"]["desc"], parts["nonflash"]["desc"])
    out["delta_lbp"] = tdelta["lbp"]
    out["delta_glcm"] = tdelta["glcm"]
    out["delta_fourier"] = tdelta["fourier"]
    for tag in ILLUMS:
        if any(v["correlation"] is None for v in parts[tag]["desc"].glcm.values()):
            flags.setdefault("delta_glcm", f"GLCM correlation undefined ({tag}); excluded from distance")

    try:
        shift = align_pair(gray["flash"], gray["nonflash"], cfg.max_shift)
    except AlignmentError as exc:
        shift = (0, 0)
        flags["alignment"] = f"{exc}; proceeding unaligned"
    diff = differential_image(gray["flash"], gray["nonflash"], shift, cfg.ocl_block)
    out["diff_energy"] = diff.diff_energy
    out["diff_structure"] = diff.diff_structure
    out["highlight_irregularity"] = highlight_irregularity(parts["flash"]["spec"], parts["nonflash"]["spec"])

    values = np.array([out[n] for n in FEATURE_NAMES], dtype=np.float64)
    bad = ~np.isfinite(values)
    for i in np.flatnonzero(bad):
        flags[FEATURE_NAMES[i]] = "non-finite value"
    values[bad] = 0.0
    lab = pair.label
    return FeatureVector(lab.pair_id, lab.label, lab.pai_type, values, dict(sorted(flags.items())))


def feature_matrix(vectors: list[FeatureVector]) -> np.ndarray:
    """Stack vectors into an ``(n, d)`` array with flagged entries as NaN."""
    return np.vstack([v.masked() for v in vectors]) if vectors else np.zeros((0, len(FEATURE_NAMES)))
