"""Deterministic synthetic paired flash/non-flash captures.

The generator is a validation instrument: it renders a sinusoid-based ridge
pattern with a smooth random orientation field and then applies a simple
material model (genuine skin, ink-on-sheet print, display screen, molded replica)
under two illuminations. Frozen defaults live in ``data/generator_v1.json``.

Every random draw comes from :class:`fnfpad.rng.SplitMix64` streams keyed by
``(seed, ...)``, so output depends only on the seed and parameters:

* identity stream ``(seed, "identity")`` - ridge pattern, amplitude field,
  shading; shared by every material rendered from that seed.
* material stream ``(seed, kind, "material")`` - highlight placement, glare
  lobes, ink and pigment fields, exposure jitter; shared by both
  illuminations of a pair.
* noise stream ``(seed, kind, <illumination parameters>)`` - sensor noise.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .imgcore import CaptureLabel, PairedCapture
from .rng import SplitMix64, derive_seed

KINDS = ("genuine", "print", "screen", "molded")
CONFIG_VERSION = "fnfpad-synth/1"


@dataclass(frozen=True)
class Illumination:
    gain: float
    ridge_contrast: float
    noise_sigma: float
    specular_scale: float
    artifact_gain: float
    relief_visibility: float = 1.0
    # camera blur sigma is drawn per capture from [blur_min, blur_max]
    blur_min: float = 0.0
    blur_max: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.blur_min <= self.blur_max <= 8.0:
            raise ValueError("need 0 <= blur_min <= blur_max <= 8")

    def key(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, f.name)) for f in fields(self))


@dataclass(frozen=True)
class MaterialModel:
    kind: str
    albedo: tuple[float, float, float]
    relief: float
    pigment_contrast: float
    specular_strength: float
    subsurface_sigma: float
    amplitude_cv: float
    micro_highlight_density: float
    lobe_sigma: float
    chroma_mottle: float = 0.0
    # print only
    ink_channel_skew: tuple[float, float, float] | None = None
    ink_noise: float | None = None
    halftone_period: float | None = None
    halftone_amplitude: float | None = None
    # screen only
    grid_period: int | None = None
    grid_depth: float | None = None
    peak_channel: int | None = None
    peak_gain: float | None = None

    _PRINT = ("ink_channel_skew", "ink_noise", "halftone_period", "halftone_amplitude")
    _SCREEN = ("grid_period", "grid_depth", "peak_channel", "peak_gain")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown material kind {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if len(self.albedo) != 3 or not all(0.0 < a <= 1.0 for a in self.albedo):
            raise ValueError("albedo must be three values in (0, 1]")
        checks = {
            "relief": (0.0, 1.0), "pigment_contrast": (0.0, 1.0), "specular_strength": (0.0, 5.0),
            "subsurface_sigma": (0.0, 8.0), "amplitude_cv": (0.0, 1.0),
            "micro_highlight_density": (0.0, 10.0), "lobe_sigma": (0.0, 128.0), "chroma_mottle": (0.0, 0.5),
        }
        for name, (lo, hi) in checks.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
        for group, owner in ((self._PRINT, "print"), (self._SCREEN, "screen")):
            present = [getattr(self, n) is not None for n in group]
            if self.kind == owner and not all(present):
                raise ValueError(f"{owner} material needs {', '.join(group)}")
            if self.kind != owner and any(present):
                raise ValueError(f"{', '.join(group)} only apply to {owner} materials")
        if self.kind == "screen" and (self.grid_period < 2 or not 0 <= self.peak_channel <= 2):
            raise ValueError("screen grid_period must be >= 2 and peak_channel in 0..2")
        if self.kind == "print" and self.halftone_period < 2.0:
            raise ValueError("halftone_period must be >= 2 px")


@dataclass(frozen=True)
class GenSpec:
    seed: int
    size: int = 128
    ridge_period: float = 9.0
    orientation_components: int = 5
    orientation_max_freq: float = 1.0
    phase_warp: float = 7.0
    profile_sharpness: float = 4.0
    exposure_jitter: float = 0.06
    flash: Illumination = field(default=None)  # type: ignore[assignment]
    nonflash: Illumination = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.size < 128:
            raise ValueError(f"size must be >= 128, got {self.size}")
        if not 4.0 <= self.ridge_period <= 32.0:
            raise ValueError(f"ridge_period must be in [4, 32], got {self.ridge_period}")
        if self.flash is None or self.nonflash is None:
            cfg = default_config()
            object.__setattr__(self, "flash", self.flash or cfg.flash)
            object.__setattr__(self, "nonflash", self.nonflash or cfg.nonflash)


@dataclass(frozen=True)
class GeneratorConfig:
    version: str
    pattern: dict
    flash: Illumination
    nonflash: Illumination
    materials: dict

    def material(self, kind: str) -> MaterialModel:
        if kind not in self.materials:
            raise ValueError(f"unknown material kind {kind!r}; valid kinds: {', '.join(KINDS)}")
        return self.materials[kind]

    def spec_for_seed(self, seed: int) -> GenSpec:
        """GenSpec with the ridge period drawn from the configured range."""
        p = self.pattern
        lo, hi = p["ridge_period_range"]
        period = SplitMix64(derive_seed(seed, "period")).scalar(lo, hi)
        return GenSpec(
            seed=seed, size=p["size"], ridge_period=period,
            orientation_components=p["orientation_components"],
            orientation_max_freq=p["orientation_max_freq"], phase_warp=p["phase_warp"],
            profile_sharpness=p["profile_sharpness"], exposure_jitter=p["exposure_jitter"],
            flash=self.flash, nonflash=self.nonflash,
        )


def load_config(path=None) -> GeneratorConfig:
    if path is None:
        raw = json.loads(resources.files("fnfpad").joinpath("data/generator_v1.json").read_text())
    else:
        raw = json.loads(Path(path).read_text())
    if raw.get("version") != CONFIG_VERSION:
        raise ValueError(f"unsupported generator config version {raw.get('version')!r}")
    mats = {}
    for kind, params in raw["materials"].items():
        params = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
        mats[kind] = MaterialModel(kind=kind, **params)
    return GeneratorConfig(
        version=raw["version"],
        pattern=raw["pattern"],
        flash=Illumination(**raw["illumination"]["flash"]),
        nonflash=Illumination(**raw["illumination"]["nonflash"]),
        materials=mats,
    )


@lru_cache(maxsize=1)
def default_config() -> GeneratorConfig:
    return load_config()


def smooth_field(rng: SplitMix64, size: int, n_components: int, max_freq: float) -> np.ndarray:
    """Unit-variance sum of low-frequency cosines (frequencies in cycles per image)."""
    freqs = rng.uniform(2 * n_components, -max_freq, max_freq).reshape(n_components, 2)
    phases = rng.uniform(n_components, 0.0, 2.0 * np.pi)
    amps = rng.normal(n_components)
    yy, xx = np.indices((size, size), dtype=np.float64)
    out = np.zeros((size, size))
    for (fu, fv), ph, a in zip(freqs, phases, amps):
        out += a * np.cos(2.0 * np.pi * (fu * xx + fv * yy) / size + ph)
    std = out.std()
    return out / std if std > 0 else out


@dataclass(frozen=True)
class Identity:
    phase: np.ndarray
    amplitude: np.ndarray
    shading: np.ndarray


def identity_maps(spec: GenSpec) -> Identity:
    """Ridge phase, unit amplitude field and shading shared by all renders of a seed."""
    rng = SplitMix64(derive_seed(spec.seed, "identity"))
    n = spec.size
    theta = rng.scalar(0.0, np.pi)
    warp = smooth_field(rng, n, spec.orientation_components, spec.orientation_max_freq)
    amp = smooth_field(rng, n, spec.orientation_components, 3.0)
    cx, cy = rng.uniform(2, 0.4 * n, 0.6 * n)
    yy, xx = np.indices((n, n), dtype=np.float64)
    phase = 2.0 * np.pi / spec.ridge_period * (xx * np.cos(theta) + yy * np.sin(theta)) + spec.phase_warp * warp
    shading = 1.0 - 0.22 * ((xx - cx) ** 2 + (yy - cy) ** 2) / (0.5 * n) ** 2
    return Identity(phase, amp, shading)


def ridge_phase_map(spec: GenSpec) -> np.ndarray:
    """cos of the identity ridge phase, the fingerprint 'identity' pattern."""
    return np.cos(identity_maps(spec).phase)


def _blobs(shape, centers, sigmas, amps) -> np.ndarray:
    out = np.zeros(shape)
    h, w = shape
    for (cy, cx), s, a in zip(centers, sigmas, amps):
        r = int(np.ceil(4.0 * s))
        y0, y1 = max(0, int(cy) - r), min(h, int(cy) + r + 1)
        x0, x1 = max(0, int(cx) - r), min(w, int(cx) + r + 1)
        yy, xx = np.indices((y1 - y0, x1 - x0), dtype=np.float64)
        d2 = (yy + y0 - cy) ** 2 + (xx + x0 - cx) ** 2
        out[y0:y1, x0:x1] += a * np.exp(-d2 / (2.0 * s * s))
    return out


@dataclass(frozen=True)
class _MaterialDraws:
    exposure: float
    highlights: np.ndarray
    lobe: np.ndarray
    art: np.ndarray  # (3, H, W) unit-scale artefact texture added to reflectance
    grid: np.ndarray | None  # (3, H, W) multiplicative subpixel grid deviation


def _material_draws(spec: GenSpec, mat: MaterialModel, ridge: np.ndarray) -> _MaterialDraws:
    rng = SplitMix64(derive_seed(spec.seed, mat.kind, "material"))
    n = spec.size
    exposure = 1.0 + spec.exposure_jitter * (2.0 * rng.scalar() - 1.0)

    count = int(round(mat.micro_highlight_density * n * n / 1000.0 * rng.scalar(0.7, 1.3)))
    highlights = np.zeros((n, n))
    if count:
        centers = rng.uniform(2 * count, 4.0, n - 4.0).reshape(count, 2)
        sigmas = rng.uniform(count, 1.4, 3.2)
        amps = rng.uniform(count, 1.8, 4.0)
        highlights = _blobs((n, n), centers, sigmas, amps)
        # oils sit on ridge crests
        highlights = highlights + 0.08 * np.maximum(ridge, 0.0)

    lobe = np.zeros((n, n))
    if mat.lobe_sigma > 0:
        center = rng.uniform(2, 0.3 * n, 0.7 * n).reshape(1, 2)
        sigma = mat.lobe_sigma * rng.scalar(0.8, 1.2)
        amp = rng.scalar(0.9, 1.4)
        lobe = _blobs((n, n), center, [sigma], [amp])

    art = np.zeros((3, n, n))
    grid = None
    yy, xx = np.indices((n, n), dtype=np.float64)
    if mat.kind == "print":
        ink = np.stack([gaussian_filter(rng.normal(n * n).reshape(n, n), 0.8) for _ in range(3)])
        ink /= ink.std(axis=(1, 2), keepdims=True)
        px, py = rng.uniform(2, 0.0, 2.0 * np.pi)
        tone = 0.5 * (np.cos(2.0 * np.pi * xx / mat.halftone_period + px)
                      + np.cos(2.0 * np.pi * yy / mat.halftone_period + py))
        skew = np.asarray(mat.ink_channel_skew)[:, None, None]
        art = mat.ink_noise * ink + mat.halftone_amplitude * skew * tone
    elif mat.kind == "molded" and mat.chroma_mottle > 0:
        art = mat.chroma_mottle * np.stack([smooth_field(rng, n, 6, 6.0) for _ in range(3)])
    if mat.kind == "screen":
        p = mat.grid_period
        ox, oy = (int(v) for v in rng.uniform(2, 0.0, p))
        sub = (np.floor(3.0 * ((xx + ox) % p) / p)).astype(int)
        grid = np.stack([3.0 * (sub == c) - 1.0 for c in range(3)])
        rows = ((yy + oy) % p) == 0
        grid = grid - 0.5 * rows[None, :, :]
    return _MaterialDraws(exposure, highlights, lobe, art, grid)


def _ridge_shape(spec: GenSpec, mat: MaterialModel, ident: Identity) -> np.ndarray:
    k = spec.profile_sharpness
    profile = np.tanh(k * np.cos(ident.phase)) / np.tanh(k)
    if mat.subsurface_sigma > 0:
        profile = gaussian_filter(profile, mat.subsurface_sigma, mode="reflect")
    return profile


def _ridge_profile(shape: np.ndarray, mat: MaterialModel, ident: Identity, illum: Illumination) -> np.ndarray:
    # ridge-height variation shows through relief shading, which diffuse light flattens
    visibility = mat.relief * illum.relief_visibility + (1.0 - mat.relief)
    amplitude = np.clip(1.0 + mat.amplitude_cv * visibility * ident.amplitude, 0.1, 2.0)
    return amplitude * shape


def render(spec: GenSpec, mat: MaterialModel, illum: Illumination,
           ident: Identity | None = None, draws: _MaterialDraws | None = None) -> np.ndarray:
    """Render one RGB capture, quantised to 8-bit levels and scaled to [0, 1]."""
    ident = ident or identity_maps(spec)
    shape = _ridge_shape(spec, mat, ident)
    ridge = _ridge_profile(shape, mat, ident, illum)
    draws = draws or _material_draws(spec, mat, shape)
    a = illum.artifact_gain
    contrast = mat.relief * illum.ridge_contrast + (1.0 - mat.relief) * mat.pigment_contrast
    base = ident.shading * (1.0 - 0.5 * contrast + 0.5 * contrast * ridge)

    albedo = np.array(mat.albedo, dtype=np.float64)
    if mat.kind == "print":
        albedo = albedo * np.asarray(mat.ink_channel_skew) ** a
    if mat.kind == "screen":
        albedo[mat.peak_channel] *= 1.0 + mat.peak_gain * a

    gain = illum.gain * draws.exposure
    img = gain * albedo[:, None, None] * (base[None] + a * draws.art)
    if draws.grid is not None:
        img = img * (1.0 + mat.grid_depth * a * draws.grid)
    spec_scale = illum.specular_scale * mat.specular_strength
    img = img + spec_scale * (draws.highlights + draws.lobe)[None]

    noise_rng = SplitMix64(derive_seed(spec.seed, mat.kind, *illum.key()))
    blur = noise_rng.scalar(illum.blur_min, illum.blur_max)
    if blur > 0:
        img = gaussian_filter(img, (0.0, blur, blur), mode="reflect")
    img = img + illum.noise_sigma * noise_rng.normal(img.size).reshape(img.shape)
    img = np.clip(img, 0.0, 1.0)
    img = np.rint(img * 255.0) / 255.0
    return np.ascontiguousarray(np.moveaxis(img, 0, 2))


def generate_pair(spec: GenSpec, material: MaterialModel, pair_id: str | None = None) -> PairedCapture:
    ident = identity_maps(spec)
    draws = _material_draws(spec, material, _ridge_shape(spec, material, ident))
    flash = render(spec, material, spec.flash, ident, draws)
    nonflash = render(spec, material, spec.nonflash, ident, draws)
    genuine = material.kind == "genuine"
    label = CaptureLabel(
        pair_id=pair_id or f"{material.kind}-{spec.seed:05d}",
        subject_id=f"subject-{spec.seed:05d}",
        session=1 + spec.seed % 2,
        label="genuine" if genuine else "spoof",
        pai_type="none" if genuine else material.kind,
    )
    return PairedCapture(flash, nonflash, label)


def synth_pair(kind: str, seed: int, config: GeneratorConfig | None = None,
               pair_id: str | None = None) -> PairedCapture:
    """Pair for ``kind`` using the frozen config and a seed-derived GenSpec."""
    config = config or default_config()
    return generate_pair(config.spec_for_seed(seed), config.material(kind), pair_id)


def dataset_plan(counts: dict[str, int], seed: int) -> list[tuple[str, str, int]]:
    """``(pair_id, kind, sample_seed)`` for every sample, ``sample_seed = seed ^ index``.

    The global index runs over kinds in canonical order, then sample number.
    """
    unknown = [k for k in counts if k not in KINDS]
    if unknown:
        raise ValueError(f"unknown class {unknown[0]!r}; valid classes: {', '.join(KINDS)}")
    plan = []
    index = 0
    for kind in KINDS:
        for i in range(counts.get(kind, 0)):
            plan.append((f"{kind}-{i:05d}", kind, seed ^ index))
            index += 1
    return plan


def _write_sample(args) -> dict:
    from .imageio import write_image

    out_dir, pair_id, kind, sample_seed, fmt, config_path = args
    config = default_config() if config_path is None else load_config(config_path)
    pair = synth_pair(kind, sample_seed, config, pair_id)
    ext = "png" if fmt == "png" else "ppm"
    names = {}
    for which in ("flash", "nonflash"):
        name = f"{pair_id}_{which}.{ext}"
        write_image(Path(out_dir) / name, getattr(pair, which))
        names[which] = name
    lab = pair.label
    return {
        "pair_id": lab.pair_id, "subject": lab.subject_id, "session": lab.session,
        "label": lab.label, "pai_type": lab.pai_type,
        "flash": names["flash"], "nonflash": names["nonflash"],
    }


def generate_dataset(out_dir, counts: dict[str, int], seed: int = 0, fmt: str = "png",
                     jobs: int = 1, config_path=None, manifest_name: str = "manifest.jsonl") -> Path:
    """Write image pairs plus a JSON-lines manifest; returns the manifest path."""
    from .manifest import write_manifest

    if fmt not in ("png", "ppm"):
        raise ValueError(f"format must be 'png' or 'ppm', got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan = dataset_plan(counts, seed)
    tasks = [(str(out_dir), pid, kind, s, fmt, config_path) for pid, kind, s in plan]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_write_sample, tasks))
    else:
        records = [_write_sample(t) for t in tasks]
    path = out_dir / manifest_name
    write_manifest(path, records)
    return path


def with_overrides(material: MaterialModel, **changes) -> MaterialModel:
    return replace(material, **changes)
