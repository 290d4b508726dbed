import json

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from fnfpad import synthgen
from fnfpad.illumcues import specular_highlight_ratio
from fnfpad.imgcore import to_grayscale


def _bandpass(img):
    g = to_grayscale(img)
    return gaussian_filter(g, 2.0) - gaussian_filter(g, 5.0)


def _ncc(a, b):
    a = a - a.mean()
    b = b - b.mean()
    return float((a * b).sum() / np.sqrt((a * a).sum() * (b * b).sum()))


def test_print_flash_shr_exceeds_genuine_pairwise():
    wins = 0
    for seed in range(50):
        g = specular_highlight_ratio(synthgen.synth_pair("genuine", seed).flash).shr
        p = specular_highlight_ratio(synthgen.synth_pair("print", seed).flash).shr
        wins += p > g
    assert wins >= 45


def test_identity_preserved_within_pair_not_across():
    pairs = [synthgen.synth_pair(kind, seed) for kind in synthgen.KINDS for seed in range(5)]
    within = [_ncc(_bandpass(p.flash), _bandpass(p.nonflash)) for p in pairs]
    across = [abs(_ncc(_bandpass(a.flash), _bandpass(b.nonflash)))
              for i, a in enumerate(pairs) for j, b in enumerate(pairs)
              if a.label.subject_id != b.label.subject_id and i < j]
    assert np.mean(within) > 0.8
    assert max(across) < 0.3


def test_parallel_and_serial_generation_identical(tmp_path):
    counts = {"genuine": 2, "screen": 2, "molded": 1}
    serial = synthgen.generate_dataset(tmp_path / "a", counts, seed=3, jobs=1)
    parallel = synthgen.generate_dataset(tmp_path / "b", counts, seed=3, jobs=2)
    files_a = sorted(p.name for p in serial.parent.iterdir())
    assert files_a == sorted(p.name for p in parallel.parent.iterdir())
    for name in files_a:
        assert (serial.parent / name).read_bytes() == (parallel.parent / name).read_bytes()


def test_plan_seeds_are_index_xor():
    plan = synthgen.dataset_plan({"print": 2, "genuine": 1}, 5)
    assert plan == [("genuine-00000", "genuine", 5), ("print-00000", "print", 4), ("print-00001", "print", 7)]
    with pytest.raises(ValueError, match="valid classes"):
        synthgen.dataset_plan({"latex": 1}, 0)


def test_labels_follow_kind():
    g = synthgen.synth_pair("genuine", 1).label
    s = synthgen.synth_pair("screen", 1).label
    assert (g.label, g.pai_type) == ("genuine", "none")
    assert (s.label, s.pai_type) == ("spoof", "screen")


def test_images_in_unit_range_and_rgb():
    for kind in synthgen.KINDS:
        pair = synthgen.synth_pair(kind, 9)
        for img in (pair.flash, pair.nonflash):
            assert img.shape == (128, 128, 3)
            assert img.min() >= 0.0 and img.max() <= 1.0


def test_material_validation():
    cfg = synthgen.default_config()
    genuine = cfg.material("genuine")
    with pytest.raises(ValueError, match="only apply to screen"):
        synthgen.with_overrides(genuine, grid_period=4)
    with pytest.raises(ValueError, match="outside"):
        synthgen.with_overrides(genuine, relief=2.0)
    with pytest.raises(ValueError, match="screen material needs"):
        synthgen.with_overrides(cfg.material("screen"), peak_gain=None)
    with pytest.raises(ValueError, match="unknown material kind"):
        cfg.material("latex")


def test_spec_and_illumination_validation():
    with pytest.raises(ValueError, match="size"):
        synthgen.GenSpec(seed=0, size=64)
    with pytest.raises(ValueError, match="ridge_period"):
        synthgen.GenSpec(seed=0, ridge_period=2.0)
    with pytest.raises(ValueError, match="blur_min"):
        synthgen.Illumination(1.0, 0.4, 0.01, 1.0, 1.0, blur_min=2.0, blur_max=1.0)


def test_config_version_checked(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"version": "other"}))
    with pytest.raises(ValueError, match="unsupported generator config version"):
        synthgen.load_config(path)


def test_spec_for_seed_period_in_range():
    cfg = synthgen.default_config()
    lo, hi = cfg.pattern["ridge_period_range"]
    periods = [cfg.spec_for_seed(s).ridge_period for s in range(50)]
    assert all(lo <= p <= hi for p in periods)
    assert len(set(periods)) == 50
