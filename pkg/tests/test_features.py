import numpy as np
import pytest

from fnfpad import illumcues, photometry, quality, synthgen, texture
from fnfpad.differential import (
    AlignmentError,
    align_pair,
    differential_image,
    ridge_amplitude_cv,
    sss_smoothness,
)
from fnfpad.features import FEATURE_NAMES, FeatureConfig, extract_features, feature_matrix, illumination_of
from fnfpad.imgcore import to_grayscale


@pytest.fixture(scope="module")
def pair():
    return synthgen.synth_pair("genuine", 42)


@pytest.fixture(scope="module")
def vector(pair):
    return extract_features(pair)


def test_names_unique_and_vector_finite(vector):
    assert len(set(FEATURE_NAMES)) == len(FEATURE_NAMES) == vector.values.size
    assert np.isfinite(vector.values).all()


def test_entries_equal_individual_module_calls(pair, vector):
    v = vector.as_dict()
    cfg = FeatureConfig()
    for tag in ("flash", "nonflash"):
        img = getattr(pair, tag)
        gray = to_grayscale(img)
        assert v[f"ocl_{tag}"] == quality.ocl_map(gray).valid_mean()
        assert v[f"lcs_{tag}"] == quality.lcs_map(gray).valid_mean()
        assert v[f"contrast_{tag}"] == quality.local_contrast(gray)
        assert v[f"edge_clarity_{tag}"] == quality.edge_clarity(gray)
        assert v[f"sharpness_{tag}"] == quality.sharpness(gray)
        assert v[f"edge_energy_b_{tag}"] == photometry.channel_edge_energy(img, "b")
        assert v[f"saturation_r_{tag}"] == photometry.saturation_fraction(img, "r")
        assert v[f"rb_ratio_{tag}"] == photometry.color_temperature_ratio(img)
        cc = illumcues.channel_correlation(img)
        assert v[f"pearson_offdiag_{tag}"] == cc.off_diag_mean_pearson
        assert v[f"mi_offdiag_{tag}"] == cc.off_diag_mean_mi
        assert v[f"shr_{tag}"] == illumcues.specular_highlight_ratio(img).shr
        assert v[f"realism_{tag}"] == texture.texture_realism_ratio(gray)
        grid, angles = quality.ocl_grid(gray, cfg.ocl_block)
        assert v[f"sss_{tag}"] == sss_smoothness(gray, grid, angles)
        assert v[f"ridge_cv_{tag}"] == ridge_amplitude_cv(gray, grid)
    assert v["ocl_delta"] == v["ocl_flash"] - v["ocl_nonflash"]
    gf, gn = to_grayscale(pair.flash), to_grayscale(pair.nonflash)
    try:
        shift = align_pair(gf, gn)
        assert "alignment" not in vector.flags
    except AlignmentError:
        # weak correlation peak: flagged and processed unaligned
        shift = (0, 0)
        assert vector.flags["alignment"].startswith("alignment failed")
    d = differential_image(gf, gn, shift)
    assert v["diff_energy"] == d.diff_energy and v["diff_structure"] == d.diff_structure
    delta = texture.texture_delta(texture.texture_descriptors(gf), texture.texture_descriptors(gn))
    assert v["delta_lbp"] == delta["lbp"] and v["delta_fourier"] == delta["fourier"]


def test_masked_and_matrix_mark_flags_as_nan(vector):
    from dataclasses import replace

    flagged = replace(vector, flags={"shr_flash": "test"})
    row = feature_matrix([flagged])[0]
    assert np.isnan(row[FEATURE_NAMES.index("shr_flash")])
    assert np.isnan(row).sum() == 1
    assert feature_matrix([]).shape == (0, len(FEATURE_NAMES))


def test_illumination_of():
    assert illumination_of("ocl_flash") == "flash"
    assert illumination_of("ocl_nonflash") == "nonflash"
    assert illumination_of("diff_energy") == "paired"
    assert {illumination_of(n) for n in FEATURE_NAMES} == {"flash", "nonflash", "paired"}


def test_config_round_trip_and_unknown_keys():
    cfg = FeatureConfig(ocl_block=24, texture=texture.TextureConfig(glcm_offsets=((2, 0),), realism_block=16))
    assert FeatureConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError, match="unknown feature config keys"):
        FeatureConfig.from_dict({"ocl_blocks": 8})


def test_config_changes_values(pair, vector):
    other = extract_features(pair, FeatureConfig(mi_bins=8))
    i = FEATURE_NAMES.index("mi_offdiag_flash")
    assert other.values[i] != vector.values[i]
    j = FEATURE_NAMES.index("ocl_flash")
    assert other.values[j] == vector.values[j]


def test_grayscale_pair_rejected():
    from fnfpad.imgcore import CaptureLabel, PairedCapture

    pair = PairedCapture(np.zeros((64, 64)), np.zeros((64, 64)), CaptureLabel("g"))
    with pytest.raises(ValueError, match="must be RGB"):
        extract_features(pair)
