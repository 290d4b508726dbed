import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import gaussian_filter

import oracles
from fnfpad import differential as dif
from fnfpad import illumcues
from fnfpad.imgcore import BlockGrid, ImageError
from fnfpad.quality import ocl_grid


def _smooth(seed, shape=(64, 64), sigma=1.5):
    img = gaussian_filter(np.random.default_rng(seed).random(shape), sigma, mode="wrap")
    return (img - img.min()) / (img.max() - img.min())


def test_alignment_under_noise():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        img = _smooth(seed)
        d = (int(rng.integers(-6, 7)), int(rng.integers(-6, 7)))
        moved = np.roll(img, (d[1], d[0]), axis=(0, 1)) + rng.normal(0, 0.02, img.shape)
        hits += dif.align_pair(img, moved) == d
    assert hits >= 95


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(-16, 16), st.integers(-16, 16))
def test_alignment_exact_for_circular_shifts(seed, dx, dy):
    img = _smooth(seed)
    assert dif.align_pair(img, np.roll(img, (dy, dx), axis=(0, 1))) == (dx, dy)


def test_alignment_failure_and_shape_errors():
    flat = np.full((32, 32), 0.5)
    with pytest.raises(dif.AlignmentError, match="alignment failed"):
        dif.align_pair(flat, flat)
    with pytest.raises(ImageError):
        dif.align_pair(flat, flat[:30])


def test_overlap_crops_both_images():
    a = np.arange(20.0).reshape(4, 5)
    f, n = dif.overlap(a, a, (1, -2))
    assert f.shape == n.shape == (2, 4)
    np.testing.assert_array_equal(n, a[0:2, 1:5])
    np.testing.assert_array_equal(f, a[2:4, 0:4])
    with pytest.raises(ImageError, match="no overlap"):
        dif.overlap(a, a, (5, 0))


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 0.95))
def test_exact_gain_relation_cancels(seed, c):
    img = _smooth(seed) * 0.8 + 0.1
    d = dif.differential_image(img, c * img)
    assert d.diff_energy < 1e-12
    assert d.gain == pytest.approx(1.0 / c)


def test_diff_energy_is_mean_square():
    rng = np.random.default_rng(2)
    a, b = rng.random((40, 40)), rng.random((40, 40))
    d = dif.differential_image(a, b, (2, -1))
    assert d.diff_energy == float(np.mean(d.diff * d.diff))
    assert d.diff.shape == (39, 38)


def _sinusoid_image(amplitude, period, side=32):
    x = np.arange(side)
    return np.tile(0.5 + amplitude * np.sin(2 * np.pi * x / period), (side, 1))


@pytest.mark.parametrize("amplitude, period", [(0.3, 8), (0.2, 10), (0.4, 6)])
def test_sss_sinusoid_closed_form(amplitude, period):
    img = _sinusoid_image(amplitude, period)
    grid, angles = ocl_grid(img, 16)
    assert grid.n_valid == 4 and np.all(angles == 0.0)
    # at angle 0 the window is block[2:13, 2:13]; second differences sit on
    # block columns 3..11, where d2 sin(wx) = -4 sin^2(w/2) sin(wx)
    expected = []
    for c0 in (0, 16):
        cols = c0 + np.arange(3, 12)
        expected.append(4 * amplitude * np.sin(np.pi / period) ** 2 * np.abs(np.sin(2 * np.pi * cols / period)).mean())
    assert dif.sss_smoothness(img, grid, angles) == pytest.approx(np.mean(expected), rel=1e-9)


def test_sss_square_wave_rougher_than_sinusoid():
    sine = _sinusoid_image(0.3, 8)
    square = np.tile(np.where(np.arange(32) % 8 < 4, 0.8, 0.2), (32, 1))
    gs, as_ = ocl_grid(sine, 16)
    gq, aq = ocl_grid(square, 16)
    assert dif.sss_smoothness(square, gq, aq) > dif.sss_smoothness(sine, gs, as_)


def test_sss_no_valid_blocks():
    grid = BlockGrid(16, 1, 1, [0.0], [False])
    with pytest.raises(ValueError, match="no valid blocks"):
        dif.sss_smoothness(np.zeros((16, 16)), grid)


def test_ridge_cv_two_populations_and_minimum():
    img = np.zeros((32, 64))
    for c in range(4):
        amp = 0.2 if c % 2 == 0 else 0.4
        img[:, c * 16 : (c + 1) * 16] = amp * (np.arange(16) % 4 < 2)
    grid = BlockGrid(16, 2, 4, np.ones(8), np.ones(8, bool))
    assert dif.ridge_amplitude_cv(img, grid) == pytest.approx(1 / 3)
    few = BlockGrid(16, 1, 3, np.ones(3), np.ones(3, bool))
    with pytest.raises(ValueError, match="at least 4"):
        dif.ridge_amplitude_cv(img[:16, :48], few)


def test_highlight_irregularity_matches_flood_fill():
    img = np.full((48, 48, 3), 0.2)
    for (y, x, s) in ((4, 4, 3), (20, 6, 5), (8, 30, 4), (30, 30, 9), (40, 10, 6)):
        img[y : y + s, x : x + s] = 1.0
    flash = illumcues.specular_highlight_ratio(img, texture_window=3, texture_thresh=0.02)
    nonflash = illumcues.specular_highlight_ratio(np.full((48, 48, 3), 0.2))
    mask = oracles.specular_mask(img.tolist(), window=3, texture=0.02)
    sizes = oracles.component_sizes8(mask)
    shr = sum(map(sum, mask)) / (48 * 48)
    expected = len(sizes) * (oracles.pstd(sizes) / (sum(sizes) / len(sizes))) * shr
    value = dif.highlight_irregularity(flash, nonflash)
    assert value > 0
    assert value == pytest.approx(expected, rel=1e-12)


def test_batch_differential_directions(synthetic_batch):
    b = synthetic_batch
    assert b.col("genuine", "diff_structure").mean() > b.col("print", "diff_structure").mean()
    assert np.nanmean(b.col("genuine", "sss_flash")) < np.nanmean(b.col("molded", "sss_flash"))
    assert np.nanmean(b.col("genuine", "ridge_cv_flash")) > np.nanmean(b.col("molded", "ridge_cv_flash"))
