import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from fnfpad import photometry
from fnfpad.imgcore import ImageError

rgb_images = arrays(np.float64, st.tuples(st.integers(16, 24), st.integers(16, 24), st.just(3)),
                    elements=st.floats(0.01, 1.0))


def test_ramp_edge_energy_against_oracle():
    s = 0.03
    img = np.zeros((10, 12, 3))
    img[:, :, 1] = np.arange(12) * s
    gx, gy = oracles.sobel(img[:, :, 1].tolist())
    expected = np.mean(np.square(gx) + np.square(gy))
    assert photometry.channel_edge_energy(img, "g") == pytest.approx(expected, rel=1e-12)
    # interior columns carry exactly (8s)^2
    gxa = np.array(gx)
    np.testing.assert_allclose(gxa[:, 1:-1] ** 2, (8 * s) ** 2, rtol=1e-12)
    assert photometry.channel_edge_energy(img, "r") == 0.0


@given(rgb_images)
def test_red_blue_swap_permutes_metrics(img):
    swapped = img[:, :, ::-1].copy()
    a = photometry.channel_photometrics(img)
    b = photometry.channel_photometrics(swapped)
    for field in ("local_contrast", "edge_energy", "saturation"):
        np.testing.assert_allclose(getattr(b, field), getattr(a, field)[::-1], atol=1e-12, rtol=1e-12)
    assert b.color_temp_ratio == pytest.approx(1.0 / a.color_temp_ratio, rel=1e-12)


@given(rgb_images)
def test_saturation_in_unit_interval_and_ratio_positive(img):
    ph = photometry.channel_photometrics(img)
    assert all(0.0 <= v <= 1.0 for v in ph.saturation)
    assert ph.color_temp_ratio > 0


def test_degenerate_blue_is_reported_absent():
    img = np.full((16, 16, 3), 0.5)
    img[:, :, 2] = 0.0
    with pytest.raises(photometry.DegenerateChannelError):
        photometry.color_temperature_ratio(img)
    assert photometry.channel_photometrics(img).color_temp_ratio is None


def test_grayscale_input_rejected():
    with pytest.raises(ImageError):
        photometry.channel_edge_energy(np.zeros((8, 8)), 0)


def test_screen_flash_saturates_more_than_genuine(synthetic_batch):
    name = "saturation_{}_flash"
    screen = sum(synthetic_batch.col("screen", name.format(c)).mean() for c in photometry.CHANNELS)
    genuine = sum(synthetic_batch.col("genuine", name.format(c)).mean() for c in photometry.CHANNELS)
    assert screen > genuine
