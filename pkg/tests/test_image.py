import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from oracles import count_disk_lattice, luminance, sobel_direct
from threadtone.image import (build_pixel_weights, build_target, crop_region, gradient_field,
                              invert, load_grayscale, make_region, save_image, to_gray)

gray_images = arrays(np.uint8, st.tuples(st.integers(3, 12), st.integers(3, 12)))


def test_load_white_png(tmp_path):
    p = tmp_path / "w.png"
    Image.new("L", (1, 1), 255).save(p)
    img = load_grayscale(p)
    assert img.shape == (1, 1) and img.dtype == np.uint8 and img[0, 0] == 255


def test_load_red_uses_luminance(tmp_path):
    p = tmp_path / "r.png"
    Image.new("RGB", (1, 1), (255, 0, 0)).save(p)
    assert load_grayscale(p)[0, 0] == luminance((255, 0, 0)) == 76


def test_load_rgba_flattens_on_white(tmp_path):
    p = tmp_path / "t.png"
    Image.new("RGBA", (2, 2), (0, 0, 0, 0)).save(p)
    assert (load_grayscale(p) == 255).all()


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_gray_roundtrip(tmp_path, rng, suffix):
    img = rng.integers(0, 256, (401, 401), dtype=np.uint8)
    p = tmp_path / f"g{suffix}"
    save_image(img, p)
    np.testing.assert_array_equal(load_grayscale(p), img)


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_grayscale(tmp_path / "missing.png")
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(ValueError):
        load_grayscale(bad)


def test_to_gray_random_colours(rng):
    px = rng.integers(0, 256, (20, 3))
    got = to_gray(px.reshape(4, 5, 3)).ravel()
    assert got.tolist() == [luminance(tuple(c)) for c in px]


def test_default_crop_401():
    crop, region = crop_region(np.zeros((401, 401), np.uint8))
    assert crop.shape == (401, 401)
    assert region.radius == 200 and region.center == (200, 200)
    assert region.n == count_disk_lattice(200)


def test_crop_radius_zero():
    _, region = crop_region(np.zeros((5, 5), np.uint8), radius=0)
    assert region.n == 1


def test_crop_5x5_radius_2():
    _, region = crop_region(np.zeros((5, 5), np.uint8), "circle", radius=2)
    assert region.n == count_disk_lattice(2) == 13


def test_crop_square_counts_all():
    _, region = crop_region(np.zeros((9, 9), np.uint8), "square", radius=3)
    assert region.n == 49


def test_crop_offcentre_and_bounds():
    img = np.arange(100, dtype=np.uint8).reshape(10, 10)
    crop, region = crop_region(img, center=(3, 4), radius=2)
    np.testing.assert_array_equal(crop, img[2:7, 1:6])
    assert region.origin == (1, 2)
    with pytest.raises(ValueError):
        crop_region(img, center=(1, 5), radius=2)


def test_even_image_default_crop_fits():
    crop, region = crop_region(np.zeros((400, 600), np.uint8))
    assert crop.shape == (399, 399) and region.radius == 199


@pytest.mark.parametrize("r", [2, 3, 7, 20, 57])
def test_disk_count_bounds(r):
    n = make_region("circle", r).n
    assert math.pi * (r - 1) ** 2 <= n <= math.pi * (r + 1) ** 2


def test_region_index_is_bijection():
    region = make_region("circle", 6)
    idx = region.index_map[region.inside]
    assert sorted(idx.tolist()) == list(range(region.n))
    assert (region.index_map[~region.inside] == -1).all()


def test_invert_values():
    assert invert(np.array([[0]]))[0, 0] == 255
    assert invert(np.array([[255]]))[0, 0] == 0


@given(gray_images)
def test_invert_involution(img):
    np.testing.assert_array_equal(invert(invert(img)), img)


def test_gradient_constant_is_zero():
    g = gradient_field(np.full((7, 9), 90, np.uint8))
    assert not g.magnitude.any() and not g.gx.any() and not g.gy.any()


def test_gradient_vertical_edge_has_no_gy():
    img = np.zeros((9, 9), np.uint8)
    img[:, 5:] = 200
    g = gradient_field(img)
    assert (g.gy == 0).all()
    assert g.magnitude.max() == 255


def test_gradient_ramp_matches_direct_convolution():
    ramp = (np.arange(25).reshape(5, 5) * 7 + np.arange(5)[:, None] * 3).astype(np.uint8)
    gx_ref, gy_ref = sobel_direct(ramp)
    g = gradient_field(ramp)
    np.testing.assert_allclose(g.gx, gx_ref)
    np.testing.assert_allclose(g.gy, gy_ref)
    mag = np.hypot(gx_ref, gy_ref)
    np.testing.assert_allclose(g.magnitude, mag * 255 / mag.max())


def test_gradient_too_small():
    with pytest.raises(ValueError):
        gradient_field(np.zeros((2, 5), np.uint8))


def test_gradient_region_normalisation_clips_outside():
    img = np.zeros((11, 11), np.uint8)
    img[0, 0] = 255  # a corner spike outside the disk
    img[5, 5:] = 40
    region = make_region("circle", 5)
    g = gradient_field(img, region)
    assert g.magnitude.max() == 255
    assert region.gather(g.magnitude).max() == pytest.approx(255)


def _target_inputs():
    img = np.array([[10, 20, 30], [40, 100, 60], [70, 80, 90]], np.uint8)
    region = make_region("square", 1)
    return img, gradient_field(img), region


def test_target_endpoints():
    img, grad, region = _target_inputs()
    np.testing.assert_array_equal(build_target(img, grad, region, 0.0), img.ravel())
    np.testing.assert_allclose(build_target(img, grad, region, 1.0), grad.magnitude.ravel())


def test_target_midpoint_arithmetic():
    region = make_region("square", 1)
    img = np.full((3, 3), 100, np.uint8)
    grad = gradient_field(img)
    grad = type(grad)(grad.gx, grad.gy, np.full((3, 3), 50.0))
    assert build_target(img, grad, region, 0.5)[0] == 75.0


@given(st.floats(0, 1))
@settings(max_examples=50)
def test_target_affine_in_alpha(alpha):
    img, grad, region = _target_inputs()
    b0 = build_target(img, grad, region, 0.0)
    b1 = build_target(img, grad, region, 1.0)
    np.testing.assert_allclose(build_target(img, grad, region, alpha), (1 - alpha) * b0 + alpha * b1)


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_target_rejects_alpha(alpha):
    img, grad, region = _target_inputs()
    with pytest.raises(ValueError):
        build_target(img, grad, region, alpha)


def test_weights():
    region = make_region("circle", 4)
    assert (build_pixel_weights(region) == 1.0).all()
    assert (build_pixel_weights(region, np.full((9, 9), 255, np.uint8)) == 2.0).all()
    mask = np.zeros((9, 9), np.uint8)
    mask[2:5, 3:7] = 255
    w = region.scatter(build_pixel_weights(region, mask))
    inside = np.zeros((9, 9), bool)
    inside[2:5, 3:7] = True
    assert (w[inside & region.inside] == 2.0).all()
    assert (w[~inside & region.inside] == 1.0).all()
    assert set(np.unique(build_pixel_weights(region, mask)).tolist()) == {1.0, 2.0}
    with pytest.raises(ValueError):
        build_pixel_weights(region, np.zeros((8, 9), np.uint8))
