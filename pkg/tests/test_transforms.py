import numpy as np
import pytest

from steertest.errors import ParamError
from steertest.rng import SplitMix64
from steertest.transforms import (DEFAULT_PARAMS, TransformSpec, add_fog,
                                  add_rain, adjust_brightness, adjust_contrast,
                                  affine_transform, apply, blur,
                                  gaussian_kernel_1d, rotation_matrix,
                                  scale_matrix, shear_matrix,
                                  translation_matrix, unique_params)

from conftest import random_image
from reference import ref_affine

IDENTITY_SPECS = [
    TransformSpec("brightness", (0,)),
    TransformSpec("contrast", (1.0,)),
    TransformSpec("translation", (0, 0)),
    TransformSpec("scale", (1.0, 1.0)),
    TransformSpec("shear", (0.0, 0.0)),
    TransformSpec("rotation", (0,)),
    TransformSpec("blur", ("averaging", 1)),
    TransformSpec("rain", (99, 0.0)),
    TransformSpec("fog", (99, 0.0)),
]


@pytest.mark.parametrize("spec", IDENTITY_SPECS, ids=lambda s: s.kind)
def test_identity_parameters_are_noops(spec, frame16):
    assert np.array_equal(apply(frame16, spec), frame16)


def test_apply_never_mutates_input(frame16):
    snapshot = frame16.copy()
    for spec in [TransformSpec("brightness", (40,)),
                 TransformSpec("rotation", (9,)),
                 TransformSpec("blur", ("median", 3)),
                 TransformSpec("fog", (3, 0.7)),
                 TransformSpec("rain", (3, 0.7))]:
        apply(frame16, spec)
    assert np.array_equal(frame16, snapshot)


def test_brightness_arithmetic_and_clamp():
    img = np.full((2, 2, 1), 200, np.uint8)
    assert adjust_brightness(img, 100)[0, 0, 0] == 255
    img = np.full((2, 2, 1), 30, np.uint8)
    assert adjust_brightness(img, -100)[0, 0, 0] == 0
    assert adjust_brightness(img, 15.4)[0, 0, 0] == 45
    assert adjust_brightness(img, 15.5)[0, 0, 0] == 46


def test_brightness_grid_has_ten_variants(frame16):
    grid = DEFAULT_PARAMS["brightness"]
    assert grid == tuple((b,) for b in range(10, 101, 10))
    variants = {apply(frame16, TransformSpec("brightness", p)).tobytes()
                for p in grid}
    assert len(variants) == 10


def test_contrast_arithmetic():
    img = np.full((1, 1, 1), 100, np.uint8)
    assert adjust_contrast(img, 1.2)[0, 0, 0] == 120
    img = np.full((1, 1, 1), 150, np.uint8)
    assert adjust_contrast(img, 3.0)[0, 0, 0] == 255
    with pytest.raises(ParamError):
        adjust_contrast(img, 0.0)
    with pytest.raises(ParamError):
        adjust_contrast(img, -1.0)


def test_pointwise_maps_commute_with_permutation(frame16):
    stream = SplitMix64(31)
    flat = frame16.reshape(-1, 3)
    perm = np.argsort([stream.next_u64() for _ in range(flat.shape[0])])
    permuted = flat[perm].reshape(frame16.shape)
    for spec in (TransformSpec("brightness", (35,)), TransformSpec("contrast", (1.6,))):
        direct = apply(permuted, spec)
        indirect = apply(frame16, spec).reshape(-1, 3)[perm].reshape(frame16.shape)
        assert np.array_equal(direct, indirect)


def test_translation_shifts_and_fills_black(frame16):
    out = apply(frame16, TransformSpec("translation", (10, 10)))
    assert out.shape == frame16.shape
    assert not out[:10, :, :].any()
    assert not out[:, :10, :].any()
    assert np.array_equal(out[10:, 10:, :], frame16[:6, :6, :])


def test_affine_identity_matrix(frame16):
    m = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert np.array_equal(affine_transform(frame16, m), frame16)


def test_affine_singular_matrix(frame16):
    with pytest.raises(ParamError):
        affine_transform(frame16, np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]))


def test_rotation_matches_inverse_map_reference():
    stream = SplitMix64(32)
    for _ in range(5):
        img = random_image(stream)
        out = apply(img, TransformSpec("rotation", (6,)))
        center = ((img.shape[1] - 1) / 2.0, (img.shape[0] - 1) / 2.0)
        ref = np.array(ref_affine(img.tolist(),
                                  rotation_matrix(6, center).tolist()),
                       dtype=np.int64)
        assert np.abs(out.astype(np.int64) - ref).max() <= 1


def test_affine_ops_match_reference_matrices(frame16):
    pairs = [
        (TransformSpec("shear", (-0.1, 0.0)), shear_matrix(-0.1, 0.0)),
        (TransformSpec("scale", (2.5, 2.5)), scale_matrix(2.5, 2.5)),
        (TransformSpec("translation", (20, 30)), translation_matrix(20, 30)),
    ]
    for spec, matrix in pairs:
        assert np.array_equal(apply(frame16, spec),
                              affine_transform(frame16, matrix))


def test_blur_constant_image_fixpoint():
    img = np.full((10, 12, 3), 77, np.uint8)
    for name, params in [("averaging", (4,)), ("gaussian", (5,)),
                         ("median", (3,)), ("bilateral", (9, 75.0, 75.0))]:
        assert np.array_equal(blur(img, name, params), img)


def test_averaging_accepts_table_sizes(frame16):
    for k in (3, 4, 5, 6):
        out = blur(frame16, "averaging", (k,))
        assert out.shape == frame16.shape


def test_median_orders_neighborhood():
    img = np.arange(9, dtype=np.uint8).reshape(3, 3, 1)
    out = blur(img, "median", (3,))
    assert out[1, 1, 0] == 4


def test_median_rejects_even_kernel(frame16):
    with pytest.raises(ParamError):
        blur(frame16, "median", (4,))
    with pytest.raises(ParamError):
        blur(frame16, "gaussian", (4,))
    with pytest.raises(ParamError):
        blur(frame16, "bilateral", (8, 75.0, 75.0))


def test_gaussian_kernel_normalized():
    for k in (3, 5, 7, 9):
        assert abs(gaussian_kernel_1d(k).sum() - 1.0) < 1e-9


def test_fog_deterministic_and_brightening(frame16):
    a = add_fog(frame16, 123, 0.6)
    b = add_fog(frame16, 123, 0.6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, add_fog(frame16, 124, 0.6))
    full = add_fog(frame16, 123, 1.0)
    assert full.mean() > frame16.mean()


def test_fog_full_intensity_brightens_any_nonwhite():
    stream = SplitMix64(33)
    for _ in range(10):
        img = random_image(stream, 8, 8, 3)
        out = add_fog(img, stream.next_u64(), 1.0)
        assert out.mean() > img.mean()
    nearly_white = np.full((4, 4, 1), 255, np.uint8)
    nearly_white[2, 2, 0] = 254
    out = add_fog(nearly_white, 5, 1.0)
    assert out.mean() > nearly_white.mean()
    all_white = np.full((4, 4, 1), 255, np.uint8)
    assert np.array_equal(add_fog(all_white, 5, 1.0), all_white)


def test_rain_deterministic_and_changes_pixels(frame16):
    a = add_rain(frame16, 9, 1.0)
    b = add_rain(frame16, 9, 1.0)
    assert np.array_equal(a, b)
    assert (a != frame16).any()
    assert not np.array_equal(a, add_rain(frame16, 10, 1.0))


def test_rain_streak_statistics(frame16):
    # full intensity must brighten a nontrivial share of pixels
    out = add_rain(frame16, 42, 1.0)
    brightened = int((out.astype(int) > frame16.astype(int) + 10).sum())
    assert brightened > frame16.size // 50


def test_outputs_always_uint8_in_range():
    stream = SplitMix64(34)
    specs = [TransformSpec("brightness", (100,)),
             TransformSpec("brightness", (-100,)),
             TransformSpec("contrast", (3.0,)),
             TransformSpec("scale", (6.0, 6.0)),
             TransformSpec("shear", (-1.0, 0.0)),
             TransformSpec("rotation", (30,)),
             TransformSpec("translation", (100, 100)),
             TransformSpec("blur", ("bilateral", 9, 75.0, 75.0)),
             TransformSpec("fog", (1, 1.0)),
             TransformSpec("rain", (1, 1.0))]
    for _ in range(3):
        img = random_image(stream)
        for spec in specs:
            out = apply(img, spec)
            assert out.dtype == np.uint8
            assert out.shape == img.shape


def test_unique_params_dedupes_blur_grid():
    grid = unique_params(DEFAULT_PARAMS["blur"], 10)
    assert len(grid) == 10
    assert grid.count(("gaussian", 3)) == 1
    assert ("bilateral", 9, 75.0, 75.0) in grid


def test_bad_kind_and_intensity():
    img = np.zeros((2, 2, 1), np.uint8)
    with pytest.raises(ParamError):
        apply(img, TransformSpec("vortex", (1,)))
    with pytest.raises(ParamError):
        add_fog(img, 1, 1.5)
    with pytest.raises(ParamError):
        add_rain(img, 1, -0.1)
