import numpy as np
import pytest

import oracle
from fabricsim import (
    ConvKernel,
    PixelImage,
    canny_reference,
    conv2d_reference,
    latency_of,
    make_gaussian_5x5,
)
from fabricsim.errors import ImageTooSmallError


def as_image(rows):
    return PixelImage.from_array(np.array(rows, dtype=np.uint8))


def test_gaussian_taps():
    k = make_gaussian_5x5()
    assert k.taps[2, 2] == 36
    assert k.taps[0, 0] == 1
    assert int(k.taps.sum()) == 256 == k.divisor


def test_kernel_normalization_enforced():
    bad = np.ones((5, 5), dtype=np.int32)
    with pytest.raises(ValueError):
        ConvKernel(taps=bad, divisor=256)


@pytest.mark.parametrize("c", [0, 1, 100, 128, 254, 255])
def test_conv_constant_preserved(c):
    img = PixelImage.constant(9, 7, c)
    out = conv2d_reference(img, make_gaussian_5x5())
    assert np.all(out.samples == c)


def test_conv_impulse_frozen():
    a = np.zeros((9, 9), dtype=np.uint8)
    a[4, 4] = 255
    out = conv2d_reference(PixelImage.from_array(a), make_gaussian_5x5())
    # floor(255 * tap / 256) for the binomial taps
    expected_block = [
        [0, 3, 5, 3, 0],
        [3, 15, 23, 15, 3],
        [5, 23, 35, 23, 5],
        [3, 15, 23, 15, 3],
        [0, 3, 5, 3, 0],
    ]
    assert out.samples[2:7, 2:7].tolist() == expected_block
    rest = out.samples.copy()
    rest[2:7, 2:7] = 0
    assert not rest.any()
    # cross-check the frozen block against the brute-force oracle
    assert out.samples.tolist() == oracle.conv5x5(oracle.to_lists(a))


def test_conv_too_small():
    with pytest.raises(ImageTooSmallError):
        conv2d_reference(PixelImage.constant(4, 4, 7), make_gaussian_5x5())
    with pytest.raises(ImageTooSmallError):
        conv2d_reference(PixelImage.constant(5, 4, 7), make_gaussian_5x5())


def test_conv_matches_oracle_on_random_frames(rng):
    k = make_gaussian_5x5()
    for _ in range(12):
        h = int(rng.integers(5, 24))
        w = int(rng.integers(5, 24))
        a = rng.integers(0, 256, (h, w), dtype=np.uint8)
        got = conv2d_reference(PixelImage.from_array(a), k)
        assert got.samples.tolist() == oracle.conv5x5(oracle.to_lists(a))


def test_canny_constant_is_empty():
    img = PixelImage.constant(16, 16, 200)
    out = canny_reference(img, 128)
    assert not out.values.any()


def test_canny_constant_empty_even_at_zero_threshold():
    img = PixelImage.constant(8, 8, 50)
    assert not canny_reference(img, 0).values.any()


def test_canny_vertical_step_frozen():
    a = np.zeros((16, 16), dtype=np.uint8)
    a[:, 8:] = 255
    img = PixelImage.from_array(a)
    out = canny_reference(img, 128)
    expected = np.array(oracle.canny(oracle.to_lists(a), 128), dtype=np.uint8)
    assert np.array_equal(out.values, expected)
    # single 1-pixel-wide column at the last dark column, borders zeroed
    cols = set(np.nonzero(out.values)[1].tolist())
    rows = set(np.nonzero(out.values)[0].tolist())
    assert cols == {7}
    assert rows == set(range(1, 15))
    assert oracle.magnitude(oracle.to_lists(a), 7, 8) == 1020


def test_canny_horizontal_step_is_transposed_vertical():
    a = np.zeros((16, 16), dtype=np.uint8)
    a[8:, :] = 255
    out = canny_reference(PixelImage.from_array(a), 128)
    expected = np.array(oracle.canny(oracle.to_lists(a), 128), dtype=np.uint8)
    assert np.array_equal(out.values, expected)
    rows = set(np.nonzero(out.values)[0].tolist())
    assert rows == {7}
    v = np.zeros((16, 16), dtype=np.uint8)
    v[:, 8:] = 255
    assert np.array_equal(
        canny_reference(PixelImage.from_array(v), 128).values.T, out.values
    )


def test_canny_matches_oracle_on_random_frames(rng):
    for _ in range(10):
        h = int(rng.integers(3, 20))
        w = int(rng.integers(3, 20))
        a = rng.integers(0, 256, (h, w), dtype=np.uint8)
        got = canny_reference(PixelImage.from_array(a), 96)
        assert got.values.tolist() == oracle.canny(oracle.to_lists(a), 96)


def test_canny_too_small():
    with pytest.raises(ImageTooSmallError):
        canny_reference(PixelImage.constant(2, 8, 7), 128)


def test_transpose_symmetry(rng):
    for trial in range(16):
        h = int(rng.integers(4, 24))
        w = int(rng.integers(4, 24))
        # few distinct levels provoke magnitude ties
        levels = rng.choice([0, 53, 106, 128, 212, 255], size=(h, w))
        img = PixelImage.from_array(levels.astype(np.uint8))
        direct = canny_reference(img.transpose(), 64)
        transposed = canny_reference(img, 64).transpose()
        assert direct == transposed


def test_accumulator_bounds():
    # max convolution accumulator with 8-bit inputs and the binomial kernel
    assert 255 * 256 < 2**31
    # Sobel accumulators stay within +-4*255
    worst = [[0, 0, 255], [0, 0, 255], [0, 0, 255]]
    gx, gy = oracle.sobel_at(worst, 1, 1)
    assert gx == 1020 and gy == 0


def test_latency_formula_values():
    assert latency_of("conv", 1024) == 2 * 1024 + 2 + 4
    assert latency_of("canny", 1024) == 2 * (1024 + 1) + 6
    assert latency_of("identity", 64) == 2


def test_latency_width_precondition():
    with pytest.raises(ImageTooSmallError):
        latency_of("conv", 4)
    with pytest.raises(KeyError):
        latency_of("sort", 64)
