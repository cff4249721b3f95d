import numpy as np
import pytest

import oracle
from fabricsim import (
    ConvKernel,
    PixelImage,
    canny_reference,
    conv2d_reference,
    edge_detect_naive,
    edge_detect_optimized,
    edge_detect_threaded,
    make_gaussian_5x5,
)
from fabricsim.errors import ImageTooSmallError
from fabricsim.software import PipelineParams, _separate


def random_image(rng, w, h):
    return PixelImage.from_array(rng.integers(0, 256, (h, w), dtype=np.uint8))


def test_naive_equals_golden_composition(rng):
    img = random_image(rng, 31, 23)
    got = edge_detect_naive(img, PipelineParams(thread_count=1))
    want = canny_reference(conv2d_reference(img, make_gaussian_5x5()), 128)
    assert got == want


def test_naive_matches_oracle(rng):
    img = random_image(rng, 12, 9)
    got = edge_detect_naive(img)
    assert got.values.tolist() == oracle.edge_pipeline(oracle.to_lists(img.samples))


def test_constant_image_has_no_edges():
    img = PixelImage.constant(32, 32, 77)
    assert not edge_detect_naive(img).values.any()
    assert not edge_detect_threaded(img).values.any()
    assert not edge_detect_optimized(img).values.any()


@pytest.mark.parametrize("threads", [1, 2, 3, 5, 7, 8])
def test_threaded_equals_naive_all_counts(rng, threads):
    img = random_image(rng, 40, 67)  # height indivisible by most counts
    naive = edge_detect_naive(img)
    threaded = edge_detect_threaded(img, PipelineParams(thread_count=threads))
    assert threaded == naive


def test_optimized_equals_naive_property(rng):
    for _ in range(20):
        w = int(rng.integers(5, 64))
        h = int(rng.integers(5, 64))
        img = random_image(rng, w, h)
        assert edge_detect_optimized(img) == edge_detect_naive(img)


def test_optimized_with_nondefault_threshold(rng):
    img = random_image(rng, 33, 21)
    p = PipelineParams(threshold=40)
    assert edge_detect_optimized(img, p) == edge_detect_naive(img, p)


def test_image_too_small():
    img = PixelImage.constant(4, 4, 1)
    for fn in (edge_detect_naive, edge_detect_threaded, edge_detect_optimized):
        with pytest.raises(ImageTooSmallError):
            fn(img)


def test_thread_count_validation():
    with pytest.raises(ValueError):
        PipelineParams(thread_count=0)


def test_separable_factors_of_gaussian():
    row_k, col_k = _separate(make_gaussian_5x5())
    assert row_k.tolist() == [1, 4, 6, 4, 1]
    assert col_k.tolist() == [1, 4, 6, 4, 1]
    assert int(row_k.sum()) * int(col_k.sum()) == 256


def test_non_separable_kernel_falls_back(rng):
    taps = make_gaussian_5x5().taps.copy()
    taps[0, 0] += 1
    taps[0, 1] -= 1  # sum preserved, rank-1 broken
    kernel = ConvKernel(taps=taps, divisor=256)
    assert _separate(kernel) is None
    img = random_image(rng, 24, 18)
    p = PipelineParams(kernel=kernel)
    assert edge_detect_optimized(img, p) == edge_detect_naive(img, p)
