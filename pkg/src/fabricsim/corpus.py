"""Deterministic synthetic image corpus.

The benchmark methodology calls for 1024x768 grayscale frames; when no real
image is supplied, the harness generates structured synthetic content
(gradients, shapes, texture, noise) so the edge detector has realistic work.
BENCH_SEED pins the generator seed.
"""

from __future__ import annotations

import os

import numpy as np

from .image import PixelImage

CORPUS_WIDTH = 1024
CORPUS_HEIGHT = 768


def bench_seed(default: int = 0) -> int:
    raw = os.environ.get("BENCH_SEED")
    if raw is None:
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"BENCH_SEED={raw!r} is not an integer") from None


def synthetic_image(width: int = CORPUS_WIDTH, height: int = CORPUS_HEIGHT,
                    seed: int = 0) -> PixelImage:
    """Structured test frame: smooth shading, hard-edged shapes, mild noise."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    img = (
        110.0
        + 45.0 * np.sin(x / 53.0 + 0.7 * seed)
        + 35.0 * np.cos(y / 41.0 - 0.3 * seed)
    )
    for _ in range(10):
        x0 = rng.integers(0, width)
        y0 = rng.integers(0, height)
        ww = int(rng.integers(width // 16, width // 3))
        hh = int(rng.integers(height // 16, height // 3))
        level = float(rng.integers(0, 256))
        img[y0 : y0 + hh, x0 : x0 + ww] = 0.25 * img[y0 : y0 + hh, x0 : x0 + ww] + 0.75 * level
    for _ in range(8):
        cx = float(rng.integers(0, width))
        cy = float(rng.integers(0, height))
        r = float(rng.integers(min(width, height) // 24, min(width, height) // 6))
        level = float(rng.integers(0, 256))
        mask = (x - cx) ** 2 + (y - cy) ** 2 < r * r
        img[mask] = 0.3 * img[mask] + 0.7 * level
    img += rng.normal(0.0, 5.0, size=(height, width))
    return PixelImage.from_array(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def random_frame(width: int, height: int, rng: np.random.Generator) -> PixelImage:
    """Uniform random frame; the property-test workhorse."""
    return PixelImage.from_array(
        rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    )
