"""Golden (whole-image) kernel operations and the streaming latency model.

The two fabric kernels are a 5x5 integer Gaussian convolution and a Canny
stage (Sobel gradients + non-max suppression, single threshold, no
hysteresis). Reference operations are pure functions; their streaming
counterparts live in `streaming.py` and must match them token-for-token.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import impl as _impl
from .errors import ImageTooSmallError
from .image import EdgeMap, PixelImage

DEFAULT_THRESHOLD = 128

# Modeling constants, not measurements: extra register stages after the
# window math of each streaming kernel.
PIPELINE_DEPTH = {"conv": 4, "canny": 6, "identity": 2}

# Half-width of the input window each streaming kernel needs per output, and
# how many chained window passes it performs (canny runs NMS over the
# magnitude plane, a second 3x3 pass).
WINDOW_RADIUS = {"conv": 2, "canny": 1, "identity": 0}
WINDOW_PASSES = {"conv": 1, "canny": 2, "identity": 1}


@dataclass(frozen=True)
class ConvKernel:
    """5x5 integer convolution taps with a normalizing divisor."""

    taps: np.ndarray = field(repr=False)
    divisor: int = 256

    def __post_init__(self):
        t = np.ascontiguousarray(self.taps, dtype=np.int32)
        if t.shape != (5, 5):
            raise ValueError(f"taps must be 5x5, got {t.shape}")
        if self.divisor <= 0:
            raise ValueError("divisor must be positive")
        if int(t.sum()) != self.divisor:
            raise ValueError(
                f"taps must sum to the divisor ({int(t.sum())} != {self.divisor})"
            )
        object.__setattr__(self, "taps", t)


def make_gaussian_5x5() -> ConvKernel:
    """Binomial 5x5 kernel: outer product of [1,4,6,4,1], divisor 256."""
    row = np.array([1, 4, 6, 4, 1], dtype=np.int32)
    return ConvKernel(taps=np.outer(row, row).astype(np.int32), divisor=256)


def _require_size(img: PixelImage, min_side: int, op: str):
    if img.width < min_side or img.height < min_side:
        raise ImageTooSmallError(
            f"{op} needs at least {min_side}x{min_side}, got {img.width}x{img.height}"
        )


def conv2d_reference(img: PixelImage, kernel: ConvKernel) -> PixelImage:
    """Direct 5x5 convolution, 32-bit accumulation, replicated borders."""
    _require_size(img, 5, "conv2d")
    out = np.empty_like(img.samples)
    _impl.conv5x5_direct(img.samples, kernel.taps, kernel.divisor, out, 0, img.height)
    return PixelImage.from_array(out)


def canny_reference(img: PixelImage, threshold: int = DEFAULT_THRESHOLD) -> EdgeMap:
    """Sobel gradients, L1 magnitude, 4-bin NMS, single threshold.

    The 1-pixel border ring is forced to 0 (the NMS window is undefined
    there).
    """
    _require_size(img, 3, "canny")
    out = np.empty_like(img.samples)
    _impl.canny_fused(img.samples, int(threshold), out, 0, img.height)
    return EdgeMap.from_array(out)


def latency_of(kernel_kind: str, frame_width: int) -> int:
    """Fill latency in fabric cycles before a streaming kernel's first output.

    One centered KxK window pass over a width-w stream costs
    (K-1)/2 * w + (K-1)/2 cycles of fill; chained passes add up, and the
    pipeline depth rides on top. The canny kernel performs two 3x3 passes
    (gradient, then NMS over magnitudes), which is why its fill term equals
    the conv kernel's single 5x5 pass.
    """
    radius = WINDOW_RADIUS[kernel_kind]
    passes = WINDOW_PASSES[kernel_kind]
    k = 2 * radius + 1
    if frame_width < k:
        raise ImageTooSmallError(
            f"{kernel_kind} needs frame width >= {k}, got {frame_width}"
        )
    return passes * (radius * frame_width + radius) + PIPELINE_DEPTH[kernel_kind]
