"""Host-CPU edge detection pipelines: the software comparison points.

Three implementations of the same algorithm (5x5 Gaussian then Sobel + NMS),
all bit-exact equal by construction:

* naive      — direct 25-tap convolution, separate gradient and NMS passes,
               single thread;
* threaded   — the naive stages split into row bands across worker threads,
               halo rows re-read but never re-written;
* optimized  — separable convolution (rows then columns, one floor division
               at the end), fused gradient+NMS pass, threaded.

The band functions release the GIL in the compiled backend, so threading
scales on real cores.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .backend import impl as _impl
from .errors import ImageTooSmallError
from .image import EdgeMap, PixelImage
from .kernels import DEFAULT_THRESHOLD, ConvKernel, make_gaussian_5x5

_MAX_WORKERS = 8
_pool_lock = threading.Lock()
_pool: ThreadPoolExecutor | None = None


def _executor() -> ThreadPoolExecutor:
    global _pool
    with _pool_lock:
        if _pool is None:
            _pool = ThreadPoolExecutor(max_workers=_MAX_WORKERS)
        return _pool


@dataclass(frozen=True)
class PipelineParams:
    """Shared pipeline parameters; defaults mirror the fabric kernels."""

    kernel: ConvKernel = field(default_factory=make_gaussian_5x5)
    threshold: int = DEFAULT_THRESHOLD
    thread_count: int = 2

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")


def _check(img: PixelImage):
    if img.width < 5 or img.height < 5:
        raise ImageTooSmallError(
            f"edge detection needs at least 5x5, got {img.width}x{img.height}"
        )


def _bands(height: int, n: int) -> list[tuple[int, int]]:
    cuts = [round(i * height / n) for i in range(n + 1)]
    return [(cuts[i], cuts[i + 1]) for i in range(n) if cuts[i + 1] > cuts[i]]


def _run_banded(fn, height: int, threads: int):
    """Run fn(y0, y1) over row bands; one barrier per call."""
    bands = _bands(height, threads)
    if len(bands) == 1:
        fn(*bands[0])
        return
    futures = [_executor().submit(fn, y0, y1) for y0, y1 in bands]
    for f in futures:
        f.result()


def edge_detect_naive(img: PixelImage, params: PipelineParams | None = None) -> EdgeMap:
    """Direct nested-loop pipeline on one thread; the timing baseline."""
    params = params or PipelineParams()
    _check(img)
    h, w = img.height, img.width
    blur = np.empty((h, w), dtype=np.uint8)
    _impl.conv5x5_direct(img.samples, params.kernel.taps, params.kernel.divisor, blur, 0, h)
    gx = np.zeros((h, w), dtype=np.int32)
    gy = np.zeros((h, w), dtype=np.int32)
    mag = np.zeros((h, w), dtype=np.int32)
    _impl.sobel_planes(blur, gx, gy, mag, 0, h)
    out = np.empty((h, w), dtype=np.uint8)
    _impl.nms_threshold(gx, gy, mag, params.threshold, out, 0, h)
    return EdgeMap.from_array(out)


def edge_detect_threaded(img: PixelImage, params: PipelineParams | None = None) -> EdgeMap:
    """Row-band data parallelism over the naive stages; output is identical
    to edge_detect_naive for every thread count."""
    params = params or PipelineParams()
    _check(img)
    h, w = img.height, img.width
    n = params.thread_count
    taps, div = params.kernel.taps, params.kernel.divisor
    blur = np.empty((h, w), dtype=np.uint8)
    _run_banded(lambda y0, y1: _impl.conv5x5_direct(img.samples, taps, div, blur, y0, y1), h, n)
    gx = np.zeros((h, w), dtype=np.int32)
    gy = np.zeros((h, w), dtype=np.int32)
    mag = np.zeros((h, w), dtype=np.int32)
    _run_banded(lambda y0, y1: _impl.sobel_planes(blur, gx, gy, mag, y0, y1), h, n)
    out = np.empty((h, w), dtype=np.uint8)
    thr = params.threshold
    _run_banded(lambda y0, y1: _impl.nms_threshold(gx, gy, mag, thr, out, y0, y1), h, n)
    return EdgeMap.from_array(out)


def _separate(kernel: ConvKernel) -> tuple[np.ndarray, np.ndarray] | None:
    """Integer rank-1 factors (row_k, col_k) with taps == outer(col_k, row_k)
    and sum(col_k) * sum(row_k) == divisor, or None if no such split exists.

    For the binomial Gaussian this yields [1,4,6,4,1] twice (divisor split
    16 x 16).
    """
    taps = kernel.taps
    pivot = None
    for i in range(5):
        if taps[i].any():
            pivot = i
            break
    if pivot is None:
        return None
    row = taps[pivot].astype(np.int64)
    g = int(np.gcd.reduce(row))
    if g == 0:
        return None
    row //= g
    p = int(np.argmax(row != 0))
    if taps[pivot, p] % row[p] != 0:
        return None
    col = np.zeros(5, dtype=np.int64)
    for i in range(5):
        if taps[i, p] % row[p] != 0:
            return None
        col[i] = taps[i, p] // row[p]
    if not np.array_equal(np.outer(col, row), taps):
        return None
    if int(col.sum()) * int(row.sum()) != kernel.divisor:
        return None
    return (
        np.ascontiguousarray(row, dtype=np.int32),
        np.ascontiguousarray(col, dtype=np.int32),
    )


def edge_detect_optimized(img: PixelImage, params: PipelineParams | None = None) -> EdgeMap:
    """Separable convolution plus a fused gradient+NMS pass, threaded.

    Full 32-bit intermediates are kept between the two separable passes and
    divided once at the end, so the result matches the direct convolution
    bit-for-bit.
    """
    params = params or PipelineParams()
    _check(img)
    h, w = img.height, img.width
    n = params.thread_count
    factors = _separate(params.kernel)
    if factors is None:
        # Not separable with integer factors: the threaded direct path is
        # still bit-exact, just slower.
        return edge_detect_threaded(img, params)
    row_k, col_k = factors
    tmp = np.empty((h, w), dtype=np.int32)
    _run_banded(lambda y0, y1: _impl.conv5_rows(img.samples, row_k, tmp, y0, y1), h, n)
    blur = np.empty((h, w), dtype=np.uint8)
    div = params.kernel.divisor
    _run_banded(lambda y0, y1: _impl.conv5_cols(tmp, col_k, div, blur, y0, y1), h, n)
    out = np.empty((h, w), dtype=np.uint8)
    thr = params.threshold
    _run_banded(lambda y0, y1: _impl.canny_fused(blur, thr, out, y0, y1), h, n)
    return EdgeMap.from_array(out)
