"""Pure-Python (numpy) kernel backend.

Fallback used when the compiled extension is unavailable. Every function here
defines the bit-exact integer semantics that `_ckernels` mirrors:

* 32-bit-safe signed accumulation, floor division (Python `//` semantics),
* edge replication for convolution borders,
* gradient magnitude = |Gx| + |Gy|, direction quantized to 4 bins with the
  integer test 256*|Gy| <=> 106*|Gx| (106/256 ~ tan 22.5 deg),
* non-max suppression keeps a pixel when it is strictly greater than its
  lesser-coordinate neighbour and >= the other one (bins 0, 1, 2); the
  anti-diagonal bin uses the orientation-symmetric ">= both, > either" rule,
* magnitude on the 1-pixel border ring is 0 and the output ring is forced 0.

Batch functions take a row band [y0, y1) so callers can split work across
threads; numpy releases the GIL for most of the heavy array operations.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Sobel pair: Gx responds to horizontal intensity change, Gy to vertical.
_SOBEL_X = ((-1, 0, 1), (-2, 0, 2), (-1, 0, 1))
_SOBEL_Y = ((-1, -2, -1), (0, 0, 0), (1, 2, 1))


def _rows_clamped(src: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Rows lo..hi-1 of src with out-of-range rows replicated from the edge."""
    h = src.shape[0]
    idx = np.clip(np.arange(lo, hi), 0, h - 1)
    return src[idx]


def conv5x5_direct(src, taps, divisor, out, y0, y1):
    """Direct 5x5 convolution with replicated borders into out rows [y0, y1)."""
    h, w = src.shape
    band = _rows_clamped(src, y0 - 2, y1 + 2).astype(np.int64)
    band = np.pad(band, ((0, 0), (2, 2)), mode="edge")
    acc = np.zeros((y1 - y0, w), dtype=np.int64)
    for i in range(5):
        for j in range(5):
            t = int(taps[i][j])
            if t:
                acc += t * band[i : i + (y1 - y0), j : j + w]
    np.floor_divide(acc, divisor, out=acc)
    np.clip(acc, 0, 255, out=acc)
    out[y0:y1] = acc.astype(np.uint8)


def conv5_rows(src, k5, tmp, y0, y1):
    """Horizontal 5-tap pass (no division) into int32 tmp rows [y0, y1)."""
    h, w = src.shape
    band = np.pad(src[y0:y1].astype(np.int32), ((0, 0), (2, 2)), mode="edge")
    acc = np.zeros((y1 - y0, w), dtype=np.int32)
    for j in range(5):
        t = int(k5[j])
        if t:
            acc += t * band[:, j : j + w]
    tmp[y0:y1] = acc


def conv5_cols(tmp, k5, divisor, out, y0, y1):
    """Vertical 5-tap pass over tmp with one floor division at the end."""
    h, w = tmp.shape
    band = _rows_clamped(tmp, y0 - 2, y1 + 2).astype(np.int64)
    acc = np.zeros((y1 - y0, w), dtype=np.int64)
    for i in range(5):
        t = int(k5[i])
        if t:
            acc += t * band[i : i + (y1 - y0), :]
    np.floor_divide(acc, divisor, out=acc)
    np.clip(acc, 0, 255, out=acc)
    out[y0:y1] = acc.astype(np.uint8)


def sobel_planes(src, gx, gy, mag, y0, y1):
    """Sobel gradient and L1 magnitude planes for rows [y0, y1); ring stays 0."""
    bgx, bgy, bmag = _grad_band(src, y0, y1)
    gx[y0:y1] = bgx
    gy[y0:y1] = bgy
    mag[y0:y1] = bmag


def nms_threshold(gx, gy, mag, threshold, out, y0, y1):
    """Directional non-max suppression + threshold into out rows [y0, y1).

    Requires mag rows y0-1 .. y1 (exclusive +1) to be valid already.
    """
    h, w = mag.shape
    out[y0:y1] = 0
    lo = max(y0, 1)
    hi = min(y1, h - 1)
    if hi <= lo or w < 3:
        return
    m = mag[lo:hi, 1 : w - 1]
    vx = gx[lo:hi, 1 : w - 1]
    vy = gy[lo:hi, 1 : w - 1]
    ax = np.abs(vx)
    ay = np.abs(vy)

    left = mag[lo:hi, 0 : w - 2]
    right = mag[lo:hi, 2:w]
    up = mag[lo - 1 : hi - 1, 1 : w - 1]
    down = mag[lo + 1 : hi + 1, 1 : w - 1]
    upleft = mag[lo - 1 : hi - 1, 0 : w - 2]
    downright = mag[lo + 1 : hi + 1, 2:w]
    upright = mag[lo - 1 : hi - 1, 2:w]
    downleft = mag[lo + 1 : hi + 1, 0 : w - 2]

    b0 = 256 * ay <= 106 * ax
    b2 = ~b0 & (256 * ax <= 106 * ay)
    diag = ~b0 & ~b2
    b1 = diag & (vx.astype(np.int64) * vy > 0)
    b3 = diag & ~b1

    keep = (
        (b0 & (m > left) & (m >= right))
        | (b2 & (m > up) & (m >= down))
        | (b1 & (m > upleft) & (m >= downright))
        | (b3 & (m >= upright) & (m >= downleft) & ((m > upright) | (m > downleft)))
    )
    edge = keep & (m >= threshold)
    view = out[lo:hi, 1 : w - 1]
    view[edge] = 255


def _grad_band(src, lo, hi):
    """Gradient and magnitude planes for absolute rows [lo, hi), band-relative
    storage (index r-lo). Ring rows/columns hold 0."""
    h, w = src.shape
    n = hi - lo
    gx = np.zeros((n, w), dtype=np.int32)
    gy = np.zeros((n, w), dtype=np.int32)
    mag = np.zeros((n, w), dtype=np.int32)
    rlo = max(lo, 1)
    rhi = min(hi, h - 1)
    if rhi > rlo and w >= 3:
        s = src.astype(np.int32)
        ax = np.zeros((rhi - rlo, w - 2), dtype=np.int32)
        ay = np.zeros((rhi - rlo, w - 2), dtype=np.int32)
        for i in range(3):
            rows = s[rlo - 1 + i : rhi - 1 + i]
            for j in range(3):
                win = rows[:, j : j + w - 2]
                cx = _SOBEL_X[i][j]
                cy = _SOBEL_Y[i][j]
                if cx:
                    ax += cx * win
                if cy:
                    ay += cy * win
        gx[rlo - lo : rhi - lo, 1 : w - 1] = ax
        gy[rlo - lo : rhi - lo, 1 : w - 1] = ay
        mag[rlo - lo : rhi - lo, 1 : w - 1] = np.abs(ax) + np.abs(ay)
    return gx, gy, mag


def canny_fused(src, threshold, out, y0, y1):
    """Gradient + NMS in one pass over a row band; planes stay band-local."""
    h, w = src.shape
    out[y0:y1] = 0
    qlo = max(y0, 1)
    qhi = min(y1, h - 1)
    if qhi <= qlo or w < 3:
        return
    lo = qlo - 1
    hi = qhi + 1
    gx, gy, mag = _grad_band(src, lo, hi)
    a = qlo - lo
    b = qhi - lo
    m = mag[a:b, 1 : w - 1]
    vx = gx[a:b, 1 : w - 1]
    vy = gy[a:b, 1 : w - 1]
    ax = np.abs(vx)
    ay = np.abs(vy)

    left = mag[a:b, 0 : w - 2]
    right = mag[a:b, 2:w]
    up = mag[a - 1 : b - 1, 1 : w - 1]
    down = mag[a + 1 : b + 1, 1 : w - 1]
    upleft = mag[a - 1 : b - 1, 0 : w - 2]
    downright = mag[a + 1 : b + 1, 2:w]
    upright = mag[a - 1 : b - 1, 2:w]
    downleft = mag[a + 1 : b + 1, 0 : w - 2]

    b0 = 256 * ay <= 106 * ax
    b2 = ~b0 & (256 * ax <= 106 * ay)
    diag = ~b0 & ~b2
    b1 = diag & (vx.astype(np.int64) * vy > 0)
    b3 = diag & ~b1

    keep = (
        (b0 & (m > left) & (m >= right))
        | (b2 & (m > up) & (m >= down))
        | (b1 & (m > upleft) & (m >= downright))
        | (b3 & (m >= upright) & (m >= downleft) & ((m > upright) | (m > downleft)))
    )
    edge = keep & (m >= threshold)
    view = out[qlo:qhi, 1 : w - 1]
    view[edge] = 255


class ConvStream:
    """Per-pixel 5x5 convolution evaluator over an incrementally filled frame."""

    def __init__(self, frame, width, height, taps, divisor):
        self._frame = memoryview(np.ascontiguousarray(frame, dtype=np.uint8))
        self._w = width
        self._h = height
        self._taps = [int(t) for row in taps for t in row]
        self._div = int(divisor)

    def pixel(self, x, y):
        w = self._w
        h = self._h
        f = self._frame
        taps = self._taps
        acc = 0
        k = 0
        for i in range(-2, 3):
            yy = y + i
            if yy < 0:
                yy = 0
            elif yy >= h:
                yy = h - 1
            base = yy * w
            for j in range(-2, 3):
                xx = x + j
                if xx < 0:
                    xx = 0
                elif xx >= w:
                    xx = w - 1
                acc += taps[k] * f[base + xx]
                k += 1
        v = acc // self._div
        if v < 0:
            return 0
        if v > 255:
            return 255
        return v


class CannyStream:
    """Per-pixel gradient + NMS evaluator over an incrementally filled frame."""

    def __init__(self, frame, width, height, threshold):
        self._frame = memoryview(np.ascontiguousarray(frame, dtype=np.uint8))
        self._w = width
        self._h = height
        self._thr = int(threshold)

    def _grad(self, x, y):
        w = self._w
        f = self._frame
        r0 = (y - 1) * w + x
        r1 = y * w + x
        r2 = (y + 1) * w + x
        p00 = f[r0 - 1]; p01 = f[r0]; p02 = f[r0 + 1]
        p10 = f[r1 - 1];              p12 = f[r1 + 1]
        p20 = f[r2 - 1]; p21 = f[r2]; p22 = f[r2 + 1]
        gx = (p02 - p00) + 2 * (p12 - p10) + (p22 - p20)
        gy = (p20 - p00) + 2 * (p21 - p01) + (p22 - p02)
        return gx, gy

    def _mag(self, x, y):
        if x < 1 or y < 1 or x >= self._w - 1 or y >= self._h - 1:
            return 0
        gx, gy = self._grad(x, y)
        return abs(gx) + abs(gy)

    def pixel(self, x, y):
        if x < 1 or y < 1 or x >= self._w - 1 or y >= self._h - 1:
            return 0
        gx, gy = self._grad(x, y)
        m = abs(gx) + abs(gy)
        if m < self._thr:
            return 0
        ax = abs(gx)
        ay = abs(gy)
        if 256 * ay <= 106 * ax:
            keep = m > self._mag(x - 1, y) and m >= self._mag(x + 1, y)
        elif 256 * ax <= 106 * ay:
            keep = m > self._mag(x, y - 1) and m >= self._mag(x, y + 1)
        elif (gx > 0) == (gy > 0):
            keep = m > self._mag(x - 1, y - 1) and m >= self._mag(x + 1, y + 1)
        else:
            a = self._mag(x + 1, y - 1)
            b = self._mag(x - 1, y + 1)
            keep = m >= a and m >= b and (m > a or m > b)
        return 255 if keep else 0
