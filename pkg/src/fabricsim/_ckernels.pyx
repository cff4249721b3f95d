# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Bit-exact twin of `_pykernels`: same integer accumulation, floor division,
border replication, magnitude, direction bins, and NMS tie rules. Batch
functions release the GIL inside their loops so row-band threading scales
across cores.
"""

import numpy as np

BACKEND_NAME = "compiled"


cdef inline long _floordiv(long a, long b) noexcept nogil:
    cdef long q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef inline int _clamp_idx(int v, int hi) noexcept nogil:
    if v < 0:
        return 0
    if v >= hi:
        return hi - 1
    return v


def conv5x5_direct(const unsigned char[:, ::1] src, const int[:, ::1] taps,
                   int divisor, unsigned char[:, ::1] out, int y0, int y1):
    """Direct 5x5 convolution with replicated borders into out rows [y0, y1)."""
    cdef int h = src.shape[0]
    cdef int w = src.shape[1]
    cdef int x, y, i, j, yy, xx
    cdef long acc, v
    if divisor == 0:
        raise ZeroDivisionError("divisor must be nonzero")
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                acc = 0
                for i in range(5):
                    yy = _clamp_idx(y + i - 2, h)
                    for j in range(5):
                        xx = _clamp_idx(x + j - 2, w)
                        acc += taps[i, j] * src[yy, xx]
                v = _floordiv(acc, divisor)
                if v < 0:
                    v = 0
                elif v > 255:
                    v = 255
                out[y, x] = <unsigned char> v


def conv5_rows(const unsigned char[:, ::1] src, const int[::1] k5,
               int[:, ::1] tmp, int y0, int y1):
    """Horizontal 5-tap pass (no division) into int32 tmp rows [y0, y1)."""
    cdef int w = src.shape[1]
    cdef int x, y, j, xx
    cdef long acc
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                acc = 0
                for j in range(5):
                    xx = _clamp_idx(x + j - 2, w)
                    acc += k5[j] * src[y, xx]
                tmp[y, x] = <int> acc


def conv5_cols(const int[:, ::1] tmp, const int[::1] k5, int divisor,
               unsigned char[:, ::1] out, int y0, int y1):
    """Vertical 5-tap pass over tmp with one floor division at the end."""
    cdef int h = tmp.shape[0]
    cdef int w = tmp.shape[1]
    cdef int x, y, i, yy
    cdef long acc, v
    if divisor == 0:
        raise ZeroDivisionError("divisor must be nonzero")
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                acc = 0
                for i in range(5):
                    yy = _clamp_idx(y + i - 2, h)
                    acc += k5[i] * tmp[yy, x]
                v = _floordiv(acc, divisor)
                if v < 0:
                    v = 0
                elif v > 255:
                    v = 255
                out[y, x] = <unsigned char> v


cdef inline void _grad_at(const unsigned char[:, ::1] src, int x, int y,
                          int *gx, int *gy) noexcept nogil:
    cdef int p00 = src[y - 1, x - 1]
    cdef int p01 = src[y - 1, x]
    cdef int p02 = src[y - 1, x + 1]
    cdef int p10 = src[y, x - 1]
    cdef int p12 = src[y, x + 1]
    cdef int p20 = src[y + 1, x - 1]
    cdef int p21 = src[y + 1, x]
    cdef int p22 = src[y + 1, x + 1]
    gx[0] = (p02 - p00) + 2 * (p12 - p10) + (p22 - p20)
    gy[0] = (p20 - p00) + 2 * (p21 - p01) + (p22 - p02)


def sobel_planes(const unsigned char[:, ::1] src, int[:, ::1] gx,
                 int[:, ::1] gy, int[:, ::1] mag, int y0, int y1):
    """Sobel gradient and L1 magnitude planes for rows [y0, y1); ring stays 0."""
    cdef int h = src.shape[0]
    cdef int w = src.shape[1]
    cdef int lo = y0 if y0 > 1 else 1
    cdef int hi = y1 if y1 < h - 1 else h - 1
    cdef int x, y, vx, vy
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                gx[y, x] = 0
                gy[y, x] = 0
                mag[y, x] = 0
        if w >= 3:
            for y in range(lo, hi):
                for x in range(1, w - 1):
                    _grad_at(src, x, y, &vx, &vy)
                    gx[y, x] = vx
                    gy[y, x] = vy
                    mag[y, x] = (vx if vx >= 0 else -vx) + (vy if vy >= 0 else -vy)


cdef inline bint _nms_keep(const int[:, ::1] mag, int x, int y,
                           int vx, int vy, int m) noexcept nogil:
    cdef int ax = vx if vx >= 0 else -vx
    cdef int ay = vy if vy >= 0 else -vy
    cdef int na, nb
    if 256 * ay <= 106 * ax:
        return m > mag[y, x - 1] and m >= mag[y, x + 1]
    if 256 * ax <= 106 * ay:
        return m > mag[y - 1, x] and m >= mag[y + 1, x]
    if (vx > 0) == (vy > 0):
        return m > mag[y - 1, x - 1] and m >= mag[y + 1, x + 1]
    na = mag[y - 1, x + 1]
    nb = mag[y + 1, x - 1]
    return m >= na and m >= nb and (m > na or m > nb)


def nms_threshold(const int[:, ::1] gx, const int[:, ::1] gy,
                  const int[:, ::1] mag, int threshold,
                  unsigned char[:, ::1] out, int y0, int y1):
    """Directional non-max suppression + threshold into out rows [y0, y1)."""
    cdef int h = mag.shape[0]
    cdef int w = mag.shape[1]
    cdef int lo = y0 if y0 > 1 else 1
    cdef int hi = y1 if y1 < h - 1 else h - 1
    cdef int x, y, m
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                out[y, x] = 0
        if w >= 3:
            for y in range(lo, hi):
                for x in range(1, w - 1):
                    m = mag[y, x]
                    if m >= threshold and _nms_keep(mag, x, y, gx[y, x], gy[y, x], m):
                        out[y, x] = 255


def canny_fused(const unsigned char[:, ::1] src, int threshold,
                unsigned char[:, ::1] out, int y0, int y1):
    """Gradient + NMS in one pass over a row band; mag plane stays band-local."""
    cdef int h = src.shape[0]
    cdef int w = src.shape[1]
    cdef int qlo = y0 if y0 > 1 else 1
    cdef int qhi = y1 if y1 < h - 1 else h - 1
    cdef int x, y
    for y in range(y0, y1):
        for x in range(w):
            out[y, x] = 0
    if qhi <= qlo or w < 3:
        return
    cdef int lo = qlo - 1
    cdef int hi = qhi + 1
    band_arr = np.zeros((hi - lo, w), dtype=np.int32)
    cdef int[:, ::1] band = band_arr
    cdef int vx, vy, m, mlo, mhi
    mlo = lo if lo > 1 else 1
    mhi = hi if hi < h - 1 else h - 1
    with nogil:
        for y in range(mlo, mhi):
            for x in range(1, w - 1):
                _grad_at(src, x, y, &vx, &vy)
                band[y - lo, x] = (vx if vx >= 0 else -vx) + (vy if vy >= 0 else -vy)
        for y in range(qlo, qhi):
            for x in range(1, w - 1):
                m = band[y - lo, x]
                if m >= threshold:
                    _grad_at(src, x, y, &vx, &vy)
                    if _nms_keep_band(band, x, y - lo, vx, vy, m):
                        out[y, x] = 255


cdef inline bint _nms_keep_band(const int[:, ::1] mag, int x, int yb,
                                int vx, int vy, int m) noexcept nogil:
    cdef int ax = vx if vx >= 0 else -vx
    cdef int ay = vy if vy >= 0 else -vy
    cdef int na, nb
    if 256 * ay <= 106 * ax:
        return m > mag[yb, x - 1] and m >= mag[yb, x + 1]
    if 256 * ax <= 106 * ay:
        return m > mag[yb - 1, x] and m >= mag[yb + 1, x]
    if (vx > 0) == (vy > 0):
        return m > mag[yb - 1, x - 1] and m >= mag[yb + 1, x + 1]
    na = mag[yb - 1, x + 1]
    nb = mag[yb + 1, x - 1]
    return m >= na and m >= nb and (m > na or m > nb)


cdef class ConvStream:
    """Per-pixel 5x5 convolution evaluator over an incrementally filled frame.

    Holds a live view of the caller's flat receive buffer; no copy is made.
    """

    cdef const unsigned char[::1] frame
    cdef int w, h, div
    cdef long taps[25]

    def __init__(self, const unsigned char[::1] frame, int width, int height,
                 taps, int divisor):
        cdef int k = 0
        self.frame = frame
        self.w = width
        self.h = height
        self.div = divisor
        for row in taps:
            for t in row:
                self.taps[k] = t
                k += 1
        if k != 25:
            raise ValueError("expected 5x5 taps")
        if divisor == 0:
            raise ZeroDivisionError("divisor must be nonzero")

    cpdef int pixel(self, int x, int y):
        cdef int i, j, yy, xx, k
        cdef long acc = 0, v
        cdef int w = self.w
        cdef int h = self.h
        k = 0
        for i in range(-2, 3):
            yy = _clamp_idx(y + i, h)
            for j in range(-2, 3):
                xx = _clamp_idx(x + j, w)
                acc += self.taps[k] * self.frame[yy * w + xx]
                k += 1
        v = _floordiv(acc, self.div)
        if v < 0:
            return 0
        if v > 255:
            return 255
        return <int> v


cdef class CannyStream:
    """Per-pixel gradient + NMS evaluator over an incrementally filled frame.

    Holds a live view of the caller's flat receive buffer; no copy is made.
    """

    cdef const unsigned char[::1] frame
    cdef int w, h, thr

    def __init__(self, const unsigned char[::1] frame, int width, int height,
                 int threshold):
        self.frame = frame
        self.w = width
        self.h = height
        self.thr = threshold

    cdef inline void _grad(self, int x, int y, int *gx, int *gy) noexcept nogil:
        cdef int w = self.w
        cdef int r0 = (y - 1) * w + x
        cdef int r1 = y * w + x
        cdef int r2 = (y + 1) * w + x
        cdef int p00 = self.frame[r0 - 1]
        cdef int p01 = self.frame[r0]
        cdef int p02 = self.frame[r0 + 1]
        cdef int p10 = self.frame[r1 - 1]
        cdef int p12 = self.frame[r1 + 1]
        cdef int p20 = self.frame[r2 - 1]
        cdef int p21 = self.frame[r2]
        cdef int p22 = self.frame[r2 + 1]
        gx[0] = (p02 - p00) + 2 * (p12 - p10) + (p22 - p20)
        gy[0] = (p20 - p00) + 2 * (p21 - p01) + (p22 - p02)

    cdef inline int _mag(self, int x, int y) noexcept nogil:
        cdef int gx, gy
        if x < 1 or y < 1 or x >= self.w - 1 or y >= self.h - 1:
            return 0
        self._grad(x, y, &gx, &gy)
        return (gx if gx >= 0 else -gx) + (gy if gy >= 0 else -gy)

    cpdef int pixel(self, int x, int y):
        cdef int gx, gy, m, ax, ay, na, nb
        cdef bint keep
        if x < 1 or y < 1 or x >= self.w - 1 or y >= self.h - 1:
            return 0
        self._grad(x, y, &gx, &gy)
        m = (gx if gx >= 0 else -gx) + (gy if gy >= 0 else -gy)
        if m < self.thr:
            return 0
        ax = gx if gx >= 0 else -gx
        ay = gy if gy >= 0 else -gy
        if 256 * ay <= 106 * ax:
            keep = m > self._mag(x - 1, y) and m >= self._mag(x + 1, y)
        elif 256 * ax <= 106 * ay:
            keep = m > self._mag(x, y - 1) and m >= self._mag(x, y + 1)
        elif (gx > 0) == (gy > 0):
            keep = m > self._mag(x - 1, y - 1) and m >= self._mag(x + 1, y + 1)
        else:
            na = self._mag(x + 1, y - 1)
            nb = self._mag(x - 1, y + 1)
            keep = m >= na and m >= nb and (m > na or m > nb)
        return 255 if keep else 0
