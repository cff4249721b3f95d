"""Deliberately naive per-pixel port of the edge pipeline to plain script
code: every pixel is touched in interpreted loops. It exists to demonstrate
how badly a straight per-pixel port performs compared to calling an
optimized implementation; its output still matches the golden digest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from ._native import native
from .errors import MissingNativeLibraryError

GAUSS_TAPS = (
    (1, 4, 6, 4, 1),
    (4, 16, 24, 16, 4),
    (6, 24, 36, 24, 6),
    (4, 16, 24, 16, 4),
    (1, 4, 6, 4, 1),
)
GAUSS_DIVISOR = 256


def conv5x5_rows(img: list[list[int]]) -> list[list[int]]:
    h = len(img)
    w = len(img[0])
    out = []
    for y in range(h):
        row = []
        for x in range(w):
            acc = 0
            for i in range(5):
                yy = min(max(y + i - 2, 0), h - 1)
                for j in range(5):
                    xx = min(max(x + j - 2, 0), w - 1)
                    acc += GAUSS_TAPS[i][j] * img[yy][xx]
            row.append(min(max(acc // GAUSS_DIVISOR, 0), 255))
        out.append(row)
    return out


def _grad(img, x, y):
    gx = (
        (img[y - 1][x + 1] - img[y - 1][x - 1])
        + 2 * (img[y][x + 1] - img[y][x - 1])
        + (img[y + 1][x + 1] - img[y + 1][x - 1])
    )
    gy = (
        (img[y + 1][x - 1] - img[y - 1][x - 1])
        + 2 * (img[y + 1][x] - img[y - 1][x])
        + (img[y + 1][x + 1] - img[y - 1][x + 1])
    )
    return gx, gy


def _mag(img, x, y, w, h):
    if x < 1 or y < 1 or x >= w - 1 or y >= h - 1:
        return 0
    gx, gy = _grad(img, x, y)
    return abs(gx) + abs(gy)


def canny_rows(img: list[list[int]], threshold: int) -> list[list[int]]:
    h = len(img)
    w = len(img[0])
    out = [[0] * w for _ in range(h)]
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            gx, gy = _grad(img, x, y)
            m = abs(gx) + abs(gy)
            if m < threshold:
                continue
            ax, ay = abs(gx), abs(gy)
            if 256 * ay <= 106 * ax:
                keep = m > _mag(img, x - 1, y, w, h) and m >= _mag(img, x + 1, y, w, h)
            elif 256 * ax <= 106 * ay:
                keep = m > _mag(img, x, y - 1, w, h) and m >= _mag(img, x, y + 1, w, h)
            elif (gx > 0) == (gy > 0):
                keep = m > _mag(img, x - 1, y - 1, w, h) and m >= _mag(img, x + 1, y + 1, w, h)
            else:
                a = _mag(img, x + 1, y - 1, w, h)
                b = _mag(img, x - 1, y + 1, w, h)
                keep = m >= a and m >= b and (m > a or m > b)
            if keep:
                out[y][x] = 255
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Pure-script per-pixel edge detection demo (slow on purpose)"
    )
    parser.add_argument("--image", required=True, help="input PGM (P5)")
    parser.add_argument("--crop", type=int, default=64,
                        help="run on the top-left NxN crop (default 64)")
    parser.add_argument("--threshold", type=int, default=128)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    try:
        fs = native()
    except MissingNativeLibraryError as e:
        print(f"missing-native-library: {e}", file=sys.stderr)
        return 3

    full = fs.read_pgm(args.image)
    n = min(args.crop, full.width, full.height)
    crop = fs.PixelImage.from_array(full.samples[:n, :n])
    rows = [[int(v) for v in r] for r in crop.samples]

    t0 = time.perf_counter()
    edges_rows = canny_rows(conv5x5_rows(rows), args.threshold)
    port_seconds = time.perf_counter() - t0
    flat = bytes(v for row in edges_rows for v in row)
    digest = hashlib.sha256(flat).hexdigest()

    golden = fs.canny_reference(
        fs.conv2d_reference(crop, fs.make_gaussian_5x5()), args.threshold
    )
    golden_digest = hashlib.sha256(golden.tobytes()).hexdigest()

    t0 = time.perf_counter()
    fs.edge_detect_optimized(crop, fs.PipelineParams(threshold=args.threshold))
    optimized_seconds = max(time.perf_counter() - t0, 1e-9)

    payload = {
        "config": "naive-port-demo",
        "crop": n,
        "seconds": port_seconds,
        "digest": digest,
        "matches_golden": digest == golden_digest,
        "slowdown_vs_optimized": port_seconds / optimized_seconds,
    }
    if args.json:
        print(json.dumps(payload))
    else:
        print(f"per-pixel script port on {n}x{n} crop: {port_seconds:.4f} s")
        print(f"  matches golden digest: {payload['matches_golden']}")
        print(f"  slowdown vs optimized call: {payload['slowdown_vs_optimized']:.0f}x "
              f"(demonstration only)")
    return 0 if payload["matches_golden"] else 2


if __name__ == "__main__":
    sys.exit(main())
