"""Optimized edge detection driven from the scripting side: the host calls
the native optimized implementation through the bindings and only measures,
digests, and reports. No pixel math happens in the script.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time

from ._native import native
from .errors import MissingNativeLibraryError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Host-side optimized edge detection via the bindings"
    )
    parser.add_argument("--image", required=True, help="input PGM (P5)")
    parser.add_argument("--threshold", type=int, default=128)
    parser.add_argument("--threads", type=int, default=2)
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--warmup", type=int, default=1)
    parser.add_argument("--json", action="store_true", help="emit one JSON line")
    args = parser.parse_args(argv)

    try:
        fs = native()
    except MissingNativeLibraryError as e:
        print(f"missing-native-library: {e}", file=sys.stderr)
        return 3

    img = fs.read_pgm(args.image)
    params = fs.PipelineParams(threshold=args.threshold, thread_count=args.threads)
    edges = None
    for _ in range(args.warmup):
        edges = fs.edge_detect_optimized(img, params)
    times = []
    for _ in range(args.reps):
        t0 = time.perf_counter()
        edges = fs.edge_detect_optimized(img, params)
        times.append(time.perf_counter() - t0)
    seconds = statistics.median(times)
    digest = hashlib.sha256(edges.tobytes()).hexdigest()
    if args.json:
        print(json.dumps({
            "config": "script-optimized",
            "seconds": seconds,
            "digest": digest,
            "components": {},
        }))
    else:
        print(f"optimized pipeline on {img.width}x{img.height}: {seconds:.6f} s "
              f"({args.threads} threads)")
        print(f"  edge-map digest: {digest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
