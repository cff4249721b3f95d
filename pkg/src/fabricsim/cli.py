"""`bench` command line: run the speedup table, verify digest unanimity,
print the cycle model, and compare kernel backends.

Exit codes: 0 success, 2 digest mismatch, 1 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time

import numpy as np

from .bench import BASELINE, CONFIG_IDS, render_report, run_benchmark
from .corpus import CORPUS_HEIGHT, CORPUS_WIDTH, bench_seed, synthetic_image
from .errors import DigestMismatchError, FabricSimError
from .image import write_pgm
from .kernels import latency_of
from .overlay import load_overlay


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Edge-detection benchmark harness over the fabric simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run configurations and print the speedup table")
    run.add_argument("--image", help="input PGM (P5); synthesized from BENCH_SEED if omitted")
    run.add_argument("--overlay", help="overlay descriptor for the fabric configurations")
    run.add_argument("--configs", default=",".join(CONFIG_IDS),
                     help=f"comma list from: {', '.join(CONFIG_IDS)}")
    run.add_argument("--reps", type=int, default=5, help="timed repetitions (median reported)")
    run.add_argument("--warmup", type=int, default=1, help="discarded warmup runs")
    run.add_argument("--format", default="text", choices=("text", "csv", "markdown"))
    run.add_argument("--threshold", type=int, default=128, help="edge threshold")
    run.add_argument("--baseline", default=BASELINE, choices=CONFIG_IDS)

    verify = sub.add_parser("verify", help="digest unanimity only (single repetition)")
    verify.add_argument("--image")
    verify.add_argument("--overlay")
    verify.add_argument("--configs", default=None)
    verify.add_argument("--threshold", type=int, default=128)

    cycles = sub.add_parser("cycles", help="print the fabric cycle model")
    cycles.add_argument("--overlay", required=True)
    cycles.add_argument("--width", type=int, default=CORPUS_WIDTH)
    cycles.add_argument("--height", type=int, default=CORPUS_HEIGHT)
    cycles.add_argument("--simulate", action="store_true",
                        help="also run the simulator and compare")

    backends = sub.add_parser("backends", help="compare compiled vs python kernel backends")
    backends.add_argument("--width", type=int, default=CORPUS_WIDTH)
    backends.add_argument("--height", type=int, default=CORPUS_HEIGHT)
    backends.add_argument("--reps", type=int, default=5)

    mkimg = sub.add_parser("make-image", help="write a synthetic corpus image")
    mkimg.add_argument("--out", required=True)
    mkimg.add_argument("--width", type=int, default=CORPUS_WIDTH)
    mkimg.add_argument("--height", type=int, default=CORPUS_HEIGHT)
    mkimg.add_argument("--seed", type=int, default=None,
                       help="defaults to BENCH_SEED (or 0)")
    return parser


def _ensure_image(path, tmpdir) -> str:
    if path:
        return path
    seed = bench_seed()
    img = synthetic_image(seed=seed)
    out = os.path.join(tmpdir, f"corpus-seed{seed}.pgm")
    write_pgm(img, out)
    print(f"no --image given: using synthetic corpus image (seed {seed})")
    return out


def _cmd_run(args) -> int:
    configs = [c.strip() for c in args.configs.split(",") if c.strip()]
    with tempfile.TemporaryDirectory() as tmpdir:
        image_path = _ensure_image(args.image, tmpdir)
        results = run_benchmark(
            configs, image_path, overlay_path=args.overlay,
            repetitions=args.reps, warmup=args.warmup,
            threshold=args.threshold, baseline=args.baseline,
        )
    print(render_report(results, args.format), end="")
    notes = [(r.config, r.note) for r in results if r.note]
    breakdowns = [(r.config, r.components) for r in results if r.components]
    if args.format == "text":
        for config, comps in breakdowns:
            parts = ", ".join(
                f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}"
                for k, v in comps.items()
            )
            print(f"[{config}] {parts}")
        for config, note in notes:
            print(f"[{config}] {note}")
    return 0


def _cmd_verify(args) -> int:
    if args.configs:
        configs = [c.strip() for c in args.configs.split(",") if c.strip()]
    else:
        configs = ["naive-1t", "threaded-2t", "optimized"]
        if args.overlay:
            configs.append("fabric-pipeline")
    with tempfile.TemporaryDirectory() as tmpdir:
        image_path = _ensure_image(args.image, tmpdir)
        results = run_benchmark(
            configs, image_path, overlay_path=args.overlay,
            repetitions=1, warmup=0, threshold=args.threshold,
        )
    ran = [r for r in results if not r.skipped]
    for r in results:
        if r.skipped:
            print(f"[{r.config}] {r.note}")
    digest = ran[0].output_digest if ran else "(nothing ran)"
    print(f"digest unanimity OK across {len(ran)} configurations: {digest}")
    return 0


def _cmd_cycles(args) -> int:
    overlay = load_overlay(args.overlay)
    w, h = args.width, args.height
    total_latency = 0
    print(f"overlay {overlay.descriptor.name!r}: fabric clock "
          f"{overlay.descriptor.fabric_clock_hz / 1e6:.0f} MHz")
    for name, kern in overlay.kernels.items():
        lat = latency_of(kern.kind, w)
        total_latency += lat
        print(f"  kernel {name} ({kern.kind}): fill latency {lat} cycles at width {w}")
    pixels = w * h
    model = pixels + total_latency
    seconds = model / overlay.descriptor.fabric_clock_hz
    print(f"  frame {w}x{h}: {pixels} pixel cycles + {total_latency} latency "
          f"= {model} cycles ({seconds:.6f} s)")
    if args.simulate:
        img = synthetic_image(width=w, height=h, seed=bench_seed())
        t0 = time.perf_counter()
        _, run = overlay.run_pipeline(img)
        wall = time.perf_counter() - t0
        drift = 100.0 * (run.cycles - model) / model
        print(f"  simulated: {run.cycles} cycles ({run.seconds_compute:.6f} s), "
              f"drift {drift:+.3f}% vs model [{wall:.2f} s wall]")
    return 0


def _cmd_backends(args) -> int:
    from .backend import available_backends, get_backend

    names = available_backends()
    if len(names) < 2:
        print("only the python backend is available (compiled extension not built)")
    w, h = args.width, args.height
    rng = np.random.default_rng(bench_seed())
    src = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
    taps = np.ascontiguousarray(
        np.outer([1, 4, 6, 4, 1], [1, 4, 6, 4, 1]), dtype=np.int32
    )
    k5 = np.ascontiguousarray([1, 4, 6, 4, 1], dtype=np.int32)
    print(f"kernel backend comparison on {w}x{h} (median of {args.reps}, ms)")
    header = f"{'operation':<18}" + "".join(f"{n:>12}" for n in names)
    print(header)
    outputs = {}
    for op in ("conv5x5_direct", "separable", "sobel+nms", "canny_fused"):
        row = f"{op:<18}"
        for name in names:
            impl = get_backend(name)
            out = np.zeros((h, w), dtype=np.uint8)

            def work():
                if op == "conv5x5_direct":
                    impl.conv5x5_direct(src, taps, 256, out, 0, h)
                elif op == "separable":
                    tmp = np.zeros((h, w), dtype=np.int32)
                    impl.conv5_rows(src, k5, tmp, 0, h)
                    impl.conv5_cols(tmp, k5, 256, out, 0, h)
                elif op == "sobel+nms":
                    gx = np.zeros((h, w), dtype=np.int32)
                    gy = np.zeros((h, w), dtype=np.int32)
                    mag = np.zeros((h, w), dtype=np.int32)
                    impl.sobel_planes(src, gx, gy, mag, 0, h)
                    impl.nms_threshold(gx, gy, mag, 128, out, 0, h)
                else:
                    impl.canny_fused(src, 128, out, 0, h)

            times = []
            for _ in range(args.reps):
                t0 = time.perf_counter()
                work()
                times.append(time.perf_counter() - t0)
            times.sort()
            row += f"{1e3 * times[len(times) // 2]:>12.3f}"
            outputs.setdefault(op, []).append(out.copy())
        print(row)
    for op, outs in outputs.items():
        for other in outs[1:]:
            if not np.array_equal(outs[0], other):
                print(f"BACKEND DISAGREEMENT in {op}!")
                return 1
    if len(names) > 1:
        print("all backends agree bit-exactly")
    return 0


def _cmd_make_image(args) -> int:
    seed = args.seed if args.seed is not None else bench_seed()
    img = synthetic_image(width=args.width, height=args.height, seed=seed)
    write_pgm(img, args.out)
    print(f"wrote {args.width}x{args.height} seed-{seed} image to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "cycles":
            return _cmd_cycles(args)
        if args.command == "backends":
            return _cmd_backends(args)
        if args.command == "make-image":
            return _cmd_make_image(args)
        parser.error(f"unknown command {args.command!r}")
    except DigestMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FabricSimError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
