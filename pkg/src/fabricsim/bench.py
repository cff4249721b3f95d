"""Benchmark harness: runs the edge-detection configurations, checks that
every one produces the same edge map, and reports a speedup table.

Software configurations are timed with the wall clock (median over
repetitions, warmup discarded). The fabric configuration's time is composed
explicitly: simulated DMA-in + pipeline cycles / fabric clock + simulated
DMA-out + measured host-control overhead. Correctness precedes timing: a
digest mismatch aborts the run.
"""

from __future__ import annotations

import importlib.util
import json
import statistics
import subprocess
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigUnavailableError,
    DigestMismatchError,
    MissingBaselineError,
)
from .image import EdgeMap, PixelImage, read_pgm
from .overlay import LoadedOverlay, load_overlay
from .software import (
    PipelineParams,
    edge_detect_naive,
    edge_detect_optimized,
    edge_detect_threaded,
)

CONFIG_IDS = (
    "naive-1t",
    "threaded-2t",
    "optimized",
    "fabric-pipeline",
    "script-optimized",
    "script-fabric",
)

_SCRIPT_MODULES = {
    "script-optimized": "fabrichost.script_optimized",
    "script-fabric": "fabrichost.script_fabric",
}

BASELINE = "naive-1t"


@dataclass
class BenchResult:
    """One configuration's outcome."""

    config: str
    seconds: float
    output_digest: str
    speedup: float | None = None
    components: dict = field(default_factory=dict)
    note: str = ""
    skipped: bool = False


def compute_speedups(times: dict[str, float], baseline: str) -> dict[str, float]:
    """speedup(c) = time(baseline) / time(c), reported to 2 decimals."""
    if baseline not in times:
        raise MissingBaselineError(f"baseline {baseline!r} has no measured time")
    for config, t in times.items():
        if t <= 0:
            raise ValueError(f"non-positive time {t} for {config!r}")
    base = times[baseline]
    return {config: round(base / t, 2) for config, t in times.items()}


def host_scripts_available() -> bool:
    return importlib.util.find_spec("fabrichost") is not None


def _median_time(fn, repetitions: int, warmup: int) -> tuple[float, object]:
    result = None
    for _ in range(warmup):
        result = fn()
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def _run_fabric_once(overlay: LoadedOverlay, image: PixelImage, threshold: int):
    """One frame through the fabric; returns (edges, seconds, components)."""
    t0 = time.perf_counter()
    overlay.configure_frame(image.width, image.height, threshold)
    in_ch = overlay._single_channel("host_to_fabric")
    out_ch = overlay._single_channel("fabric_to_host")
    payload = image.tobytes()
    out_buf = bytearray(len(payload))
    ticket_in = in_ch.transfer(payload)
    overlay.memory_traffic.append((in_ch.name, len(payload)))
    ticket_out = out_ch.transfer(out_buf)
    overlay.memory_traffic.append((out_ch.name, len(out_buf)))
    overhead = time.perf_counter() - t0
    # Stepping the simulator is modeled time, not host time: excluded from
    # the overhead measurement.
    start_cycle = overlay.switch.cycles_elapsed
    rec_out = out_ch.wait(ticket_out, max_cycles=4 * len(payload) + 200_000)
    rec_in = in_ch.wait(ticket_in)
    cycles = overlay.switch.cycles_elapsed - start_cycle
    t1 = time.perf_counter()
    edges_arr = np.frombuffer(bytes(out_buf), dtype=np.uint8).reshape(
        image.height, image.width
    )
    edges = EdgeMap.from_array(edges_arr)
    overhead += time.perf_counter() - t1
    components = {
        "dma_in_s": rec_in.simulated_seconds,
        "compute_s": cycles / overlay.descriptor.fabric_clock_hz,
        "dma_out_s": rec_out.simulated_seconds,
        "host_overhead_s": overhead,
        "cycles": cycles,
    }
    seconds = (
        components["dma_in_s"]
        + components["compute_s"]
        + components["dma_out_s"]
        + components["host_overhead_s"]
    )
    return edges, seconds, components


def _run_script(config: str, image_path, overlay_path, threshold: int,
                repetitions: int, warmup: int) -> tuple[float, str, dict]:
    module = _SCRIPT_MODULES[config]
    cmd = [
        sys.executable, "-m", module,
        "--image", str(image_path),
        "--threshold", str(threshold),
        "--reps", str(repetitions),
        "--warmup", str(warmup),
        "--json",
    ]
    if config == "script-fabric":
        cmd += ["--overlay", str(overlay_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ConfigUnavailableError(
            f"{config} failed (exit {proc.returncode}): {proc.stderr.strip()}"
        )
    line = proc.stdout.strip().splitlines()[-1]
    payload = json.loads(line)
    return float(payload["seconds"]), str(payload["digest"]), dict(payload.get("components", {}))


def run_benchmark(configs, image_path, overlay_path=None, repetitions: int = 5,
                  warmup: int = 1, threshold: int = 128,
                  baseline: str = BASELINE,
                  strict: bool = False) -> list[BenchResult]:
    """Run the requested configurations on one image and build the table.

    With strict=False, configurations whose prerequisites are missing are
    reported as skipped (with a note); with strict=True they raise
    ConfigUnavailableError.
    """
    for c in configs:
        if c not in CONFIG_IDS:
            raise ConfigUnavailableError(
                f"unknown configuration {c!r} (choose from {', '.join(CONFIG_IDS)})"
            )
    image = read_pgm(image_path)
    results: list[BenchResult] = []
    overlay = None

    def software_runner(config):
        if config == "naive-1t":
            params = PipelineParams(threshold=threshold, thread_count=1)
            return lambda: edge_detect_naive(image, params)
        if config == "threaded-2t":
            params = PipelineParams(threshold=threshold, thread_count=2)
            return lambda: edge_detect_threaded(image, params)
        params = PipelineParams(threshold=threshold, thread_count=2)
        return lambda: edge_detect_optimized(image, params)

    for config in configs:
        if config in ("naive-1t", "threaded-2t", "optimized"):
            seconds, edges = _median_time(software_runner(config), repetitions, warmup)
            results.append(BenchResult(config, seconds, edges.digest()))
        elif config == "fabric-pipeline":
            if overlay_path is None:
                msg = "fabric-pipeline needs --overlay"
                if strict:
                    raise ConfigUnavailableError(msg)
                results.append(BenchResult(config, 0.0, "", note=f"skipped: {msg}", skipped=True))
                continue
            if overlay is None:
                overlay = load_overlay(overlay_path)
            for _ in range(warmup):
                _run_fabric_once(overlay, image, threshold)
            runs = [
                _run_fabric_once(overlay, image, threshold) for _ in range(repetitions)
            ]
            seconds = statistics.median(r[1] for r in runs)
            edges, _, components = runs[-1]
            results.append(
                BenchResult(config, seconds, edges.digest(), components=components)
            )
        else:  # script rows
            if not host_scripts_available():
                msg = f"{config} needs the host scripting package (fabrichost)"
                if strict:
                    raise ConfigUnavailableError(msg)
                results.append(BenchResult(config, 0.0, "", note=f"skipped: {msg}", skipped=True))
                continue
            if config == "script-fabric" and overlay_path is None:
                msg = "script-fabric needs --overlay"
                if strict:
                    raise ConfigUnavailableError(msg)
                results.append(BenchResult(config, 0.0, "", note=f"skipped: {msg}", skipped=True))
                continue
            seconds, digest, components = _run_script(
                config, image_path, overlay_path, threshold, repetitions, warmup
            )
            results.append(BenchResult(config, seconds, digest, components=components))

    # Correctness precedes timing.
    digests = {r.config: r.output_digest for r in results if not r.skipped}
    if len(set(digests.values())) > 1:
        raise DigestMismatchError(
            "configurations disagree on the output edge map: "
            + ", ".join(f"{c}={d[:12]}" for c, d in sorted(digests.items()))
        )

    times = {r.config: r.seconds for r in results if not r.skipped}
    if baseline in times:
        speedups = compute_speedups(times, baseline)
        for r in results:
            if not r.skipped:
                r.speedup = speedups[r.config]
    if repetitions < 3:
        for r in results:
            if not r.skipped and not r.note:
                r.note = f"reps={repetitions} < 3: not a reportable number"
    return results


def render_report(results: list[BenchResult], fmt: str = "text") -> str:
    """Render the Configuration / Time (s) / Speedup table."""
    rows = []
    for r in results:
        if r.skipped:
            rows.append((r.config, "-", "-"))
        else:
            speedup = f"{r.speedup:.2f}x" if r.speedup is not None else "-"
            rows.append((r.config, f"{r.seconds:.4f}", speedup))
    header = ("Configuration", "Time (s)", "Speedup")
    if fmt == "csv":
        out = [",".join(header)]
        out += [",".join(row) for row in rows]
        return "\n".join(out) + "\n"
    if fmt == "markdown":
        out = ["| " + " | ".join(header) + " |", "|---|---|---|"]
        out += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(out) + "\n"
    if fmt == "text":
        widths = [
            max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
            for i in range(3)
        ]
        line = "  ".join(h.ljust(widths[i]) for i, h in enumerate(header))
        sep = "-" * len(line)
        out = [line, sep]
        out += ["  ".join(row[i].ljust(widths[i]) for i in range(3)) for row in rows]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
