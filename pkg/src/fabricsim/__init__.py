"""fabricsim: cycle-approximate simulator of a processor-plus-fabric SoC
overlay — MMIO register fabric, stream switch, line-buffered streaming image
kernels, modeled DMA — plus software reference pipelines and a benchmark CLI.
"""

from importlib.resources import files as _files

from .backend import BACKEND_NAME, available_backends, get_backend
from .bench import (
    BenchResult,
    CONFIG_IDS,
    compute_speedups,
    render_report,
    run_benchmark,
)
from .dma import (
    FABRIC_TO_HOST,
    HOST_TO_FABRIC,
    CompletionRecord,
    DmaChannel,
    DmaPort,
    TransferTicket,
    dma_init,
    dma_transfer,
    dma_wait,
)
from .errors import *  # noqa: F401,F403 — the exception vocabulary is public
from .image import EdgeMap, PixelImage, read_pgm, write_pgm
from .kernels import (
    ConvKernel,
    DEFAULT_THRESHOLD,
    canny_reference,
    conv2d_reference,
    latency_of,
    make_gaussian_5x5,
)
from .mmio import AddressMap, RegionHandle, RegisterFile, map_region, mmio_read, mmio_write
from .overlay import (
    LoadedOverlay,
    OverlayDescriptor,
    PipelineRun,
    describe,
    load_overlay,
    parse_descriptor,
    reconfigure_route,
    save_descriptor,
)
from .software import (
    PipelineParams,
    edge_detect_naive,
    edge_detect_optimized,
    edge_detect_threaded,
)
from .streaming import StreamKernel, TokenSink, TokenSource, make_streaming
from .switch import CONSUMER, PRODUCER, UNROUTED, CycleStats, StreamSwitch, run_frame

__version__ = "0.1.0"


def bundled_overlay(name: str = "edge_detect") -> str:
    """Path of a descriptor shipped with the package ('edge_detect' or
    'loopback')."""
    return str(_files("fabricsim").joinpath("data", f"{name}.json"))
