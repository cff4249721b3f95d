"""Overlay runtime: loads a descriptor file (the simulator's stand-in for a
bitstream), instantiates kernels/switch/DMA, and wires the MMIO address map.

Descriptor files are version-tagged JSON; the field-by-field layout is
documented in the README. Register bases may be written as integers or as
"0x..." strings.

Register maps (all offsets byte-addressed, 32-bit registers):

* switch region (4 bytes per port): the register at offset ``4 * port`` is
  the route select for consumer port ``port`` — value = producer port id,
  0xFFFFFFFF = unrouted. Writing a producer id replaces the previous driver
  (a mux select); offsets of producer ports are reserved.
* kernel region: 0x00 CTRL (write 1 re-arms the stream state), 0x04 WIDTH,
  0x08 HEIGHT, 0x0C THRESHOLD, 0x10 STATUS (pushed by the kernel: bit0
  configured, bit1 frame active, bit2 at least one frame done), 0x14 frame
  counter (pushed).
* DMA region: 0x00 CTRL (reserved mirror), 0x04 LENGTH, 0x08 STATUS
  (0 idle / 1 busy / 2 done, pushed), 0x0C BYTES_MOVED (pushed on
  completion). Buffers are bound through the host API; the registers mirror
  channel state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dma import FABRIC_TO_HOST, HOST_TO_FABRIC, CompletionRecord, DmaChannel, DmaPort, dma_init
from .errors import (
    BusyError,
    DescriptorParseError,
    DescriptorValidationError,
    RangeError,
    UnknownEndpointError,
    UnknownPortError,
)
from .image import EdgeMap, PixelImage
from .mmio import AddressMap, RegisterFile, RegionHandle
from .streaming import StreamKernel
from .switch import CONSUMER, PRODUCER, UNROUTED, CycleStats, StreamSwitch

DESCRIPTOR_FORMAT = "fabricsim-overlay"
DESCRIPTOR_VERSION = 1

KERNEL_REGION_LEN = 0x20
DMA_REGION_LEN = 0x20

# Kernel register offsets
K_CTRL = 0x00
K_WIDTH = 0x04
K_HEIGHT = 0x08
K_THRESHOLD = 0x0C
K_STATUS = 0x10
K_FRAMES = 0x14

# DMA register offsets
D_CTRL = 0x00
D_LENGTH = 0x04
D_STATUS = 0x08
D_BYTES = 0x0C

_DMA_STATUS_CODE = {"idle": 0, "busy": 1, "done": 2}

KERNEL_KINDS = ("conv", "canny", "identity")
_KERNEL_PARAM_KEYS = {"pipeline_depth", "threshold"}


def _parse_base(value, where: str) -> int:
    if isinstance(value, str):
        try:
            return int(value, 0)
        except ValueError:
            raise DescriptorValidationError(f"{where}: bad address {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise DescriptorValidationError(f"{where}: address must be an int or hex string")


@dataclass(frozen=True)
class KernelSpec:
    name: str
    kind: str
    register_base: int
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DmaSpec:
    name: str
    direction: str
    register_base: int
    bandwidth_bytes_per_sec: float = 400e6
    setup_latency_sec: float = 50e-6


@dataclass(frozen=True)
class SwitchSpec:
    ports: int
    register_base: int


@dataclass(frozen=True)
class OverlayDescriptor:
    """Declarative description of kernels, switch, DMA channels, and bases."""

    name: str
    fabric_clock_hz: float
    switch: SwitchSpec
    kernels: tuple[KernelSpec, ...] = ()
    dma_channels: tuple[DmaSpec, ...] = ()
    default_routes: tuple[tuple[str, str], ...] = ()
    host_clock_hz: float = 667e6

    def validate(self):
        if self.fabric_clock_hz <= 0:
            raise DescriptorValidationError("fabric_clock_hz must be positive")
        if self.host_clock_hz <= 0:
            raise DescriptorValidationError("host_clock_hz must be positive")
        names = [k.name for k in self.kernels] + [d.name for d in self.dma_channels]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise DescriptorValidationError(f"duplicate endpoint names: {sorted(dupes)}")
        for k in self.kernels:
            if k.kind not in KERNEL_KINDS:
                raise DescriptorValidationError(
                    f"kernel {k.name!r}: unknown kind {k.kind!r}"
                )
            extra = set(k.params) - _KERNEL_PARAM_KEYS
            if extra:
                raise DescriptorValidationError(
                    f"kernel {k.name!r}: unknown params {sorted(extra)}"
                )
        for d in self.dma_channels:
            if d.direction not in (HOST_TO_FABRIC, FABRIC_TO_HOST):
                raise DescriptorValidationError(
                    f"dma {d.name!r}: bad direction {d.direction!r}"
                )
            if d.bandwidth_bytes_per_sec <= 0:
                raise DescriptorValidationError(f"dma {d.name!r}: bandwidth must be positive")
            if d.setup_latency_sec < 0:
                raise DescriptorValidationError(f"dma {d.name!r}: negative setup latency")
        needed_ports = 2 * len(self.kernels) + len(self.dma_channels)
        if self.switch.ports < needed_ports:
            raise DescriptorValidationError(
                f"switch has {self.switch.ports} ports but the overlay needs {needed_ports}"
            )
        declared = set(names)
        for producer, consumer in self.default_routes:
            for end in (producer, consumer):
                if end not in declared:
                    raise DescriptorValidationError(
                        f"route ({producer!r} -> {consumer!r}) references "
                        f"undeclared endpoint {end!r}"
                    )
        regions = [("switch", self.switch.register_base, 4 * self.switch.ports)]
        regions += [(k.name, k.register_base, KERNEL_REGION_LEN) for k in self.kernels]
        regions += [(d.name, d.register_base, DMA_REGION_LEN) for d in self.dma_channels]
        for i, (na, ba, la) in enumerate(regions):
            if ba % 4 != 0:
                raise DescriptorValidationError(f"{na!r}: register base {ba:#x} unaligned")
            for nb, bb, lb in regions[i + 1 :]:
                if ba < bb + lb and bb < ba + la:
                    raise DescriptorValidationError(
                        f"register regions of {na!r} and {nb!r} overlap"
                    )

    def to_dict(self) -> dict:
        return {
            "format": DESCRIPTOR_FORMAT,
            "version": DESCRIPTOR_VERSION,
            "name": self.name,
            "fabric_clock_hz": self.fabric_clock_hz,
            "host_clock_hz": self.host_clock_hz,
            "switch": {
                "ports": self.switch.ports,
                "register_base": f"{self.switch.register_base:#010x}",
            },
            "kernels": [
                {
                    "name": k.name,
                    "kind": k.kind,
                    "register_base": f"{k.register_base:#010x}",
                    "params": dict(k.params),
                }
                for k in self.kernels
            ],
            "dma_channels": [
                {
                    "name": d.name,
                    "direction": d.direction,
                    "register_base": f"{d.register_base:#010x}",
                    "bandwidth_bytes_per_sec": d.bandwidth_bytes_per_sec,
                    "setup_latency_sec": d.setup_latency_sec,
                }
                for d in self.dma_channels
            ],
            "default_routes": [list(r) for r in self.default_routes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OverlayDescriptor":
        if not isinstance(data, dict):
            raise DescriptorValidationError("descriptor must be a JSON object")
        known = {
            "format", "version", "name", "fabric_clock_hz", "host_clock_hz",
            "switch", "kernels", "dma_channels", "default_routes",
        }
        extra = set(data) - known
        if extra:
            raise DescriptorValidationError(f"unknown descriptor fields: {sorted(extra)}")
        if data.get("format") != DESCRIPTOR_FORMAT:
            raise DescriptorValidationError(
                f"format must be {DESCRIPTOR_FORMAT!r}, got {data.get('format')!r}"
            )
        if data.get("version") != DESCRIPTOR_VERSION:
            raise DescriptorValidationError(
                f"unsupported descriptor version {data.get('version')!r}"
            )
        try:
            sw = data["switch"]
            switch = SwitchSpec(
                ports=int(sw["ports"]),
                register_base=_parse_base(sw["register_base"], "switch"),
            )
            kernels = tuple(
                KernelSpec(
                    name=str(k["name"]),
                    kind=str(k["kind"]),
                    register_base=_parse_base(k["register_base"], k.get("name", "kernel")),
                    params=dict(k.get("params", {})),
                )
                for k in data.get("kernels", [])
            )
            dmas = tuple(
                DmaSpec(
                    name=str(d["name"]),
                    direction=str(d["direction"]),
                    register_base=_parse_base(d["register_base"], d.get("name", "dma")),
                    bandwidth_bytes_per_sec=float(d.get("bandwidth_bytes_per_sec", 400e6)),
                    setup_latency_sec=float(d.get("setup_latency_sec", 50e-6)),
                )
                for d in data.get("dma_channels", [])
            )
            routes = tuple(
                (str(r[0]), str(r[1])) for r in data.get("default_routes", [])
            )
            desc = cls(
                name=str(data["name"]),
                fabric_clock_hz=float(data["fabric_clock_hz"]),
                host_clock_hz=float(data.get("host_clock_hz", 667e6)),
                switch=switch,
                kernels=kernels,
                dma_channels=dmas,
                default_routes=routes,
            )
        except KeyError as e:
            raise DescriptorValidationError(f"missing descriptor field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            raise DescriptorValidationError(f"malformed descriptor: {e}") from None
        desc.validate()
        return desc


def parse_descriptor(text: str) -> OverlayDescriptor:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DescriptorParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return OverlayDescriptor.from_dict(data)


def save_descriptor(descriptor: OverlayDescriptor, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(descriptor.to_dict(), f, indent=2)
        f.write("\n")


@dataclass
class PipelineRun:
    """Timing components of one frame through the fabric."""

    cycles: int
    stats: CycleStats
    dma_in: CompletionRecord
    dma_out: CompletionRecord
    fabric_clock_hz: float

    @property
    def seconds_compute(self) -> float:
        return self.cycles / self.fabric_clock_hz

    @property
    def simulated_seconds(self) -> float:
        return (
            self.dma_in.simulated_seconds
            + self.seconds_compute
            + self.dma_out.simulated_seconds
        )


class LoadedOverlay:
    """Instantiated overlay: switch + kernels + DMA + mapped registers."""

    def __init__(self, descriptor: OverlayDescriptor):
        descriptor.validate()
        self.descriptor = descriptor
        self.register_file = RegisterFile()
        self.address_map = AddressMap(self.register_file)
        self.switch = StreamSwitch(fabric_clock_hz=descriptor.fabric_clock_hz)
        self.kernels: dict[str, StreamKernel] = {}
        self.channels: dict[str, DmaChannel] = {}
        self.kernel_ports: dict[str, tuple[int, int]] = {}
        self.dma_ports: dict[str, int] = {}
        self.regions: dict[str, RegionHandle] = {}
        self.memory_traffic: list[tuple[str, int]] = []
        self._frame_dims: tuple[int, int] | None = None
        self._kernel_specs = {k.name: k for k in descriptor.kernels}

        self.regions["switch"] = self.address_map.map_region(
            descriptor.switch.register_base, 4 * descriptor.switch.ports, "switch"
        )

        for spec in descriptor.kernels:
            kern = StreamKernel(
                spec.kind,
                name=spec.name,
                threshold=int(spec.params.get("threshold", 128)),
                pipeline_depth=spec.params.get("pipeline_depth"),
            )
            in_port = self.switch.attach_port(kern, CONSUMER)
            out_port = self.switch.attach_port(kern, PRODUCER)
            self.kernels[spec.name] = kern
            self.kernel_ports[spec.name] = (in_port, out_port)
            self.regions[spec.name] = self.address_map.map_region(
                spec.register_base, KERNEL_REGION_LEN, spec.name
            )
            kern.on_status_change = self._push_kernel_status
            self.regions[spec.name].write(K_THRESHOLD, kern.threshold)
            self._push_kernel_status(kern)

        for spec in descriptor.dma_channels:
            ep = DmaPort(spec.direction, name=spec.name)
            direction = PRODUCER if spec.direction == HOST_TO_FABRIC else CONSUMER
            port = self.switch.attach_port(ep, direction)
            chan = dma_init(
                self.switch, spec.direction, port,
                spec.bandwidth_bytes_per_sec, spec.setup_latency_sec, name=spec.name,
            )
            self.channels[spec.name] = chan
            self.dma_ports[spec.name] = port
            self.regions[spec.name] = self.address_map.map_region(
                spec.register_base, DMA_REGION_LEN, spec.name
            )
            chan.on_status_change = self._push_dma_status
            self._push_dma_status(chan)

        # Route registers start unrouted, then the default routes are applied
        # through the same register path raw MMIO uses.
        sw_region = self.regions["switch"]
        for port_id in range(len(self.switch._ports)):
            if self.switch.port_direction(port_id) == CONSUMER:
                sw_region.write(4 * port_id, UNROUTED)
        for producer, consumer in descriptor.default_routes:
            self.reconfigure_route(producer, consumer)

    # --- status mirrors --------------------------------------------------------

    def _push_kernel_status(self, kern: StreamKernel):
        region = self.regions[kern.name]
        status = (
            (1 if kern.configured else 0)
            | (2 if kern.frame_active else 0)
            | (4 if kern.frames_completed > 0 else 0)
        )
        region.write(K_STATUS, status)
        region.write(K_FRAMES, kern.frames_completed & 0xFFFFFFFF)

    def _push_dma_status(self, chan: DmaChannel):
        region = self.regions[chan.name]
        region.write(D_STATUS, _DMA_STATUS_CODE[chan.state])
        region.write(D_BYTES, chan.port.bytes_moved & 0xFFFFFFFF)

    # --- MMIO (absolute addressing, as the host sees it) ---------------------

    def mmio_write(self, address: int, value: int):
        region = self.address_map.find(address)
        if region is None:
            raise RangeError(f"address {address:#x} is not mapped")
        offset = address - region.base
        region.write(offset, value)
        self._dispatch(region.owner, offset, value)

    def mmio_read(self, address: int) -> int:
        region = self.address_map.find(address)
        if region is None:
            raise RangeError(f"address {address:#x} is not mapped")
        return region.read(address - region.base)

    def register_snapshot(self) -> dict[int, int]:
        return self.register_file.snapshot()

    def _dispatch(self, owner: str, offset: int, value: int):
        if owner == "switch":
            self._dispatch_switch(offset, value)
        elif owner in self.kernels:
            self._dispatch_kernel(self.kernels[owner], offset, value)
        elif owner in self.channels:
            # LENGTH arms the frame-size guard; CTRL stays a mirror (buffers
            # are bound through the host API).
            if offset == D_LENGTH:
                self.channels[owner].expected_frame_len = value or None

    def _dispatch_switch(self, offset: int, value: int):
        consumer = offset // 4
        if self.switch.port_direction(consumer) != CONSUMER:
            raise UnknownPortError(
                f"switch register {offset:#x}: port {consumer} is not a consumer port"
            )
        if value == UNROUTED:
            self.switch.unroute(consumer)
            return
        current = self.switch.producer_of(consumer)
        if current == value:
            return
        if current != UNROUTED:
            self.switch.unroute(consumer)
        self.switch.configure_route(value, consumer)

    def _dispatch_kernel(self, kern: StreamKernel, offset: int, value: int):
        if offset == K_CTRL:
            if value & 1:
                kern.reset_stream()
                self._push_kernel_status(kern)
            return
        if offset in (K_WIDTH, K_HEIGHT, K_THRESHOLD):
            region = self.regions[kern.name]
            width = region.read(K_WIDTH)
            height = region.read(K_HEIGHT)
            if width > 0 and height > 0:
                kern.configure(width, height, threshold=region.read(K_THRESHOLD))
                self._push_kernel_status(kern)

    # --- named conveniences -------------------------------------------------

    def describe(self) -> dict:
        """Descriptor summary; load(write(describe(o))) is structurally equal."""
        return self.descriptor.to_dict()

    def _producer_port(self, name: str) -> int:
        if name in self.kernels:
            return self.kernel_ports[name][1]
        if name in self.channels:
            if self.channels[name].direction != HOST_TO_FABRIC:
                raise UnknownEndpointError(f"{name!r} has no producer port")
            return self.dma_ports[name]
        raise UnknownEndpointError(f"no endpoint named {name!r}")

    def _consumer_port(self, name: str) -> int:
        if name in self.kernels:
            return self.kernel_ports[name][0]
        if name in self.channels:
            if self.channels[name].direction != FABRIC_TO_HOST:
                raise UnknownEndpointError(f"{name!r} has no consumer port")
            return self.dma_ports[name]
        raise UnknownEndpointError(f"no endpoint named {name!r}")

    def reconfigure_route(self, producer: str, consumer: str):
        """Route producer's output to consumer's input via the register path.

        Equivalent to the documented raw route-register writes: the
        producer's previous route (if any) is cleared, then the consumer's
        route select is written.
        """
        p_port = self._producer_port(producer)
        c_port = self._consumer_port(consumer)
        if self.switch.frame_active:
            raise BusyError("route change while frame in flight")
        sw_base = self.descriptor.switch.register_base
        old = self.switch.route_of_producer(p_port)
        if old is not None and old[1] != c_port:
            self.mmio_write(sw_base + 4 * old[1], UNROUTED)
        self.mmio_write(sw_base + 4 * c_port, p_port)

    def routes_by_name(self) -> list[tuple[str, str]]:
        port_names = {}
        for name, (inp, outp) in self.kernel_ports.items():
            port_names[inp] = name
            port_names[outp] = name
        for name, port in self.dma_ports.items():
            port_names[port] = name
        return [
            (port_names[p], port_names[c]) for c, p in sorted(self.switch.routes.items())
        ]

    def configure_frame(self, width: int, height: int, threshold: int | None = None):
        """Program every kernel's frame registers and size the DMA guards."""
        for name, kern in self.kernels.items():
            base = self._kernel_specs[name].register_base
            self.mmio_write(base + K_WIDTH, width)
            if threshold is not None and kern.kind == "canny":
                self.mmio_write(base + K_THRESHOLD, threshold)
            self.mmio_write(base + K_HEIGHT, height)
        for spec in self.descriptor.dma_channels:
            self.mmio_write(spec.register_base + D_LENGTH, (width * height) & 0xFFFFFFFF)
        self._frame_dims = (width, height)

    def _single_channel(self, direction: str) -> DmaChannel:
        found = [c for c in self.channels.values() if c.direction == direction]
        if len(found) != 1:
            raise UnknownEndpointError(
                f"overlay has {len(found)} {direction} channels; name one explicitly"
            )
        return found[0]

    def run_pipeline(self, image: PixelImage, threshold: int | None = None,
                     max_cycles: int | None = None, as_edges: bool = True):
        """Push one frame through the configured routes.

        Returns (EdgeMap, PipelineRun); with as_edges=False the output is
        returned as a raw PixelImage instead (for routes whose final kernel
        is not the edge stage).
        """
        self.configure_frame(image.width, image.height, threshold)
        in_ch = self._single_channel(HOST_TO_FABRIC)
        out_ch = self._single_channel(FABRIC_TO_HOST)
        n = image.width * image.height
        if max_cycles is None:
            max_cycles = 4 * n + 200_000
        out_buf = bytearray(n)
        stats_before = self.switch._snapshot_stats()
        t_in = in_ch.transfer(image.tobytes())
        self.memory_traffic.append((in_ch.name, n))
        t_out = out_ch.transfer(out_buf)
        self.memory_traffic.append((out_ch.name, n))
        rec_out = out_ch.wait(t_out, max_cycles=max_cycles)
        rec_in = in_ch.wait(t_in)
        delta = self.switch._delta_since(stats_before)
        cycles = delta.cycles_elapsed
        arr = np.frombuffer(bytes(out_buf), dtype=np.uint8).reshape(
            image.height, image.width
        )
        result = EdgeMap.from_array(arr) if as_edges else PixelImage.from_array(arr)
        run = PipelineRun(
            cycles=cycles,
            stats=delta,
            dma_in=rec_in,
            dma_out=rec_out,
            fabric_clock_hz=self.descriptor.fabric_clock_hz,
        )
        return result, run


def load_overlay(path) -> LoadedOverlay:
    """Parse, validate, and instantiate an overlay descriptor file."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return LoadedOverlay(parse_descriptor(text))


def describe(overlay: LoadedOverlay) -> dict:
    return overlay.describe()


def reconfigure_route(overlay: LoadedOverlay, producer: str, consumer: str):
    overlay.reconfigure_route(producer, consumer)
