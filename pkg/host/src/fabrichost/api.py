"""Host-side overlay handle mirroring the familiar Overlay / MMIO / DMA shape.

The bindings are a thin façade: every operation delegates to the simulation
package, no pixel data is touched on this side, and simulator errors
propagate unchanged with their original messages.
"""

from __future__ import annotations

from ._native import native
from .errors import ClosedHandleError


class HostDmaBuffer:
    """Script-side byte buffer registered for DMA.

    Wraps one bytearray and hands that same object to the channel; there are
    no hidden copies that could skew timing.
    """

    def __init__(self, length: int):
        if length <= 0:
            raise ValueError("buffer length must be positive")
        self.data = bytearray(length)

    def __len__(self) -> int:
        return len(self.data)

    @classmethod
    def from_bytes(cls, payload: bytes) -> "HostDmaBuffer":
        buf = cls(len(payload))
        buf.data[:] = payload
        return buf

    def tobytes(self) -> bytes:
        return bytes(self.data)


class HostMmio:
    """Window of the fabric register space: read/write at byte offsets."""

    def __init__(self, overlay: "HostOverlay", base: int, length: int):
        self._overlay = overlay
        self.base = base
        self.length = length

    def _addr(self, offset: int) -> int:
        if offset < 0 or offset + 4 > self.length:
            fs = native()
            raise fs.RangeError(
                f"offset {offset:#x} outside MMIO window of {self.length:#x} bytes"
            )
        return self.base + offset

    def read(self, offset: int) -> int:
        return self._overlay._native_overlay().mmio_read(self._addr(offset))

    def write(self, offset: int, value: int) -> None:
        self._overlay._native_overlay().mmio_write(self._addr(offset), value)


class HostDmaChannel:
    """Named DMA channel of a loaded overlay."""

    def __init__(self, overlay: "HostOverlay", name: str):
        self._overlay = overlay
        self.name = name

    def _chan(self):
        ov = self._overlay._native_overlay()
        try:
            return ov.channels[self.name]
        except KeyError:
            fs = native()
            raise fs.UnknownEndpointError(f"no DMA channel named {self.name!r}") from None

    def transfer(self, buffer):
        """Start a transfer; accepts bytes (host->fabric) or HostDmaBuffer /
        bytearray (fabric->host). Returns a ticket for wait()."""
        payload = buffer.data if isinstance(buffer, HostDmaBuffer) else buffer
        return self._chan().transfer(payload)

    def wait(self, ticket, max_cycles: int | None = None):
        """Block until the transfer completes; returns the completion record
        (bytes moved, simulated seconds, cycles, stall cycles)."""
        return self._chan().wait(ticket, max_cycles=max_cycles)


class HostOverlay:
    """Handle to a loaded overlay owned by the simulation package."""

    def __init__(self, path):
        fs = native()
        self._overlay = fs.load_overlay(path)
        self._closed = False

    def _native_overlay(self):
        if self._closed:
            raise ClosedHandleError("overlay handle has been released")
        return self._overlay

    # -- introspection -------------------------------------------------------

    def describe(self) -> dict:
        return self._native_overlay().describe()

    def port_map(self) -> dict:
        ov = self._native_overlay()
        ports = {
            name: {"in": pin, "out": pout}
            for name, (pin, pout) in ov.kernel_ports.items()
        }
        for name, port in ov.dma_ports.items():
            ports[name] = {"port": port}
        return ports

    def routes(self) -> list[tuple[str, str]]:
        return self._native_overlay().routes_by_name()

    def register_snapshot(self) -> dict[int, int]:
        return self._native_overlay().register_snapshot()

    @property
    def fabric_clock_hz(self) -> float:
        return self._native_overlay().descriptor.fabric_clock_hz

    @property
    def cycles_elapsed(self) -> int:
        return self._native_overlay().switch.cycles_elapsed

    # -- control ---------------------------------------------------------------

    def mmio(self, base: int, length: int) -> HostMmio:
        self._native_overlay()
        return HostMmio(self, base, length)

    def dma(self, name: str) -> HostDmaChannel:
        self._native_overlay()
        return HostDmaChannel(self, name)

    def reconfigure_route(self, producer: str, consumer: str) -> None:
        self._native_overlay().reconfigure_route(producer, consumer)

    def close(self) -> None:
        self._closed = True

    def __enter__(self) -> "HostOverlay":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def load_overlay(path) -> HostOverlay:
    """Load an overlay descriptor; the host-side analog of programming a
    bitstream."""
    return HostOverlay(path)
