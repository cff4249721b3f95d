"""Modeled DMA engines moving byte buffers between host memory and switch ports.

Each channel owns one stream port: host->fabric channels emit buffer bytes as
pixel tokens (one per fabric cycle when the consumer is ready), fabric->host
channels fill a buffer from arriving tokens. The simulated cost of a transfer
is ``setup_latency + bytes/bandwidth`` plus any backpressure stall time
observed on the channel's route (in fabric cycles).

One outstanding transfer per channel; no scatter-gather.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BusyError, FrameTimeoutError, LengthMismatchError, PortDirectionError
from .switch import CONSUMER, PRODUCER, StreamSwitch

HOST_TO_FABRIC = "host_to_fabric"
FABRIC_TO_HOST = "fabric_to_host"

IDLE = "idle"
BUSY = "busy"
DONE = "done"


class DmaPort:
    """Switch endpoint of a DMA channel (one side, fixed by direction)."""

    def __init__(self, direction: str, name: str = "dma"):
        if direction not in (HOST_TO_FABRIC, FABRIC_TO_HOST):
            raise ValueError(f"bad direction {direction!r}")
        self.direction = direction
        self.name = name
        self.role = "source" if direction == HOST_TO_FABRIC else "sink"
        self.channel = None
        self._reset()

    def _reset(self):
        self._data = None
        self._buf = None
        self._pos = 0
        self._received = 0
        self._complete_cycle = None

    # source side ------------------------------------------------------------

    def arm_send(self, data: bytes):
        self._reset()
        self._data = data

    def tx_valid(self, cycle: int) -> bool:
        return self._data is not None and self._pos < len(self._data)

    def tx_pop(self):
        b = self._data[self._pos]
        self._pos += 1
        return b, self._pos == len(self._data)

    # sink side ----------------------------------------------------------------

    def arm_receive(self, buf: bytearray):
        self._reset()
        self._buf = buf

    def rx_ready(self) -> bool:
        return (
            self._buf is not None
            and self._received < len(self._buf)
            and self._complete_cycle is None
        )

    def rx_push(self, payload: int, last: bool):
        self._buf[self._received] = payload & 0xFF
        self._received += 1
        if last:
            self._complete_cycle = -1  # finalized on the next tick

    # shared --------------------------------------------------------------------

    def tick(self, cycle: int):
        if self._complete_cycle is None:
            if self._data is not None and self._pos == len(self._data):
                self._complete_cycle = cycle
                if self.channel is not None:
                    self.channel._note_streaming_done(cycle)
        elif self._complete_cycle == -1:
            self._complete_cycle = cycle
            if self.channel is not None:
                self.channel._note_streaming_done(cycle)

    @property
    def streaming_done(self) -> bool:
        return self._complete_cycle is not None and self._complete_cycle != -1

    @property
    def bytes_moved(self) -> int:
        return self._pos if self._data is not None else self._received

    def reset_stream(self):
        self._reset()


@dataclass(frozen=True)
class CompletionRecord:
    """Outcome of one DMA transfer."""

    bytes_moved: int
    simulated_seconds: float
    cycles: int
    stall_cycles: int


class TransferTicket:
    """Handle for one outstanding (or finished) transfer."""

    def __init__(self, channel: "DmaChannel", length: int, start_cycle: int,
                 stall_base: int):
        self.channel = channel
        self.length = length
        self.start_cycle = start_cycle
        self.stall_base = stall_base
        self.record: CompletionRecord | None = None

    @property
    def done(self) -> bool:
        return self.record is not None or self.channel.port.streaming_done


class DmaChannel:
    """One-direction DMA engine bound to a single switch port."""

    def __init__(self, switch: StreamSwitch, direction: str, port: int,
                 bandwidth_bytes_per_sec: float, setup_latency_sec: float,
                 name: str = "dma"):
        self.switch = switch
        self.direction = direction
        self.port_id = port
        self.port: DmaPort = switch.port_endpoint(port)
        self.bandwidth = float(bandwidth_bytes_per_sec)
        self.setup_latency = float(setup_latency_sec)
        self.name = name
        self.state = IDLE
        self.expected_frame_len: int | None = None
        self.on_status_change = None  # set by the overlay runtime
        self.port.channel = self
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.setup_latency < 0:
            raise ValueError("setup_latency must be >= 0")

    # --- transfers -----------------------------------------------------------

    def transfer(self, buffer) -> TransferTicket:
        """Arm the channel with a buffer; returns a ticket for dma_wait."""
        if self.state != IDLE:
            raise BusyError(
                f"channel {self.name!r} is {self.state}; wait on the previous "
                f"transfer first"
            )
        if self.direction == HOST_TO_FABRIC:
            data = bytes(buffer)
            if len(data) == 0:
                raise ValueError("cannot transfer an empty buffer")
            self.port.arm_send(data)
            length = len(data)
        else:
            if not isinstance(buffer, bytearray):
                raise TypeError("fabric->host transfer needs a writable bytearray")
            if len(buffer) == 0:
                raise ValueError("cannot transfer into an empty buffer")
            if self.expected_frame_len is not None and len(buffer) < self.expected_frame_len:
                raise LengthMismatchError(
                    f"channel {self.name!r}: frame is {self.expected_frame_len} bytes "
                    f"but the buffer holds only {len(buffer)}"
                )
            self.port.arm_receive(buffer)
            length = len(buffer)
        self.state = BUSY
        self._notify()
        route = self._route_key()
        stall0 = self.switch.stats.stall_cycles.get(route, 0) if route else 0
        return TransferTicket(self, length, self.switch.cycles_elapsed, stall0)

    def _route_key(self):
        if self.direction == HOST_TO_FABRIC:
            return self.switch.route_of_producer(self.port_id)
        producer = self.switch.producer_of(self.port_id)
        return None if producer == 0xFFFFFFFF else (producer, self.port_id)

    def _note_streaming_done(self, cycle: int):
        if self.state == BUSY:
            self.state = DONE
            self._notify()

    def _notify(self):
        if self.on_status_change is not None:
            self.on_status_change(self)

    def wait(self, ticket: TransferTicket, max_cycles: int | None = None) -> CompletionRecord:
        """Block (step the fabric) until the transfer completes; idempotent."""
        if ticket.record is not None:
            return ticket.record
        if max_cycles is None:
            max_cycles = 10_000 + 64 * ticket.length
        steps = 0
        step_once = self.switch._step_once
        while not self.port.streaming_done:
            if steps >= max_cycles:
                raise FrameTimeoutError(
                    f"channel {self.name!r}: transfer incomplete after {max_cycles} "
                    f"cycles (deadlock or miswiring)"
                )
            step_once()
            steps += 1
        route = self._route_key()
        stalls = (
            self.switch.stats.stall_cycles.get(route, 0) - ticket.stall_base
            if route
            else 0
        )
        moved = self.port.bytes_moved
        seconds = (
            self.setup_latency
            + moved / self.bandwidth
            + stalls / self.switch.fabric_clock_hz
        )
        ticket.record = CompletionRecord(
            bytes_moved=moved,
            simulated_seconds=seconds,
            cycles=self.switch.cycles_elapsed - ticket.start_cycle,
            stall_cycles=stalls,
        )
        self.state = IDLE
        self._notify()
        return ticket.record

    def cost_model(self, length: int) -> float:
        """Stall-free transfer cost: setup latency + length / bandwidth."""
        return self.setup_latency + length / self.bandwidth


def dma_init(switch: StreamSwitch, direction: str, port: int,
             bandwidth_bytes_per_sec: float, setup_latency_sec: float,
             name: str = "dma") -> DmaChannel:
    """Create a channel over an already attached port of matching direction."""
    want = PRODUCER if direction == HOST_TO_FABRIC else CONSUMER
    have = switch.port_direction(port)
    if have != want:
        raise PortDirectionError(
            f"{direction} channel needs a {want} port, but port {port} is a {have} port"
        )
    ep = switch.port_endpoint(port)
    if not isinstance(ep, DmaPort) or ep.direction != direction:
        raise PortDirectionError(
            f"port {port} is not a {direction} DMA endpoint"
        )
    return DmaChannel(switch, direction, port, bandwidth_bytes_per_sec,
                      setup_latency_sec, name=name)


def dma_transfer(channel: DmaChannel, buffer) -> TransferTicket:
    return channel.transfer(buffer)


def dma_wait(ticket: TransferTicket, max_cycles: int | None = None) -> CompletionRecord:
    return ticket.channel.wait(ticket, max_cycles)
