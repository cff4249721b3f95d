"""Configurable stream crossbar stepped one fabric cycle at a time.

Routing rules (v1): each consumer port has at most one producer and each
producer drives at most one consumer — the pipelines in scope are linear.
Per cycle, a route moves at most one token, and only when the producer has
a valid token and the consumer is ready; otherwise the cycle is recorded as
a stall for that route. Route changes are only legal between frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    BusyError,
    DuplicateAttachError,
    FrameTimeoutError,
    RouteConflictError,
    UnknownPortError,
)

UNROUTED = 0xFFFFFFFF

PRODUCER = "producer"
CONSUMER = "consumer"


@dataclass
class CycleStats:
    """Cycle and per-route token/stall accounting."""

    cycles_elapsed: int = 0
    tokens_moved: dict = field(default_factory=dict)
    stall_cycles: dict = field(default_factory=dict)

    def merge(self, other: "CycleStats") -> "CycleStats":
        self.cycles_elapsed += other.cycles_elapsed
        for k, v in other.tokens_moved.items():
            self.tokens_moved[k] = self.tokens_moved.get(k, 0) + v
        for k, v in other.stall_cycles.items():
            self.stall_cycles[k] = self.stall_cycles.get(k, 0) + v
        return self


@dataclass
class _Port:
    port_id: int
    endpoint: object
    direction: str


class StreamSwitch:
    """Crossbar connecting streaming kernel ports and DMA ports."""

    def __init__(self, fabric_clock_hz: float = 200e6):
        self.fabric_clock_hz = float(fabric_clock_hz)
        self._ports: dict[int, _Port] = {}
        self._attached: set[tuple[int, str]] = set()
        self._routes: dict[int, int] = {}  # consumer port -> producer port
        self._cycle = 0
        self._frame_active = False
        self._plan = []
        self._ticks = []
        self.stats = CycleStats()
        self.last_delivery: dict[tuple[int, int], int] = {}

    # --- topology ----------------------------------------------------------

    def attach_port(self, endpoint, direction: str) -> int:
        if direction not in (PRODUCER, CONSUMER):
            raise ValueError(f"direction must be producer|consumer, got {direction!r}")
        key = (id(endpoint), direction)
        if key in self._attached:
            raise DuplicateAttachError(
                f"endpoint {getattr(endpoint, 'name', endpoint)!r} already attached "
                f"as {direction}"
            )
        port_id = len(self._ports)
        self._ports[port_id] = _Port(port_id, endpoint, direction)
        self._attached.add(key)
        self._rebuild_ticks()
        return port_id

    def port_direction(self, port_id: int) -> str:
        return self._require_port(port_id).direction

    def port_endpoint(self, port_id: int):
        return self._require_port(port_id).endpoint

    def _require_port(self, port_id: int) -> _Port:
        try:
            return self._ports[port_id]
        except KeyError:
            raise UnknownPortError(f"port {port_id} was never attached") from None

    def _rebuild_ticks(self):
        seen = set()
        ticks = []
        for p in self._ports.values():
            if id(p.endpoint) not in seen:
                seen.add(id(p.endpoint))
                ticks.append(p.endpoint.tick)
        self._ticks = ticks

    # --- routing -------------------------------------------------------------

    @property
    def frame_active(self) -> bool:
        return self._frame_active

    @property
    def routes(self) -> dict[int, int]:
        """Copy of the routing table: consumer port -> producer port."""
        return dict(self._routes)

    def configure_route(self, producer: int, consumer: int):
        if self._frame_active:
            raise BusyError("route change while frame in flight")
        p = self._require_port(producer)
        c = self._require_port(consumer)
        if p.direction != PRODUCER:
            raise UnknownPortError(f"port {producer} is not a producer port")
        if c.direction != CONSUMER:
            raise UnknownPortError(f"port {consumer} is not a consumer port")
        if consumer in self._routes:
            raise RouteConflictError(
                f"consumer port {consumer} already driven by port {self._routes[consumer]}"
            )
        if producer in self._routes.values():
            raise RouteConflictError(f"producer port {producer} already drives a consumer")
        self._routes[consumer] = producer
        self._rebuild_plan()

    def unroute(self, consumer: int):
        if self._frame_active:
            raise BusyError("route change while frame in flight")
        self._require_port(consumer)
        self._routes.pop(consumer, None)
        self._rebuild_plan()

    def producer_of(self, consumer: int) -> int:
        return self._routes.get(consumer, UNROUTED)

    def route_of_producer(self, producer: int):
        for c, p in self._routes.items():
            if p == producer:
                return (p, c)
        return None

    def _rebuild_plan(self):
        plan = []
        for consumer in sorted(self._routes):
            producer = self._routes[consumer]
            pe = self._ports[producer].endpoint
            ce = self._ports[consumer].endpoint
            key = (producer, consumer)
            is_sink = getattr(ce, "role", "") == "sink"
            plan.append((pe.tx_valid, pe.tx_pop, ce.rx_ready, ce.rx_push, key, is_sink))
        self._plan = plan

    # --- stepping ------------------------------------------------------------

    @property
    def cycles_elapsed(self) -> int:
        return self._cycle

    def _snapshot_stats(self) -> CycleStats:
        return CycleStats(
            cycles_elapsed=self.stats.cycles_elapsed,
            tokens_moved=dict(self.stats.tokens_moved),
            stall_cycles=dict(self.stats.stall_cycles),
        )

    def _delta_since(self, before: CycleStats) -> CycleStats:
        delta = CycleStats(cycles_elapsed=self.stats.cycles_elapsed - before.cycles_elapsed)
        for k, v in self.stats.tokens_moved.items():
            d = v - before.tokens_moved.get(k, 0)
            if d:
                delta.tokens_moved[k] = d
        for k, v in self.stats.stall_cycles.items():
            d = v - before.stall_cycles.get(k, 0)
            if d:
                delta.stall_cycles[k] = d
        return delta

    def step(self) -> CycleStats:
        """Advance one fabric cycle; returns the per-cycle stats delta."""
        before = self._snapshot_stats()
        self._step_once()
        return self._delta_since(before)

    def _step_once(self) -> bool:
        """Advance one cycle, accumulating into self.stats (the fast path)."""
        cycle = self._cycle + 1
        sink_done = False
        moved = self.stats.tokens_moved
        stalled = self.stats.stall_cycles
        for tx_valid, tx_pop, rx_ready, rx_push, key, is_sink in self._plan:
            if tx_valid(cycle):
                if rx_ready():
                    payload, last = tx_pop()
                    rx_push(payload, last)
                    moved[key] = moved.get(key, 0) + 1
                    self._frame_active = True
                    if last:
                        self.last_delivery[key] = cycle
                        if is_sink:
                            sink_done = True
                else:
                    stalled[key] = stalled.get(key, 0) + 1
        for tick in self._ticks:
            tick(cycle)
        self._cycle = cycle
        self.stats.cycles_elapsed += 1
        if sink_done:
            # End of frame: the sink swallowed the last token, so route
            # changes become legal again.
            self._frame_active = False
        return sink_done

    def _sink_routes(self) -> list[tuple[int, int]]:
        out = []
        for consumer, producer in self._routes.items():
            ep = self._ports[consumer].endpoint
            if getattr(ep, "role", "") == "sink":
                out.append((producer, consumer))
        return out

    def run_frame(self, max_cycles: int) -> CycleStats:
        """Step until the sink receives an end-of-frame token.

        Raises FrameTimeoutError after max_cycles — the signature of a
        deadlocked or miswired pipeline.
        """
        sinks = self._sink_routes()
        if len(sinks) > 1:
            raise RouteConflictError(f"{len(sinks)} routed sinks; pipelines are linear in v1")
        before = self._snapshot_stats()
        step_once = self._step_once
        for _ in range(max_cycles):
            if step_once():
                return self._delta_since(before)
        raise FrameTimeoutError(
            f"no end-of-frame at the sink within {max_cycles} cycles "
            f"(deadlock or miswiring)"
        )

    def abort_frame(self):
        """Abandon an in-flight frame and reset every endpoint's stream state."""
        seen = set()
        for p in self._ports.values():
            if id(p.endpoint) not in seen:
                seen.add(id(p.endpoint))
                p.endpoint.reset_stream()
        self._frame_active = False


def run_frame(switch: StreamSwitch, max_cycles: int) -> CycleStats:
    """Module-level convenience wrapper over StreamSwitch.run_frame."""
    return switch.run_frame(max_cycles)
