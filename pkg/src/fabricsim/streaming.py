"""Streaming (line-buffered) kernel endpoints for the stream switch.

A streaming kernel consumes at most one pixel token per fabric cycle and,
after its fill latency, produces at most one output token per cycle. Over a
full frame the emitted token sequence equals the row-major pixels of the
matching reference operation, bit-exact.

Endpoint protocol (duck-typed, shared with the DMA engines):

* ``tick(cycle)``      advance internal state, called once per cycle
* ``tx_valid(cycle)``  producer side: an output token is available
* ``tx_pop()``         pop that token as ``(payload, last)``
* ``rx_ready()``       consumer side: willing to accept a token this cycle
* ``rx_push(payload, last)``
* ``role``             "source" | "transform" | "sink"
* ``reset_stream()``   abandon any in-flight frame
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .backend import impl as _impl
from .errors import BusyError, DimensionMismatchError
from .kernels import (
    DEFAULT_THRESHOLD,
    PIPELINE_DEPTH,
    WINDOW_PASSES,
    WINDOW_RADIUS,
    ConvKernel,
    latency_of,
    make_gaussian_5x5,
)


class _IdentityEval:
    def __init__(self, frame, width):
        self._frame = frame
        self._w = width

    def pixel(self, x, y):
        return int(self._frame[y * self._w + x])


class StreamKernel:
    """Line-buffered streaming kernel attachable to the switch."""

    role = "transform"

    def __init__(self, kind: str, *, name: str | None = None,
                 conv_kernel: ConvKernel | None = None,
                 threshold: int = DEFAULT_THRESHOLD,
                 pipeline_depth: int | None = None):
        if kind not in WINDOW_RADIUS:
            raise ValueError(f"unknown kernel kind {kind!r}")
        self.kind = kind
        self.name = name or kind
        self.threshold = int(threshold)
        self.conv_kernel = conv_kernel or (make_gaussian_5x5() if kind == "conv" else None)
        self.pipeline_depth = int(pipeline_depth if pipeline_depth is not None
                                  else PIPELINE_DEPTH[kind])
        if self.pipeline_depth < 1:
            raise ValueError("pipeline_depth must be >= 1")
        self.width = 0
        self.height = 0
        self.frames_completed = 0
        self.on_status_change = None  # set by the overlay runtime
        self._radius_total = WINDOW_RADIUS[kind] * WINDOW_PASSES[kind]
        self._frame = None
        self._eval = None
        self._reset_counters()

    # --- configuration -----------------------------------------------------

    @property
    def configured(self) -> bool:
        return self.width >= 1 and self.height >= 1

    @property
    def frame_active(self) -> bool:
        return self._n_in > 0

    def configure(self, width: int, height: int, threshold: int | None = None):
        """Declare frame dimensions (and optionally a new threshold).

        Only legal between frames; streaming state is re-armed.
        """
        if self.frame_active:
            raise BusyError(f"kernel {self.name!r}: reconfigure while frame in flight")
        k = 2 * WINDOW_RADIUS[self.kind] + 1
        if width < k or height < k:
            raise ValueError(f"{self.kind} frame must be at least {k}x{k}")
        self.width = int(width)
        self.height = int(height)
        if threshold is not None:
            self.threshold = int(threshold)
        self._arm()

    def latency(self) -> int:
        return latency_of(self.kind, self.width)

    def _arm(self):
        total = self.width * self.height
        self._frame = np.zeros(total, dtype=np.uint8)
        if self.kind == "conv":
            self._eval = _impl.ConvStream(self._frame, self.width, self.height,
                                          self.conv_kernel.taps, self.conv_kernel.divisor)
        elif self.kind == "canny":
            self._eval = _impl.CannyStream(self._frame, self.width, self.height,
                                           self.threshold)
        else:
            self._eval = _IdentityEval(self._frame, self.width)
        self._reset_counters()

    def _reset_counters(self):
        self._n_in = 0
        self._n_compute = 0
        self._n_emit = 0
        self._queue = deque()
        self._queue_cap = self.pipeline_depth + 8
        lag = self._radius_total * (self.width + 1)
        self._in_flight_cap = lag + self.pipeline_depth + self._queue_cap + 8

    def reset_stream(self):
        if self.configured:
            self._arm()
        else:
            self._reset_counters()

    # --- endpoint protocol ---------------------------------------------------

    def rx_ready(self) -> bool:
        return (
            self.configured
            and self._n_in < self.width * self.height
            and (self._n_in - self._n_emit) < self._in_flight_cap
        )

    def rx_push(self, payload: int, last: bool):
        total = self.width * self.height
        self._frame[self._n_in] = payload & 0xFF
        self._n_in += 1
        if last and self._n_in != total:
            raise DimensionMismatchError(
                f"kernel {self.name!r}: end-of-frame after {self._n_in} tokens, "
                f"declared {total}"
            )
        if not last and self._n_in == total:
            raise DimensionMismatchError(
                f"kernel {self.name!r}: {total} tokens received without end-of-frame"
            )

    def tx_valid(self, cycle: int) -> bool:
        q = self._queue
        return bool(q) and q[0][0] <= cycle

    def tx_pop(self):
        _, payload, last = self._queue.popleft()
        self._n_emit += 1
        return payload, last

    def _needed(self, m: int) -> int:
        # Highest input index required before output m is computable.
        w = self.width
        h = self.height
        r = self._radius_total
        q, c = divmod(m, w)
        qq = q + r
        if qq > h - 1:
            qq = h - 1
        cc = c + r
        if cc > w - 1:
            cc = w - 1
        return qq * w + cc

    def tick(self, cycle: int):
        total = self.width * self.height
        if total == 0:
            return
        m = self._n_compute
        if m < total and len(self._queue) < self._queue_cap and self._n_in > self._needed(m):
            q, c = divmod(m, self.width)
            value = self._eval.pixel(c, q)
            self._queue.append((cycle + self.pipeline_depth, value, m == total - 1))
            self._n_compute = m + 1
        if self._n_emit == total:
            self.frames_completed += 1
            self._reset_counters()
            if self.on_status_change is not None:
                self.on_status_change(self)


def make_streaming(kernel_kind: str, **params) -> StreamKernel:
    """Factory for streaming kernels: kind 'conv', 'canny', or 'identity'."""
    return StreamKernel(kernel_kind, **params)


class TokenSource:
    """Feeds a fixed token sequence into the switch, one per cycle."""

    role = "source"

    def __init__(self, payloads, name: str = "source"):
        self.name = name
        self._data = list(payloads)
        self._pos = 0

    def tx_valid(self, cycle: int) -> bool:
        return self._pos < len(self._data)

    def tx_pop(self):
        p = self._data[self._pos]
        self._pos += 1
        return p, self._pos == len(self._data)

    def tick(self, cycle: int):
        pass

    def reset_stream(self):
        self._pos = 0

    @property
    def exhausted(self) -> bool:
        return self._pos >= len(self._data)


class TokenSink:
    """Captures arriving tokens (with their arrival cycles)."""

    role = "sink"

    def __init__(self, name: str = "sink", ready_after: int = 0):
        self.name = name
        self.tokens: list[int] = []
        self.arrival_cycles: list[int] = []
        self.saw_last = False
        self._cycle = 0
        self._ready_after = ready_after

    def rx_ready(self) -> bool:
        return self._cycle >= self._ready_after

    def rx_push(self, payload: int, last: bool):
        self.tokens.append(payload)
        self.arrival_cycles.append(self._cycle + 1)
        if last:
            self.saw_last = True

    def tick(self, cycle: int):
        self._cycle = cycle

    def reset_stream(self):
        self.tokens.clear()
        self.arrival_cycles.clear()
        self.saw_last = False
