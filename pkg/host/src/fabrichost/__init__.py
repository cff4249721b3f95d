"""fabrichost: host-scripting bindings over the fabricsim overlay simulator.

Mirrors the familiar host API shape: load an overlay by descriptor path,
poke control registers through MMIO windows, and move frames with DMA
transfer + wait. See examples/ for runnable pipeline scripts.
"""

from .api import (
    HostDmaBuffer,
    HostDmaChannel,
    HostMmio,
    HostOverlay,
    load_overlay,
)
from .errors import ClosedHandleError, HostBindingError, MissingNativeLibraryError

__version__ = "0.1.0"
