"""Exception types shared across the simulator.

Every failure mode of the public API maps to one of these classes so callers
(and the host bindings) can translate errors 1:1 without string matching.
"""


class FabricSimError(Exception):
    """Base class for all simulator errors."""


# --- register fabric / MMIO ---

class AlignmentError(FabricSimError):
    """Address or length is not 32-bit aligned."""


class RangeError(FabricSimError):
    """Offset falls outside the addressed region."""


class OverlapError(FabricSimError):
    """New region collides with an already mapped one."""


# --- stream switch ---

class DuplicateAttachError(FabricSimError):
    """Endpoint already attached to the switch in that direction."""


class UnknownPortError(FabricSimError):
    """Port id was never attached."""


class RouteConflictError(FabricSimError):
    """Route would create fan-in or fan-out."""


class FrameTimeoutError(FabricSimError):
    """max_cycles elapsed before the sink saw end-of-frame (deadlock or miswiring)."""


class BusyError(FabricSimError):
    """Operation requires an idle pipeline or channel."""


# --- kernels ---

class ImageTooSmallError(FabricSimError):
    """Image below the minimum size for the requested kernel."""


class DimensionMismatchError(FabricSimError):
    """Token stream does not match the declared frame dimensions."""


# --- DMA ---

class PortDirectionError(FabricSimError):
    """DMA channel direction does not match the switch port direction."""


class LengthMismatchError(FabricSimError):
    """Fabric-to-host frame is larger than the receive buffer."""


# --- overlay descriptors ---

class DescriptorError(FabricSimError):
    """Base for overlay descriptor problems."""


class DescriptorParseError(DescriptorError):
    """Descriptor file is not syntactically valid."""


class DescriptorValidationError(DescriptorError):
    """Descriptor parsed but violates a structural invariant."""


class UnknownEndpointError(FabricSimError):
    """Named kernel or DMA channel does not exist in the overlay."""


# --- benchmark harness ---

class DigestMismatchError(FabricSimError):
    """Configurations disagree on the output image; correctness outranks timing."""


class ConfigUnavailableError(FabricSimError):
    """Requested benchmark configuration cannot run in this environment."""


class MissingBaselineError(FabricSimError):
    """Speedup table requested against a configuration that was not measured."""


class PgmFormatError(FabricSimError):
    """File is not a binary 8-bit PGM."""
