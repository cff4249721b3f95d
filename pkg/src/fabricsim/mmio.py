"""Word-addressed control-register space of the programmable fabric.

A pure key-value store: 32-bit registers, 4-byte alignment enforced, reads
have no side effects, never-written registers read back the reset value.
Behavior (start bits, status, route selects) lives in the components that
own each region; the overlay runtime dispatches writes to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlignmentError, OverlapError, RangeError

WORD = 4
WORD_MASK = 0xFFFFFFFF


class RegisterFile:
    """Sparse map from word-aligned absolute byte address to 32-bit word."""

    def __init__(self, reset_value: int = 0):
        if not 0 <= reset_value <= WORD_MASK:
            raise ValueError("reset_value must be a 32-bit word")
        self.reset_value = reset_value
        self._storage: dict[int, int] = {}

    def read_word(self, address: int) -> int:
        return self._storage.get(address, self.reset_value)

    def write_word(self, address: int, value: int):
        if not 0 <= value <= WORD_MASK:
            raise ValueError(f"value {value:#x} does not fit in 32 bits")
        self._storage[address] = value

    def snapshot(self) -> dict[int, int]:
        """Copy of every explicitly written register (address -> word)."""
        return dict(self._storage)


@dataclass(frozen=True)
class RegionHandle:
    """Addressable window [base, base+length) owned by one component."""

    base: int
    length: int
    owner: str
    _rf: RegisterFile = field(repr=False, compare=False)

    def _check(self, offset: int):
        if offset % WORD != 0:
            raise AlignmentError(f"offset {offset:#x} is not 4-byte aligned")
        if offset < 0 or offset + WORD > self.length:
            raise RangeError(
                f"offset {offset:#x} outside region {self.owner!r} "
                f"(length {self.length:#x})"
            )

    def write(self, offset: int, value: int):
        self._check(offset)
        self._rf.write_word(self.base + offset, value)

    def read(self, offset: int) -> int:
        self._check(offset)
        return self._rf.read_word(self.base + offset)


class AddressMap:
    """Non-overlapping, word-aligned regions over one register file."""

    def __init__(self, register_file: RegisterFile | None = None):
        self.register_file = register_file or RegisterFile()
        self.regions: list[RegionHandle] = []

    def map_region(self, base: int, length: int, owner: str) -> RegionHandle:
        if base % WORD != 0:
            raise AlignmentError(f"region base {base:#x} is not 4-byte aligned")
        if length % WORD != 0 or length <= 0:
            raise AlignmentError(f"region length {length:#x} must be a positive multiple of 4")
        for r in self.regions:
            if base < r.base + r.length and r.base < base + length:
                raise OverlapError(
                    f"region [{base:#x}, {base + length:#x}) collides with "
                    f"{r.owner!r} at [{r.base:#x}, {r.base + r.length:#x})"
                )
        handle = RegionHandle(base=base, length=length, owner=owner, _rf=self.register_file)
        self.regions.append(handle)
        return handle

    def find(self, address: int) -> RegionHandle | None:
        for r in self.regions:
            if r.base <= address < r.base + r.length:
                return r
        return None


def map_region(amap: AddressMap, base: int, length: int, owner: str) -> RegionHandle:
    return amap.map_region(base, length, owner)


def mmio_write(region: RegionHandle, offset: int, value: int):
    region.write(offset, value)


def mmio_read(region: RegionHandle, offset: int) -> int:
    return region.read(offset)
