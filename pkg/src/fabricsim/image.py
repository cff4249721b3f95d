"""8-bit grayscale rasters and binary PGM (P5) I/O."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import PgmFormatError


@dataclass(frozen=True)
class PixelImage:
    """Row-major 8-bit grayscale raster, the unit of work for every pipeline."""

    width: int
    height: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.ascontiguousarray(self.samples, dtype=np.uint8)
        if a.ndim == 1:
            a = a.reshape(self.height, self.width)
        if a.shape != (self.height, self.width):
            raise ValueError(
                f"samples shape {a.shape} != (height={self.height}, width={self.width})"
            )
        object.__setattr__(self, "samples", a)

    @classmethod
    def from_array(cls, a) -> "PixelImage":
        a = np.ascontiguousarray(a, dtype=np.uint8)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(width=a.shape[1], height=a.shape[0], samples=a)

    @classmethod
    def constant(cls, width: int, height: int, value: int) -> "PixelImage":
        return cls.from_array(np.full((height, width), value, dtype=np.uint8))

    def tobytes(self) -> bytes:
        return self.samples.tobytes()

    def transpose(self) -> "PixelImage":
        return PixelImage.from_array(self.samples.T)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PixelImage)
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.samples, other.samples)
        )


@dataclass(frozen=True)
class EdgeMap:
    """Binary edge raster: 0 = non-edge, 255 = edge."""

    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.ascontiguousarray(self.values, dtype=np.uint8)
        if a.ndim == 1:
            a = a.reshape(self.height, self.width)
        if a.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {a.shape} != (height={self.height}, width={self.width})"
            )
        bad = (a != 0) & (a != 255)
        if bad.any():
            raise ValueError("edge map may only contain 0 and 255")
        object.__setattr__(self, "values", a)

    @classmethod
    def from_array(cls, a) -> "EdgeMap":
        a = np.ascontiguousarray(a, dtype=np.uint8)
        return cls(width=a.shape[1], height=a.shape[0], values=a)

    def tobytes(self) -> bytes:
        return self.values.tobytes()

    def transpose(self) -> "EdgeMap":
        return EdgeMap.from_array(self.values.T)

    def digest(self) -> str:
        """SHA-256 of the raw bytes; the unanimity check across configurations."""
        return hashlib.sha256(self.tobytes()).hexdigest()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EdgeMap)
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.values, other.values)
        )


def _read_pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comments, then collect one token.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise PgmFormatError("truncated header")
    return data[start:pos], pos


def read_pgm(path) -> PixelImage:
    """Read a binary PGM (P5, maxval 255)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P5":
        raise PgmFormatError(f"not a binary PGM (magic {data[:2]!r}, expected b'P5')")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise PgmFormatError(f"non-numeric header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise PgmFormatError(f"maxval {maxval} unsupported, expected 255")
    if width <= 0 or height <= 0:
        raise PgmFormatError(f"bad dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos : pos + width * height]
    if len(payload) != width * height:
        raise PgmFormatError(
            f"truncated payload: expected {width * height} bytes, got {len(payload)}"
        )
    samples = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return PixelImage(width=width, height=height, samples=samples.copy())


def write_pgm(img, path) -> None:
    """Write a PixelImage or EdgeMap as binary PGM (P5, maxval 255)."""
    if isinstance(img, EdgeMap):
        w, h, raw = img.width, img.height, img.tobytes()
    elif isinstance(img, PixelImage):
        w, h, raw = img.width, img.height, img.tobytes()
    else:
        raise TypeError(f"cannot write {type(img).__name__} as PGM")
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(raw)
