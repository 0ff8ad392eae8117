"""Point-wise relative-error-bounded lossy codec for SV blocks.

A block of complex amplitudes is flattened to its real parts followed by
its imaginary parts. Each scalar ``v`` is stored as

* a sign bit (1 for ``v < 0``) and a zero bit (1 for ``v == 0``), both kept
  in chunked "prescan" bitmaps that drop all-0 / all-1 chunks;
* for nonzero ``v``, the integer code ``round(log2|v| / b_a)`` with
  ``b_a = log2(1 + b_r)``, bit-packed at a fixed width after subtracting the
  block minimum.

Decoding returns ``sign * 2**(code * b_a)``. Because the log-domain error is
at most ``b_a / 2``, the relative error is at most ``sqrt(1 + b_r) - 1 < b_r``.

Payload layout (little-endian, byte-aligned, in order)::

    header   <Q d q B B>  scalar_count, b_r, code_min, code_width, flags
    sign     prescan segment
    zero     prescan segment
    codes    ceil(nonzeros * code_width / 8) bytes, LSB-first bit order

A prescan segment is ``<Q>`` bit count, then 2-bit tags for every full
4096-bit chunk (packed four per byte), then the raw bytes of every MIXED
chunk, then the raw bytes of the trailing partial chunk. An ALL_ZERO block
is the header alone.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

CHUNK_BITS = 4096
CHUNK_BYTES = CHUNK_BITS // 8

TAG_ALL0, TAG_ALL1, TAG_MIXED = 0, 1, 2

FLAG_ALL_ZERO = 0x01

_HEADER = struct.Struct("<QdqBB")
_COUNT = struct.Struct("<Q")
_MAX_CODE = 2 ** 62


class CodecError(ValueError):
    """Malformed payload; ``segment`` names the part that failed to decode."""

    def __init__(self, segment: str, message: str):
        self.segment = segment
        super().__init__(f"{segment}: {message}")


def relative_to_absolute_bound(b_r: float) -> float:
    """Log2-domain absolute bound that induces point-wise relative bound ``b_r``."""
    if not b_r > 0 or not math.isfinite(b_r):
        raise ValueError(f"relative error bound must be positive and finite, got {b_r}")
    return math.log2(1.0 + b_r)


@dataclass(frozen=True)
class ErrorBound:
    b_r: float

    def __post_init__(self):
        relative_to_absolute_bound(self.b_r)

    @property
    def b_a(self) -> float:
        return relative_to_absolute_bound(self.b_r)


# ---------------------------------------------------------------------------
# prescan bitmaps

@dataclass(frozen=True)
class PrescanBitmap:
    nbits: int
    tags: bytes
    raw: bytes

    def to_bytes(self) -> bytes:
        return _COUNT.pack(self.nbits) + self.tags + self.raw

    @staticmethod
    def sizes(nbits: int, tags: np.ndarray | None = None) -> tuple[int, int]:
        full = nbits // CHUNK_BITS
        tag_bytes = (2 * full + 7) // 8
        tail_bytes = (nbits % CHUNK_BITS + 7) // 8
        if tags is None:
            return tag_bytes, tail_bytes
        return tag_bytes, int(np.count_nonzero(tags == TAG_MIXED)) * CHUNK_BYTES + tail_bytes

    @classmethod
    def from_bytes(cls, data: bytes | memoryview, offset: int = 0,
                   segment: str = "bitmap") -> tuple["PrescanBitmap", int]:
        """Read one segment starting at ``offset``; returns it and the end offset."""
        if len(data) < offset + _COUNT.size:
            raise CodecError(segment, "truncated bit count")
        (nbits,) = _COUNT.unpack_from(data, offset)
        offset += _COUNT.size
        tag_bytes, _ = cls.sizes(nbits)
        if len(data) < offset + tag_bytes:
            raise CodecError(segment, "truncated chunk tags")
        tags_raw = bytes(data[offset:offset + tag_bytes])
        offset += tag_bytes
        tags = _unpack_tags(tags_raw, nbits // CHUNK_BITS)
        if np.any(tags > TAG_MIXED):
            raise CodecError(segment, "invalid chunk tag")
        _, raw_bytes = cls.sizes(nbits, tags)
        if len(data) < offset + raw_bytes:
            raise CodecError(segment, "truncated raw chunk data")
        raw = bytes(data[offset:offset + raw_bytes])
        return cls(nbits, tags_raw, raw), offset + raw_bytes


def _unpack_tags(tag_bytes: bytes, count: int) -> np.ndarray:
    packed = np.frombuffer(tag_bytes, dtype=np.uint8)
    tags = np.empty(len(packed) * 4, dtype=np.uint8)
    for k in range(4):
        tags[k::4] = (packed >> (2 * k)) & 3
    return tags[:count]


def _pack_tags(tags: np.ndarray) -> bytes:
    padded = np.zeros(-(-len(tags) // 4) * 4, dtype=np.uint8)
    padded[:len(tags)] = tags
    out = np.zeros(len(padded) // 4, dtype=np.uint8)
    for k in range(4):
        out |= padded[k::4] << (2 * k)
    return out.tobytes()


def prescan_encode(bits: np.ndarray) -> PrescanBitmap:
    """Classify each full 4096-bit chunk as all-0, all-1 or mixed; keep raw bits only for mixed ones."""
    bits = np.asarray(bits, dtype=bool).ravel()
    nbits = len(bits)
    full = nbits // CHUNK_BITS
    body = bits[:full * CHUNK_BITS].reshape(full, CHUNK_BITS)
    ones = body.sum(axis=1)
    tags = np.full(full, TAG_MIXED, dtype=np.uint8)
    tags[ones == 0] = TAG_ALL0
    tags[ones == CHUNK_BITS] = TAG_ALL1
    raw = np.packbits(body[tags == TAG_MIXED], axis=None, bitorder="little").tobytes()
    raw += np.packbits(bits[full * CHUNK_BITS:], bitorder="little").tobytes()
    return PrescanBitmap(nbits, _pack_tags(tags), raw)


def prescan_decode(bm: PrescanBitmap) -> np.ndarray:
    full = bm.nbits // CHUNK_BITS
    tag_bytes, _ = PrescanBitmap.sizes(bm.nbits)
    if len(bm.tags) != tag_bytes:
        raise CodecError("bitmap", f"expected {tag_bytes} tag bytes, got {len(bm.tags)}")
    tags = _unpack_tags(bm.tags, full)
    _, raw_bytes = PrescanBitmap.sizes(bm.nbits, tags)
    if len(bm.raw) != raw_bytes:
        raise CodecError("bitmap", f"expected {raw_bytes} raw bytes for {bm.nbits} bits, got {len(bm.raw)}")

    out = np.empty(bm.nbits, dtype=bool)
    body = out[:full * CHUNK_BITS].reshape(full, CHUNK_BITS)
    body[tags == TAG_ALL0] = False
    body[tags == TAG_ALL1] = True
    mixed = int(np.count_nonzero(tags == TAG_MIXED))
    raw = np.frombuffer(bm.raw, dtype=np.uint8)
    if mixed:
        body[tags == TAG_MIXED] = np.unpackbits(
            raw[:mixed * CHUNK_BYTES], bitorder="little").reshape(mixed, CHUNK_BITS).astype(bool)
    tail = bm.nbits - full * CHUNK_BITS
    if tail:
        out[full * CHUNK_BITS:] = np.unpackbits(raw[mixed * CHUNK_BYTES:], count=tail, bitorder="little")
    return out


# ---------------------------------------------------------------------------
# bit packing

def _pack_codes(codes: np.ndarray, width: int) -> bytes:
    if len(codes) == 0:
        return b""
    shifts = np.arange(width, dtype=np.uint64)
    bits = ((codes[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits, axis=None, bitorder="little").tobytes()


def _unpack_codes(data: bytes, count: int, width: int) -> np.ndarray:
    if width > 56:
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count * width, bitorder="little")
        weights = np.uint64(1) << np.arange(width, dtype=np.uint64)
        return (bits.reshape(count, width).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    # read an 8-byte little-endian window per code; shift (<= 7) + width fits in 64 bits
    buf = np.frombuffer(bytes(data) + b"\0" * 8, dtype=np.uint8)
    start = np.arange(count, dtype=np.uint64) * np.uint64(width)
    idx = (start >> np.uint64(3)).astype(np.intp)
    window = np.zeros(count, dtype=np.uint64)
    for j in range(8):
        window |= buf[idx + j].astype(np.uint64) << np.uint64(8 * j)
    mask = np.uint64((1 << width) - 1)
    return (window >> (start & np.uint64(7))) & mask


# ---------------------------------------------------------------------------
# block codec

@dataclass(frozen=True)
class CompressedBlock:
    scalar_count: int
    b_r: float
    code_min: int = 0
    code_width: int = 0
    flags: int = 0
    sign_bitmap: PrescanBitmap | None = None
    zero_bitmap: PrescanBitmap | None = None
    codes: bytes = b""

    @property
    def all_zero(self) -> bool:
        return bool(self.flags & FLAG_ALL_ZERO)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(self.scalar_count, self.b_r, self.code_min, self.code_width, self.flags)
        if self.all_zero:
            return head
        return head + self.sign_bitmap.to_bytes() + self.zero_bitmap.to_bytes() + self.codes

    @classmethod
    def from_bytes(cls, data: bytes | memoryview) -> "CompressedBlock":
        if len(data) < _HEADER.size:
            raise CodecError("header", f"payload of {len(data)} bytes is shorter than the header")
        count, b_r, code_min, width, flags = _HEADER.unpack_from(data, 0)
        if not (b_r > 0 and math.isfinite(b_r)):
            raise CodecError("header", f"invalid error bound {b_r}")
        if flags & ~FLAG_ALL_ZERO:
            raise CodecError("header", f"unknown flags 0x{flags:02x}")
        if flags & FLAG_ALL_ZERO:
            if len(data) != _HEADER.size:
                raise CodecError("header", "ALL_ZERO payload carries trailing data")
            return cls(count, b_r, code_min, width, flags)
        if not 1 <= width <= 64:
            raise CodecError("header", f"invalid code width {width}")
        sign, off = PrescanBitmap.from_bytes(data, _HEADER.size, "sign bitmap")
        zero, off = PrescanBitmap.from_bytes(data, off, "zero bitmap")
        if sign.nbits != count or zero.nbits != count:
            raise CodecError("bitmap", f"bitmap lengths ({sign.nbits}, {zero.nbits}) != scalar count {count}")
        return cls(count, b_r, code_min, width, flags, sign, zero, bytes(data[off:]))


def compress_block(scalars: np.ndarray, bound: ErrorBound | float) -> CompressedBlock:
    """Compress a flat float64 array so every nonzero value keeps relative error <= ``b_r``."""
    if not isinstance(bound, ErrorBound):
        bound = ErrorBound(float(bound))
    x = np.asarray(scalars, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot compress NaN or infinite values")
    count = len(x)
    zero = x == 0.0
    if zero.all():
        return CompressedBlock(count, bound.b_r, flags=FLAG_ALL_ZERO)

    sign = x < 0.0
    nz = x[~zero]
    q = np.rint(np.log2(np.abs(nz)) / bound.b_a)
    if np.max(np.abs(q)) >= _MAX_CODE:
        raise ValueError("log-magnitude exceeds the 63-bit code range for this error bound")
    q = q.astype(np.int64)
    qmin = int(q.min())
    width = max(1, int(q.max() - qmin).bit_length())
    codes = _pack_codes((q - qmin).astype(np.uint64), width)
    return CompressedBlock(count, bound.b_r, qmin, width, 0,
                           prescan_encode(sign), prescan_encode(zero), codes)


def decompress_block(payload: CompressedBlock | bytes | memoryview) -> np.ndarray:
    if not isinstance(payload, CompressedBlock):
        payload = CompressedBlock.from_bytes(payload)
    count = payload.scalar_count
    if payload.all_zero:
        return np.zeros(count, dtype=np.float64)

    sign = prescan_decode(payload.sign_bitmap)
    zero = prescan_decode(payload.zero_bitmap)
    nonzero = count - int(np.count_nonzero(zero))
    need = (nonzero * payload.code_width + 7) // 8
    if len(payload.codes) != need:
        raise CodecError("codes", f"expected {need} bytes for {nonzero} codes, got {len(payload.codes)}")
    q = _unpack_codes(payload.codes, nonzero, payload.code_width).astype(np.int64) + payload.code_min
    b_a = relative_to_absolute_bound(payload.b_r)
    mag = np.exp2(q.astype(np.float64) * b_a)

    out = np.zeros(count, dtype=np.float64)
    keep = ~zero
    out[keep] = np.where(sign[keep], -mag, mag)
    return out


def compress_amplitudes(amps: np.ndarray, bound: ErrorBound | float) -> bytes:
    """Compress one complex block (real stream then imaginary stream) to payload bytes."""
    amps = np.asarray(amps, dtype=np.complex128)
    return compress_block(np.concatenate([amps.real, amps.imag]), bound).to_bytes()


def decompress_amplitudes(payload: bytes | memoryview) -> np.ndarray:
    scalars = decompress_block(payload)
    if len(scalars) % 2:
        raise CodecError("header", f"odd scalar count {len(scalars)} for a complex block")
    half = len(scalars) // 2
    out = np.empty(half, dtype=np.complex128)
    out.real = scalars[:half]
    out.imag = scalars[half:]
    return out
